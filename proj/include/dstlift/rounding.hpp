#pragma once

#include "dstlift/index_set.hpp"
#include "dstlift/instance.hpp"
#include "dstlift/moments.hpp"

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <type_traits>
#include <vector>

namespace dstlift {

/// Read-only access to y_P for edge sets P (edge e is variable e). Implementations
/// must be safe to query from several threads at once.
class MomentOracle {
 public:
  virtual ~MomentOracle() = default;
  virtual double value(const IndexSet& P) const = 0;
  /// True when exact_value is available.
  virtual bool exact() const { return false; }
  /// Throws std::logic_error on a float oracle.
  virtual Rational exact_value(const IndexSet& P) const;
};

/// Backed by an in-memory moment vector. Missing entries raise MomentError.
template <class T>
class VectorOracle final : public MomentOracle {
 public:
  explicit VectorOracle(std::shared_ptr<const MomentVector<T>> y) : y_(std::move(y)) {}
  explicit VectorOracle(MomentVector<T> y) : y_(std::make_shared<const MomentVector<T>>(std::move(y))) {}

  double value(const IndexSet& P) const override;
  bool exact() const override { return std::is_same_v<T, Rational>; }
  Rational exact_value(const IndexSet& P) const override;
  const MomentVector<T>& moments() const { return *y_; }

 private:
  std::shared_ptr<const MomentVector<T>> y_;
};

/// y_P = Σ mass over atoms whose support contains P, computed on demand. Useful
/// when the full moment vector of a distribution would be too large to store.
class DistributionOracle final : public MomentOracle {
 public:
  /// Throws MomentError when a mass is negative or the masses do not sum to 1.
  explicit DistributionOracle(std::vector<Atom<Rational>> atoms);

  double value(const IndexSet& P) const override { return to_double(exact_value(P)); }
  bool exact() const override { return true; }
  Rational exact_value(const IndexSet& P) const override;
  const std::vector<Atom<Rational>>& atoms() const { return atoms_; }

 private:
  std::vector<Atom<Rational>> atoms_;
};

/// Forwards to another oracle and counts the queries it sees.
class CountingOracle final : public MomentOracle {
 public:
  explicit CountingOracle(const MomentOracle& inner) : inner_(&inner) {}

  double value(const IndexSet& P) const override {
    count_.fetch_add(1, std::memory_order_relaxed);
    return inner_->value(P);
  }
  bool exact() const override { return inner_->exact(); }
  Rational exact_value(const IndexSet& P) const override {
    count_.fetch_add(1, std::memory_order_relaxed);
    return inner_->exact_value(P);
  }
  std::uint64_t count() const { return count_.load(); }
  void reset() { count_.store(0); }

 private:
  const MomentOracle* inner_;
  mutable std::atomic<std::uint64_t> count_{0};
};

/// Floats below this are treated as zero mass: such paths are never extended.
inline constexpr double kDeadPathThreshold = 1e-12;

/// Seed of trial/repetition `index` under a base seed (splitmix64 mixing).
std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t index);

/// One run of the top-down path sampler.
struct SampleRun {
  std::vector<PathRecord> paths;  // T in discovery order, partial paths included
  std::vector<int> Z;             // per terminal position: |T ∩ Q(s)|
  std::uint64_t seed = 0;
  std::size_t queries = 0;
  std::size_t clamps = 0;         // extension probabilities clamped into [0,1]
  std::size_t dead = 0;           // float paths with y_P below kDeadPathThreshold

  /// E(T), sorted and deduplicated.
  std::vector<EdgeId> edges() const;
  /// V(T) including the root, sorted.
  std::vector<NodeId> nodes(NodeId root) const;
};

/// Adds {e} for e leaving the root with probability y_{e}, then, level by level,
/// extends every sampled P by each e leaving its end with probability
/// y_{P∪e} / y_P. The generator is std::mt19937_64 seeded with `seed`; coins are
/// drawn in discovery order (paths in T order, edges in id order) and a coin
/// with 53-bit value k succeeds iff k / 2^53 < p. Exact oracles compare exactly.
SampleRun sample_once(const MomentOracle& oracle, const LayeredInstance& li, std::uint64_t seed);

/// max(1, ⌈2·ℓ·log₂|X|⌉)
int default_reps(int ell, int num_terminals);

struct RoundingResult {
  std::vector<EdgeId> edges;     // H, sorted, layered edge ids
  Rational cost;
  std::vector<bool> connected;   // per terminal, before repair
  int reps = 0;
  Rational repair_cost;          // c(H) minus the cost of the sampled union
  std::size_t queries = 0;
  std::size_t clamps = 0;
  std::size_t dead = 0;
};

/// Union of E(T) over `reps` runs (repetition i uses trial_seed(seed, i)) plus
/// the cheapest root path of every terminal the union misses. reps <= 0 selects
/// default_reps.
RoundingResult round(const MomentOracle& oracle, const LayeredInstance& li, int reps, std::uint64_t seed);

struct PathFrequency {
  std::vector<EdgeId> edges;
  std::uint64_t hits = 0;
  double y = 0;                // oracle value
  double freq = 0;
  double se = 0;               // binomial SE at y: sqrt(y(1-y)/N)
  double cond_mean_z = 0;      // mean Z over trials containing this path
  double cond_se = 0;
};

struct TerminalStats {
  NodeId terminal = -1;
  double mean_z = 0, se_mean_z = 0;
  double pr_hit = 0, se_pr_hit = 0;          // Pr[Z >= 1]
  std::uint64_t hits = 0;
  double cond_mean_z = 0, se_cond_mean_z = 0;  // pooled E[Z | Z >= 1]
  /// Largest per-path conditional mean E[Z | P ∈ T] over P ∈ Q(s) with hits, and its SE.
  double max_path_cond_mean_z = 0, se_max_path_cond_mean_z = 0;
  std::vector<PathFrequency> paths;  // every path of Q(s), plus any sampled one
};

struct StatsReport {
  std::uint64_t trials = 0;
  std::uint64_t seed = 0;
  std::vector<TerminalStats> terminals;
  std::vector<std::uint64_t> edge_hits;  // per edge: trials with e ∈ E(T)
  double mean_cost = 0, se_cost = 0;     // c(E(T))
  double mean_queries = 0, se_queries = 0;
  std::uint64_t clamps = 0;
  std::uint64_t dead = 0;
};

inline constexpr std::size_t kStatsPathCap = 20'000;

/// Runs `trials` independent samples (trial i seeded with trial_seed(seed, i))
/// in parallel; counts are reduced exactly and float sums in trial order, so the
/// result does not depend on the thread count.
StatsReport stats(const MomentOracle& oracle, const LayeredInstance& li, std::uint64_t trials, std::uint64_t seed);
/// Single-threaded reference; bit-identical to stats.
StatsReport stats_serial(const MomentOracle& oracle, const LayeredInstance& li, std::uint64_t trials,
                         std::uint64_t seed);

struct EdgeMarginal {
  EdgeId edge = -1;
  double y_e = 0;
  double path_sum = 0;     // Σ_{P ∈ Q(e)} y_P
  bool exact_ok = true;    // path_sum <= y_e (+ tol for float oracles)
  double freq = 0;         // empirical Pr[e ∈ E(T)]
  double se = 0;           // sqrt(y_e(1-y_e)/N)
  bool empirical_ok = true;
};

struct EdgeMarginalReport {
  bool ok = true;
  bool exact = false;
  std::vector<EdgeMarginal> edges;
  double lp_cost = 0;      // Σ c_e y_e
  double mean_cost = 0;    // empirical E[c(E(T))]
  double se_cost = 0;
  bool cost_ok = true;
};

/// Σ_{Q(e)} y_P <= y_e per edge (exactly on exact oracles), Pr[e ∈ E(T)] <= y_e + 3σ
/// and E[c(E(T))] <= Σ c_e y_e + 3σ.
EdgeMarginalReport edge_marginal_check(const MomentOracle& oracle, const LayeredInstance& li, std::uint64_t trials,
                                       std::uint64_t seed, double tol = 1e-6);

struct PathSumReport {
  bool ok = true;
  bool exact = false;
  std::vector<double> terminal_sums;  // Σ_{P ∈ Q(s)} y_P
  double max_deviation = 0;           // from 1, over terminals
  std::size_t prefixes_checked = 0;
  double max_prefix_excess = 0;       // max of Σ_{P ⊇ P'} y_P - y_{P'}
  std::string detail;
};

/// Σ_{P ∈ Q(s)} y_P = 1 per terminal and Σ_{P ∈ Q(s), P' ⊆ P} y_P <= y_{P'} for every
/// proper prefix P'. Exact oracles are checked exactly; float ones within tol.
PathSumReport path_sum_check(const MomentOracle& oracle, const LayeredInstance& li, double tol = 1e-6);

}  // namespace dstlift
