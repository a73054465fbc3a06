#pragma once

#include "dstlift/instance.hpp"
#include "dstlift/lasserre_sdp.hpp"

#include "json.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace dstlift {

/// Error raised inside run_pipeline; what() starts with the stage name.
class PipelineError : public std::runtime_error {
 public:
  PipelineError(const std::string& stage, const std::string& msg)
      : std::runtime_error(stage + ": " + msg), stage_(stage) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

/// Root -> one node per set (edge cost = set cost) -> element terminals (cost 0).
/// Throws InstanceError when some element of [0, k) is in no set.
DstInstance gen_set_cover(const std::vector<std::vector<int>>& sets, std::span<const Rational> costs, int k);
/// m random sets over k elements (each element joins each set with probability
/// 1/2, uncovered elements go to a random set), integer costs in [1, 5].
DstInstance gen_set_cover(int m, int k, std::uint64_t seed);
/// k elements, every (k-1)-subset as a unit-cost set: LP value k/(k-1), optimum 2.
DstInstance gen_set_cover_gap(int k);

struct LayeredSpec {
  int ell = 1;
  std::vector<int> widths;  // nodes per level 1..ell; the last level is the terminal set
  double density = 0.5;     // probability of each edge between consecutive levels
  int cost_lo = 1;
  int cost_hi = 10;
  std::uint64_t seed = 0;
  int retries = 100;
};

/// Random layered DAG in which every node is reachable from the root. Edge sets
/// are redrawn up to spec.retries times; throws InstanceError after that.
DstInstance gen_random_layered(const LayeredSpec& spec);

/// 64-bit FNV-1a of write_instance(inst).
std::uint64_t instance_hash(const DstInstance& inst);

/// The instance itself when it is already layered with depth ell, otherwise
/// levelize(inst, ell) with pruning. Moment files are numbered against this view.
LayeredInstance layered_view(const DstInstance& inst, int ell, bool* as_is = nullptr);

struct PipelineConfig {
  SolverConfig solver;
  bool solve_sdp = true;
  std::string moments_path;   // import moments instead of solving when non-empty
  bool round = true;
  int reps = 0;               // 0: default_reps
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  double certify_tol = 1e-5;
  double sandwich_tol = 1e-5; // relative

  nlohmann::json to_json() const;
};

struct ExperimentRow {
  std::string id;
  std::uint64_t hash = 0;
  int n = 0;
  int terminals = 0;
  int ell = 0;
  int t = 0;
  std::string layering;       // "as-is" or "levelized"
  int layered_nodes = 0;
  int layered_edges = 0;
  int num_vars = 0;
  std::string lp_exact;
  double lp = 0;
  std::optional<double> sdp;
  std::string sdp_method;
  bool sdp_certified = false;
  int sdp_iterations = 0;
  int reps = 0;
  std::vector<double> rounded;        // mapped cost per seed
  std::vector<bool> repaired;         // per seed: some terminal needed repair
  std::optional<double> rounded_mean;
  std::optional<double> rounded_std;
  std::string opt_exact;              // original instance
  double opt = 0;
  double opt_layered = 0;
  bool sandwich_ok = true;            // LP <= SDP <= OPT(layered), relative tolerance

  nlohmann::json to_json() const;
};

/// levelize (or wrap an already layered instance with depth ell) -> solve_lp ->
/// assemble + solve (or import) -> certify -> round per seed -> exact_opt.
/// Rounding needs t >= ell; otherwise PipelineError("round", ...).
ExperimentRow run_pipeline(const DstInstance& inst, const std::string& id, int ell, int t,
                           const PipelineConfig& cfg);

struct ExperimentReport {
  std::string suite;
  PipelineConfig config;
  std::vector<ExperimentRow> rows;

  nlohmann::json to_json() const;
  /// Whitespace-separated table with a '#' header line (gnuplot-readable).
  std::string to_tsv() const;
};

/// "smoke", "gap" or "full". Throws std::invalid_argument for other names.
ExperimentReport run_suite(const std::string& suite, const PipelineConfig& cfg = {});

/// Small instances shared by the suites and the tests.
DstInstance single_edge_instance();
/// r -> a -> s and r -> b -> s, unit costs.
DstInstance two_route_instance();
/// r -> s_i, unit costs.
DstInstance star_instance(int terminals);
/// Three-level example with four terminals and optimum 19 (same as data/three_level.dst).
DstInstance three_level_instance();

}  // namespace dstlift
