#pragma once

#include "dstlift/flow_lp.hpp"
#include "dstlift/index_set.hpp"
#include "dstlift/rational.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace dstlift {

/// Missing entries, bad conditioning arguments, violated preconditions.
class MomentError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Partial map from index sets to values. Absent entries are undefined, never zero.
/// T is Rational (exact backend) or double (solver output).
template <class T>
class MomentVector {
 public:
  MomentVector() = default;
  MomentVector(int num_vars, int level) : n_(num_vars), t_(level) {}

  int num_vars() const { return n_; }
  int level() const { return t_; }
  void set_level(int t) { t_ = t; }

  bool has(const IndexSet& I) const { return entries_.count(I) != 0; }
  /// Throws MomentError naming the missing index set.
  const T& at(const IndexSet& I) const;
  const T* find(const IndexSet& I) const {
    auto it = entries_.find(I);
    return it == entries_.end() ? nullptr : &it->second;
  }
  void set(const IndexSet& I, T value) { entries_[I] = std::move(value); }
  std::size_t size() const { return entries_.size(); }
  const std::unordered_map<IndexSet, T, IndexSetHash>& entries() const { return entries_; }
  /// Keys in canonical order.
  std::vector<IndexSet> sorted_keys() const;

  /// Largest d such that every |I| <= d over num_vars() variables is present.
  int complete_degree() const;
  /// Every |I| <= min(2*level+2, n) present.
  bool complete() const { return complete_degree() >= std::min(2 * t_ + 2, n_); }

  /// Keeps only entries with |I| <= d.
  MomentVector restricted(int d) const;

  friend bool operator==(const MomentVector& a, const MomentVector& b) {
    return a.n_ == b.n_ && a.t_ == b.t_ && a.entries_ == b.entries_;
  }

 private:
  int n_ = 0;
  int t_ = 0;
  std::unordered_map<IndexSet, T, IndexSetHash> entries_;
};

using RationalMoments = MomentVector<Rational>;
using FloatMoments = MomentVector<double>;

FloatMoments to_float(const RationalMoments& y);
/// Exact copy of a double-valued vector (every double is a rational).
RationalMoments to_rational(const FloatMoments& y);

/// Dense symmetric matrix over a list of index sets.
template <class T>
struct MomentMatrix {
  std::vector<IndexSet> index;
  std::vector<T> values;  // row-major

  int dim() const { return static_cast<int>(index.size()); }
  T& operator()(int i, int j) { return values[static_cast<std::size_t>(i) * index.size() + j]; }
  const T& operator()(int i, int j) const { return values[static_cast<std::size_t>(i) * index.size() + j]; }
};

/// M_d(y): rows and columns are all |I| <= d in canonical order, entry y_{I∪J}.
template <class T>
MomentMatrix<T> moment_matrix(const MomentVector<T>& y, int d);
/// Same construction over an explicit index family.
template <class T>
MomentMatrix<T> moment_matrix_on(const MomentVector<T>& y, std::vector<IndexSet> index);

/// z_I = Σ_i a_i y_{I∪{i}} - β y_I, on every I whose required entries exist.
template <class T>
MomentVector<T> shift(std::span<const std::pair<int, Rational>> a, const Rational& beta, const MomentVector<T>& y);
template <class T>
MomentVector<T> shift(const LinearRow& row, const MomentVector<T>& y) {
  return shift(std::span<const std::pair<int, Rational>>(row.terms), row.rhs, y);
}

/// Conditioning on X and -S\X: z_I = Σ_{H ⊆ S\X} (-1)^|H| y_{I∪X∪H}, for every I
/// with I∪S in the (downward closed) domain of y.
template <class T>
MomentVector<T> condition(const MomentVector<T>& y, const IndexSet& X, const IndexSet& S);

/// condition(y, X, S) / z_∅, or nullopt when z_∅ is not positive (exact) or <= tol (float).
template <class T>
std::optional<MomentVector<T>> normalize_condition(const MomentVector<T>& y, const IndexSet& X, const IndexSet& S,
                                                   double tol = 1e-9);

/// Probability mass of one full 0/1 assignment, identified by its support.
template <class T>
struct Atom {
  IndexSet support;
  T mass;
};

inline constexpr int kMaxAtomVars = 20;

/// Atomic masses y_x = y_{supp(x), -complement} of a full-level vector. Atoms with
/// mass exactly zero are omitted; the rest come in increasing support-mask order.
/// Throws MomentError for more than kMaxAtomVars variables or a missing entry.
template <class T>
std::vector<Atom<T>> mobius_atoms(const MomentVector<T>& y);

/// y_I = Σ_{x : I ⊆ supp(x)} y_x on every |I| <= min(2t+2, n).
template <class T>
MomentVector<T> from_atoms(std::span<const Atom<T>> atoms, int num_vars, int t);

/// from_atoms for a probability distribution over 0/1 points. Throws MomentError
/// when a mass is negative, the masses do not sum to 1, or the domain would
/// exceed kMaxDistributionEntries.
inline constexpr std::uint64_t kMaxDistributionEntries = 4'000'000;
RationalMoments from_distribution(std::span<const Atom<Rational>> atoms, int num_vars, int t);

struct CheckResult {
  bool ok = true;
  double max_deviation = 0;
  std::size_t checked = 0;
  std::string detail;  // first failure
};

/// y = Σ_{X ⊆ S} condition(y, X, S) on the domain of condition(y, ∅, S).
template <class T>
CheckResult inversion_check(const MomentVector<T>& y, const IndexSet& S, double tol = 0);

/// shift(row, condition(y, X, S)) == condition(shift(row, y), X, S) entrywise
/// wherever both sides are defined.
template <class T>
CheckResult shift_commutes_check(const MomentVector<T>& y, const IndexSet& X, const IndexSet& S, const LinearRow& row,
                                 double tol = 0);

template <class T>
struct DecompositionTerm {
  IndexSet X;
  T weight;            // z^X_∅
  MomentVector<T> w;   // normalized conditioning, level t-k, domain |I| <= 2(t-k)+2
};

template <class T>
struct Decomposition {
  IndexSet S;
  int k = 0;
  int level = 0;  // t - k
  std::vector<DecompositionTerm<T>> terms;
};

/// Splits y into Σ λ_X w^X over X ⊆ S, |X| <= k, with each w^X integral on S.
/// Entries with |I ∩ S| > k are treated as zero (they must be zero where y
/// defines them; MomentError names the first offender otherwise). Terms with
/// non-positive weight (exact) or weight <= tol (float) are dropped.
template <class T>
Decomposition<T> decompose(const MomentVector<T>& y, const IndexSet& S, int k, double tol = 1e-9);

/// Σ λ_X w^X reproduces y on |I| <= 2(t-k)+2, weights sum to 1, and every w^X
/// is 0/1 on the singletons of S.
template <class T>
CheckResult reconstruction_check(const MomentVector<T>& y, const Decomposition<T>& dec, double tol = 0);

// ---------------------------------------------------------------------------
// Positive semidefiniteness

/// Exact test by symmetric pivoting: a zero diagonal requires a zero row,
/// a negative diagonal rejects, positive pivots are eliminated by Schur complement.
bool is_psd_exact(const MomentMatrix<Rational>& m);
/// Smallest eigenvalue (Eigen self-adjoint solver); +inf for an empty matrix.
double min_eigenvalue(const MomentMatrix<double>& m);
double max_abs_entry(const MomentMatrix<double>& m);

struct Violation {
  std::string kind;
  std::string where;
  double amount = 0;
};

struct CertifyReport {
  bool ok = true;
  bool exact = false;
  int t = 0;
  double tol = 0;
  std::size_t missing_entries = 0;
  std::string first_missing;
  double y_empty = 0;
  double moment_min_eig = 0;      // float backend only
  bool moment_psd = true;
  int worst_row = -1;             // row with the smallest eigenvalue / first failing row
  double worst_row_min_eig = 0;   // float backend only
  int failing_rows = 0;
  int blocks_checked = 0;
  std::string domain;             // "P_{2t+2}" over n variables
  std::vector<Violation> violations;
};

/// Membership test for Las_t(K) plus the monotonicity and absorption identities.
/// Rational: exact (tol ignored). Float: eigenvalues >= -tol*max(1, max|entry|).
template <class T>
CertifyReport certify(const MomentVector<T>& y, const ConstraintSystem& cs, int t, double tol);

/// Serial reference for the float row loop in certify.
CertifyReport certify_serial(const FloatMoments& y, const ConstraintSystem& cs, int t, double tol);

// ---------------------------------------------------------------------------
// Identities that hold for every member of Las_t(K)

/// 0 <= y_I <= y_J <= 1 for J ⊆ I, |I| <= t.
template <class T>
CheckResult check_monotone(const MomentVector<T>& y, int t, double tol = 0);
/// y_I = 1 iff every singleton of I is 1, |I| <= t.
template <class T>
CheckResult check_one_iff_singletons(const MomentVector<T>& y, int t, double tol = 0);
/// Singletons of I all in {0,1} implies y_I = product, |I| <= t.
template <class T>
CheckResult check_product_on_integral(const MomentVector<T>& y, int t, double tol = 0);
/// y_I = 1 implies y_{I∪J} = y_J, |I|, |J| <= t.
template <class T>
CheckResult check_one_absorbs(const MomentVector<T>& y, int t, double tol = 0);
/// For y_I = 1: det of the {∅, I, J} principal submatrix equals -(y_J - y_{I∪J})^2.
CheckResult check_determinant_identity(const RationalMoments& y, int t);

/// Caches exact LP probes "is K ∩ {x_i = 1, i ∈ I} empty?".
class InfeasibleSetProbe {
 public:
  explicit InfeasibleSetProbe(const ConstraintSystem& cs) : cs_(&cs) {}
  bool infeasible(const IndexSet& I);
  std::size_t probes() const { return probes_; }

 private:
  const ConstraintSystem* cs_;
  std::unordered_map<IndexSet, bool, IndexSetHash> cache_;
  std::size_t probes_ = 0;
};

/// y_I = 0 (exact) or <= tol (float) for every |I| <= t that the probe reports infeasible.
template <class T>
CheckResult check_infeasible_zeros(const MomentVector<T>& y, InfeasibleSetProbe& probe, int t, double tol = 0);

}  // namespace dstlift
