#include "dstlift/moments.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace dstlift {

namespace {

template <class T>
T convert(const Rational& q);
template <>
Rational convert<Rational>(const Rational& q) {
  return q;
}
template <>
double convert<double>(const Rational& q) {
  return q.get_d();
}

inline constexpr bool exact_v(const Rational*) { return true; }
inline constexpr bool exact_v(const double*) { return false; }
template <class T>
inline constexpr bool is_exact = exact_v(static_cast<const T*>(nullptr));

bool near(const Rational& a, const Rational& b, double) { return a == b; }
bool near(double a, double b, double tol) { return std::fabs(a - b) <= tol; }
bool leq(const Rational& a, const Rational& b, double) { return a <= b; }
bool leq(double a, double b, double tol) { return a <= b + tol; }
bool positive(const Rational& a, double) { return sgn(a) > 0; }
bool positive(double a, double tol) { return a > tol; }
double deviation(const Rational& a, const Rational& b) { return std::fabs(Rational(a - b).get_d()); }
double deviation(double a, double b) { return std::fabs(a - b); }

template <class T>
void record(CheckResult& r, double dev, bool failed, const std::string& what) {
  ++r.checked;
  r.max_deviation = std::max(r.max_deviation, dev);
  if (failed && r.ok) {
    r.ok = false;
    r.detail = what;
  }
}

template <class T>
std::string show(const T& v) {
  if constexpr (is_exact<T>) {
    return to_string(v);
  } else {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
  }
}

template <class T>
std::vector<std::pair<int, T>> convert_terms(std::span<const std::pair<int, Rational>> a) {
  std::vector<std::pair<int, T>> out;
  for (auto& [i, c] : a)
    if (c != 0) out.emplace_back(i, convert<T>(c));
  return out;
}

// z_K = Σ a_i y_{K∪{i}} - β y_K; nullopt when an entry is missing.
template <class T>
std::optional<T> shift_entry(const std::vector<std::pair<int, T>>& a, const T& beta, const MomentVector<T>& y,
                             const IndexSet& K) {
  const T* yk = y.find(K);
  if (!yk) return std::nullopt;
  T v = -beta * *yk;
  for (auto& [i, c] : a) {
    IndexSet Ki = K;
    Ki.insert(i);
    const T* e = y.find(Ki);
    if (!e) return std::nullopt;
    v += c * *e;
  }
  return v;
}

}  // namespace

// ---------------------------------------------------------------------------
// MomentVector

template <class T>
const T& MomentVector<T>::at(const IndexSet& I) const {
  auto it = entries_.find(I);
  if (it == entries_.end()) throw MomentError("missing moment entry " + I.to_string());
  return it->second;
}

template <class T>
std::vector<IndexSet> MomentVector<T>::sorted_keys() const {
  std::vector<IndexSet> keys;
  keys.reserve(entries_.size());
  for (auto& [k, v] : entries_) keys.push_back(k);
  std::sort(keys.begin(), keys.end(), canonical_less);
  return keys;
}

template <class T>
int MomentVector<T>::complete_degree() const {
  std::vector<std::uint64_t> count(n_ + 1, 0);
  for (auto& [k, v] : entries_) {
    int s = k.size();
    if (s <= n_ && k.max_element() < n_) ++count[s];
  }
  int d = -1;
  for (int k = 0; k <= n_; ++k) {
    std::uint64_t need = count_index_sets(n_, k) - (k > 0 ? count_index_sets(n_, k - 1) : 0);
    if (count[k] != need) break;
    d = k;
  }
  return d;
}

template <class T>
MomentVector<T> MomentVector<T>::restricted(int d) const {
  MomentVector out(n_, t_);
  for (auto& [k, v] : entries_)
    if (k.size() <= d) out.set(k, v);
  return out;
}

FloatMoments to_float(const RationalMoments& y) {
  FloatMoments out(y.num_vars(), y.level());
  for (auto& [k, v] : y.entries()) out.set(k, v.get_d());
  return out;
}

RationalMoments to_rational(const FloatMoments& y) {
  RationalMoments out(y.num_vars(), y.level());
  for (auto& [k, v] : y.entries()) out.set(k, Rational(v));
  return out;
}

// ---------------------------------------------------------------------------
// Matrices, shift, conditioning

template <class T>
MomentMatrix<T> moment_matrix_on(const MomentVector<T>& y, std::vector<IndexSet> index) {
  MomentMatrix<T> m;
  m.index = std::move(index);
  const int d = m.dim();
  m.values.assign(static_cast<std::size_t>(d) * d, T(0));
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) {
      const T& v = y.at(m.index[i] | m.index[j]);
      m(i, j) = v;
      if (i != j) m(j, i) = v;
    }
  return m;
}

template <class T>
MomentMatrix<T> moment_matrix(const MomentVector<T>& y, int d) {
  return moment_matrix_on(y, index_sets_up_to(y.num_vars(), d));
}

template <class T>
MomentVector<T> shift(std::span<const std::pair<int, Rational>> a, const Rational& beta, const MomentVector<T>& y) {
  auto coef = convert_terms<T>(a);
  T b = convert<T>(beta);
  MomentVector<T> z(y.num_vars(), y.level());
  for (auto& [K, v] : y.entries())
    if (auto e = shift_entry(coef, b, y, K)) z.set(K, std::move(*e));
  return z;
}

namespace {

struct SignedSubset {
  IndexSet H;
  bool negative;
};

std::vector<SignedSubset> signed_subsets(const IndexSet& D, int max_size) {
  if (D.size() > 24) throw MomentError("conditioning set too large (" + std::to_string(D.size()) + " free variables)");
  std::vector<SignedSubset> out;
  for (const auto& H : subsets_of(D, max_size)) out.push_back({H, H.size() % 2 == 1});
  return out;
}

}  // namespace

template <class T>
MomentVector<T> condition(const MomentVector<T>& y, const IndexSet& X, const IndexSet& S) {
  if (!X.subset_of(S)) throw MomentError("conditioning set " + X.to_string() + " is not a subset of " + S.to_string());
  if (!y.has(S)) throw MomentError("moment domain too small to condition on " + S.to_string());
  const auto hs = signed_subsets(S - X, S.size());
  MomentVector<T> z(y.num_vars(), y.level());
  for (auto& [I, v] : y.entries()) {
    if (!y.has(I | S)) continue;
    T acc(0);
    const IndexSet IX = I | X;
    for (auto& h : hs) {
      const T& e = y.at(IX | h.H);
      if (h.negative)
        acc -= e;
      else
        acc += e;
    }
    z.set(I, std::move(acc));
  }
  return z;
}

template <class T>
std::optional<MomentVector<T>> normalize_condition(const MomentVector<T>& y, const IndexSet& X, const IndexSet& S,
                                                   double tol) {
  MomentVector<T> z = condition(y, X, S);
  T z0 = z.at(IndexSet{});
  if (!positive(z0, tol)) return std::nullopt;
  MomentVector<T> w(z.num_vars(), z.level());
  for (auto& [I, v] : z.entries()) w.set(I, v / z0);
  return w;
}

// ---------------------------------------------------------------------------
// Atoms

template <class T>
std::vector<Atom<T>> mobius_atoms(const MomentVector<T>& y) {
  const int n = y.num_vars();
  if (n > kMaxAtomVars)
    throw MomentError("atomic decomposition needs 2^" + std::to_string(n) + " atoms; limit is " +
                      std::to_string(kMaxAtomVars) + " variables");
  const std::uint64_t full = std::uint64_t{1} << n;
  std::vector<T> a(full);
  for (std::uint64_t m = 0; m < full; ++m) a[m] = y.at(IndexSet::from_mask(m));
  for (int i = 0; i < n; ++i) {
    const std::uint64_t b = std::uint64_t{1} << i;
    for (std::uint64_t m = 0; m < full; ++m)
      if (!(m & b)) a[m] -= a[m | b];
  }
  std::vector<Atom<T>> out;
  for (std::uint64_t m = 0; m < full; ++m)
    if (a[m] != 0) out.push_back({IndexSet::from_mask(m), a[m]});
  return out;
}

template <class T>
MomentVector<T> from_atoms(std::span<const Atom<T>> atoms, int num_vars, int t) {
  const int D = std::min(2 * t + 2, num_vars);
  if (count_index_sets(num_vars, D) > kMaxDistributionEntries)
    throw MomentError("moment vector over " + std::to_string(num_vars) + " variables at level " + std::to_string(t) +
                      " needs " + std::to_string(count_index_sets(num_vars, D)) + " entries");
  MomentVector<T> y(num_vars, t);
  for (const auto& I : index_sets_up_to(num_vars, D)) y.set(I, T(0));
  for (const auto& atom : atoms) {
    if (atom.support.max_element() >= num_vars)
      throw MomentError("atom support " + atom.support.to_string() + " exceeds " + std::to_string(num_vars) + " variables");
    for (const auto& I : subsets_of(atom.support, D)) {
      T v = y.at(I) + atom.mass;
      y.set(I, std::move(v));
    }
  }
  return y;
}

RationalMoments from_distribution(std::span<const Atom<Rational>> atoms, int num_vars, int t) {
  Rational total = 0;
  for (const auto& a : atoms) {
    if (sgn(a.mass) < 0) throw MomentError("negative probability " + to_string(a.mass));
    total += a.mass;
  }
  if (total != 1) throw MomentError("probabilities sum to " + to_string(total) + ", not 1");
  return from_atoms(atoms, num_vars, t);
}

// ---------------------------------------------------------------------------
// Identity checks on conditioning

template <class T>
CheckResult inversion_check(const MomentVector<T>& y, const IndexSet& S, double tol) {
  CheckResult r;
  std::vector<MomentVector<T>> parts;
  for (const auto& X : subsets_of(S)) parts.push_back(condition(y, X, S));
  for (auto& [I, z0] : parts.front().entries()) {
    T sum(0);
    for (auto& p : parts) sum += p.at(I);
    const T& yi = y.at(I);
    record<T>(r, deviation(sum, yi), !near(sum, yi, tol),
              "entry " + I.to_string() + ": sum " + show(sum) + " vs " + show(yi));
  }
  return r;
}

template <class T>
CheckResult shift_commutes_check(const MomentVector<T>& y, const IndexSet& X, const IndexSet& S, const LinearRow& row,
                                 double tol) {
  CheckResult r;
  MomentVector<T> lhs = shift(row, condition(y, X, S));
  MomentVector<T> rhs = condition(shift(row, y), X, S);
  for (auto& [I, v] : lhs.entries()) {
    const T* w = rhs.find(I);
    if (!w) continue;
    record<T>(r, deviation(v, *w), !near(v, *w, tol), "entry " + I.to_string() + ": " + show(v) + " vs " + show(*w));
  }
  return r;
}

// ---------------------------------------------------------------------------
// Decomposition

template <class T>
Decomposition<T> decompose(const MomentVector<T>& y, const IndexSet& S, int k, double tol) {
  const int t = y.level();
  const int n = y.num_vars();
  if (k < 0 || k > t) throw MomentError("decomposition needs 0 <= k <= t (k=" + std::to_string(k) + ", t=" + std::to_string(t) + ")");
  if (S.max_element() >= n) throw MomentError("decomposition set " + S.to_string() + " exceeds the variable range");
  for (auto& [I, v] : y.entries())
    if ((I & S).size() > k && (is_exact<T> ? v != 0 : std::fabs(to_double(v)) > tol))
      throw MomentError("decomposition precondition fails: y" + I.to_string() + " = " + show(v) + " with " +
                        std::to_string((I & S).size()) + " variables of S, more than k=" + std::to_string(k));

  Decomposition<T> dec;
  dec.S = S;
  dec.k = k;
  dec.level = t - k;
  const int D = std::min(2 * (t - k) + 2, n);
  const auto family = index_sets_up_to(n, D);
  for (const auto& X : subsets_of(S, k)) {
    const IndexSet free = S - X;
    MomentVector<T> z(n, t - k);
    for (const auto& I : family) {
      const IndexSet base = (I & S) | X;
      if (I.intersects(free) || base.size() > k) {
        z.set(I, T(0));
        continue;
      }
      T acc(0);
      const IndexSet IX = I | X;
      for (const auto& H : subsets_of(free, k - base.size())) {
        const T& e = y.at(IX | H);
        if (H.size() % 2)
          acc -= e;
        else
          acc += e;
      }
      z.set(I, std::move(acc));
    }
    T weight = z.at(IndexSet{});
    if (!positive(weight, tol)) continue;
    MomentVector<T> w(n, t - k);
    for (auto& [I, v] : z.entries()) w.set(I, v / weight);
    dec.terms.push_back({X, std::move(weight), std::move(w)});
  }
  return dec;
}

template <class T>
CheckResult reconstruction_check(const MomentVector<T>& y, const Decomposition<T>& dec, double tol) {
  CheckResult r;
  const int n = y.num_vars();
  const int D = std::min(2 * dec.level + 2, n);
  T total(0);
  for (auto& term : dec.terms) total += term.weight;
  record<T>(r, deviation(total, T(1)), !near(total, T(1), tol), "weights sum to " + show(total));
  for (const auto& I : index_sets_up_to(n, D)) {
    T sum(0);
    for (auto& term : dec.terms) sum += term.weight * term.w.at(I);
    T target = (I & dec.S).size() > dec.k ? T(0) : y.at(I);
    record<T>(r, deviation(sum, target), !near(sum, target, tol),
              "entry " + I.to_string() + ": " + show(sum) + " vs " + show(target));
  }
  for (auto& term : dec.terms)
    dec.S.for_each([&](int i) {
      T want = term.X.contains(i) ? T(1) : T(0);
      const T& got = term.w.at(IndexSet{i});
      record<T>(r, deviation(got, want), !near(got, want, tol),
                "w^" + term.X.to_string() + " has y{" + std::to_string(i) + "} = " + show(got));
    });
  return r;
}

// ---------------------------------------------------------------------------
// PSD tests

bool is_psd_exact(const MomentMatrix<Rational>& m) {
  const int n = m.dim();
  std::vector<Rational> a(m.values);
  auto at = [&](int i, int j) -> Rational& { return i <= j ? a[static_cast<std::size_t>(i) * n + j] : a[static_cast<std::size_t>(j) * n + i]; };
  std::vector<int> active(n);
  for (int i = 0; i < n; ++i) active[i] = i;
  for (;;) {
    // zero diagonals need zero rows; negative diagonals reject
    std::vector<int> keep;
    for (int i : active) {
      int s = sgn(at(i, i));
      if (s < 0) return false;
      if (s == 0) {
        for (int j : active)
          if (sgn(at(i, j)) != 0) return false;
      } else {
        keep.push_back(i);
      }
    }
    active.swap(keep);
    if (active.empty()) return true;
    const int p = active.front();
    const Rational inv = 1 / at(p, p);
    std::vector<Rational> f(active.size());
    for (std::size_t x = 1; x < active.size(); ++x) f[x] = at(p, active[x]) * inv;
    for (std::size_t x = 1; x < active.size(); ++x) {
      if (sgn(f[x]) == 0) continue;
      const int i = active[x];
      const Rational& api = at(p, i);
      for (std::size_t w = x; w < active.size(); ++w) {
        const int j = active[w];
        if (sgn(f[w]) != 0) at(i, j) -= api * f[w];
      }
    }
    active.erase(active.begin());
  }
}

double min_eigenvalue(const MomentMatrix<double>& m) {
  const int n = m.dim();
  if (n == 0) return std::numeric_limits<double>::infinity();
  Eigen::Map<const Eigen::MatrixXd> mat(m.values.data(), n, n);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(mat, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

double max_abs_entry(const MomentMatrix<double>& m) {
  double v = 0;
  for (double x : m.values) v = std::max(v, std::fabs(x));
  return v;
}

// ---------------------------------------------------------------------------
// certify

namespace {

constexpr std::size_t kMaxListedViolations = 50;

void add_violation(CertifyReport& rep, std::string kind, std::string where, double amount) {
  rep.ok = false;
  if (rep.violations.size() < kMaxListedViolations) rep.violations.push_back({std::move(kind), std::move(where), amount});
}

struct BlockResult {
  bool psd = true;
  double min_eig = 0;
};

template <class T>
BlockResult check_block(const MomentMatrix<T>& m, double tol) {
  if constexpr (is_exact<T>) {
    return {is_psd_exact(m), 0};
  } else {
    double ev = min_eigenvalue(m);
    double thresh = -tol * std::max(1.0, max_abs_entry(m));
    return {ev >= thresh, m.dim() ? ev : 0};
  }
}

template <class T>
BlockResult check_row(const MomentVector<T>& y, const LinearRow& row, int t) {
  const int n = y.num_vars();
  auto coef = convert_terms<T>(row.terms);
  T beta = convert<T>(row.rhs);
  MomentVector<T> z(n, t);
  for (const auto& K : index_sets_up_to(n, std::min(2 * t, n))) z.set(K, *shift_entry(coef, beta, y, K));
  return check_block(moment_matrix(z, std::min(t, n)), 0);
}

template <class T>
void check_identities(const MomentVector<T>& y, int t, double tol, CertifyReport& rep) {
  auto mono = check_monotone(y, t, tol);
  if (!mono.ok) add_violation(rep, "monotone", mono.detail, mono.max_deviation);
  auto absorb = check_one_absorbs(y, t, tol);
  if (!absorb.ok) add_violation(rep, "absorb", absorb.detail, absorb.max_deviation);
}

template <class T>
CertifyReport certify_impl(const MomentVector<T>& y, const ConstraintSystem& cs, int t, double tol, bool parallel) {
  CertifyReport rep;
  rep.exact = is_exact<T>;
  rep.t = t;
  rep.tol = tol;
  const int n = y.num_vars();
  const int D = std::min(2 * t + 2, n);
  rep.domain = "P_" + std::to_string(2 * t + 2) + " over " + std::to_string(n) + " variables";
  if (cs.num_vars != n) {
    add_violation(rep, "dimension", "vector has " + std::to_string(n) + " variables, system " + std::to_string(cs.num_vars), 0);
    return rep;
  }
  for (const auto& I : index_sets_up_to(n, D))
    if (!y.has(I)) {
      if (rep.missing_entries++ == 0) rep.first_missing = I.to_string();
    }
  if (rep.missing_entries) {
    add_violation(rep, "missing", rep.first_missing, static_cast<double>(rep.missing_entries));
    return rep;
  }
  const T& y0 = y.at(IndexSet{});
  rep.y_empty = to_double(y0);
  if (!near(y0, T(1), tol)) add_violation(rep, "normalization", "y{}", deviation(y0, T(1)));

  auto mb = check_block(moment_matrix(y, std::min(t + 1, n)), tol);
  rep.moment_psd = mb.psd;
  rep.moment_min_eig = mb.min_eig;
  rep.blocks_checked = 1;
  if (!mb.psd) add_violation(rep, "moment_psd", "M_" + std::to_string(t + 1), mb.min_eig);

  const int rows = static_cast<int>(cs.rows.size());
  std::vector<BlockResult> res(rows);
  if constexpr (is_exact<T>) {
#pragma omp parallel for schedule(dynamic) if (parallel)
    for (int i = 0; i < rows; ++i) res[i] = check_row(y, cs.rows[i], t);
  } else {
    // float: the threshold depends on the block scale, so re-evaluate here
#pragma omp parallel for schedule(dynamic) if (parallel)
    for (int i = 0; i < rows; ++i) {
      auto coef = convert_terms<double>(cs.rows[i].terms);
      double beta = cs.rows[i].rhs.get_d();
      MomentVector<double> z(n, t);
      for (const auto& K : index_sets_up_to(n, std::min(2 * t, n))) z.set(K, *shift_entry(coef, beta, y, K));
      res[i] = check_block(moment_matrix(z, std::min(t, n)), tol);
    }
  }
  rep.blocks_checked += rows;
  rep.worst_row_min_eig = std::numeric_limits<double>::infinity();
  for (int i = 0; i < rows; ++i) {
    if (!is_exact<T> && res[i].min_eig < rep.worst_row_min_eig) {
      rep.worst_row_min_eig = res[i].min_eig;
      rep.worst_row = i;
    }
    if (!res[i].psd) {
      if (rep.failing_rows++ == 0 && is_exact<T>) rep.worst_row = i;
      add_violation(rep, "row_psd", "row " + std::to_string(i) + " " + cs.rows[i].label, res[i].min_eig);
    }
  }
  if (rows == 0 || is_exact<T>) rep.worst_row_min_eig = 0;
  check_identities(y, t, tol, rep);
  return rep;
}

}  // namespace

template <class T>
CertifyReport certify(const MomentVector<T>& y, const ConstraintSystem& cs, int t, double tol) {
  return certify_impl(y, cs, t, tol, true);
}

CertifyReport certify_serial(const FloatMoments& y, const ConstraintSystem& cs, int t, double tol) {
  return certify_impl(y, cs, t, tol, false);
}

// ---------------------------------------------------------------------------
// Identities

template <class T>
CheckResult check_monotone(const MomentVector<T>& y, int t, double tol) {
  CheckResult r;
  for (const auto& I : index_sets_up_to(y.num_vars(), std::min(t, y.num_vars()))) {
    const T& v = y.at(I);
    record<T>(r, 0, !leq(T(0), v, tol), "y" + I.to_string() + " = " + show(v) + " < 0");
    record<T>(r, 0, !leq(v, T(1), tol), "y" + I.to_string() + " = " + show(v) + " > 1");
    I.for_each([&](int i) {
      IndexSet J = I;
      J.erase(i);
      const T& u = y.at(J);
      bool bad = !leq(v, u, tol);
      record<T>(r, bad ? deviation(v, u) : 0, bad, "y" + I.to_string() + " = " + show(v) + " > y" + J.to_string() + " = " + show(u));
    });
  }
  return r;
}

template <class T>
CheckResult check_one_iff_singletons(const MomentVector<T>& y, int t, double tol) {
  CheckResult r;
  for (const auto& I : index_sets_up_to(y.num_vars(), std::min(t, y.num_vars()))) {
    if (I.empty()) continue;
    bool all_one = true;
    I.for_each([&](int i) { all_one = all_one && near(y.at(IndexSet{i}), T(1), tol); });
    bool one = near(y.at(I), T(1), tol);
    record<T>(r, 0, one != all_one, "y" + I.to_string() + " = " + show(y.at(I)) + " disagrees with its singletons");
  }
  return r;
}

template <class T>
CheckResult check_product_on_integral(const MomentVector<T>& y, int t, double tol) {
  CheckResult r;
  for (const auto& I : index_sets_up_to(y.num_vars(), std::min(t, y.num_vars()))) {
    if (I.size() < 2) continue;
    bool integral = true;
    T prod(1);
    I.for_each([&](int i) {
      const T& s = y.at(IndexSet{i});
      if (near(s, T(0), tol))
        prod = T(0);
      else if (!near(s, T(1), tol))
        integral = false;
    });
    if (!integral) continue;
    const T& v = y.at(I);
    record<T>(r, deviation(v, prod), !near(v, prod, tol), "y" + I.to_string() + " = " + show(v) + ", product " + show(prod));
  }
  return r;
}

template <class T>
CheckResult check_one_absorbs(const MomentVector<T>& y, int t, double tol) {
  CheckResult r;
  const auto sets = index_sets_up_to(y.num_vars(), std::min(t, y.num_vars()));
  for (const auto& I : sets) {
    if (I.empty() || !near(y.at(I), T(1), tol)) continue;
    for (const auto& J : sets) {
      const T& a = y.at(I | J);
      const T& b = y.at(J);
      record<T>(r, deviation(a, b), !near(a, b, tol),
                "y" + I.to_string() + " = 1 but y" + (I | J).to_string() + " = " + show(a) + " != y" + J.to_string() + " = " + show(b));
    }
  }
  return r;
}

CheckResult check_determinant_identity(const RationalMoments& y, int t) {
  CheckResult r;
  const auto sets = index_sets_up_to(y.num_vars(), std::min(t, y.num_vars()));
  const Rational& e = y.at(IndexSet{});
  for (const auto& I : sets) {
    if (I.empty() || y.at(I) != 1) continue;
    const Rational& yi = y.at(I);
    for (const auto& J : sets) {
      if (J.empty() || J == I) continue;
      const Rational& yj = y.at(J);
      const Rational& yij = y.at(I | J);
      // rows/cols {∅, I, J}
      Rational det = e * (yi * yj - yij * yij) - yi * (yi * yj - yij * yj) + yj * (yi * yij - yi * yj);
      Rational want = -(yj - yij) * (yj - yij);
      record<Rational>(r, deviation(det, want), det != want,
                       "det at I=" + I.to_string() + ", J=" + J.to_string() + ": " + to_string(det) + " vs " + to_string(want));
    }
  }
  return r;
}

bool InfeasibleSetProbe::infeasible(const IndexSet& I) {
  if (auto it = cache_.find(I); it != cache_.end()) return it->second;
  bool result = false;
  // infeasibility is inherited by supersets
  I.for_each([&](int i) {
    if (result) return;
    IndexSet J = I;
    J.erase(i);
    if (auto it = cache_.find(J); it != cache_.end() && it->second) result = true;
  });
  if (!result) {
    ++probes_;
    auto ones = I.elements();
    result = !feasible_with_ones(*cs_, ones);
  }
  cache_.emplace(I, result);
  return result;
}

template <class T>
CheckResult check_infeasible_zeros(const MomentVector<T>& y, InfeasibleSetProbe& probe, int t, double tol) {
  CheckResult r;
  for (const auto& I : index_sets_up_to(y.num_vars(), std::min(t, y.num_vars()))) {
    if (I.empty() || !probe.infeasible(I)) continue;
    const T& v = y.at(I);
    record<T>(r, std::fabs(to_double(v)), !near(v, T(0), tol), "infeasible set " + I.to_string() + " has y = " + show(v));
  }
  return r;
}

// ---------------------------------------------------------------------------
// Instantiations

#define DSTLIFT_INSTANTIATE(T)                                                                                     \
  template class MomentVector<T>;                                                                                  \
  template MomentMatrix<T> moment_matrix(const MomentVector<T>&, int);                                             \
  template MomentMatrix<T> moment_matrix_on(const MomentVector<T>&, std::vector<IndexSet>);                        \
  template MomentVector<T> shift(std::span<const std::pair<int, Rational>>, const Rational&, const MomentVector<T>&); \
  template MomentVector<T> condition(const MomentVector<T>&, const IndexSet&, const IndexSet&);                    \
  template std::optional<MomentVector<T>> normalize_condition(const MomentVector<T>&, const IndexSet&,             \
                                                              const IndexSet&, double);                            \
  template std::vector<Atom<T>> mobius_atoms(const MomentVector<T>&);                                              \
  template MomentVector<T> from_atoms(std::span<const Atom<T>>, int, int);                                         \
  template CheckResult inversion_check(const MomentVector<T>&, const IndexSet&, double);                           \
  template CheckResult shift_commutes_check(const MomentVector<T>&, const IndexSet&, const IndexSet&,              \
                                            const LinearRow&, double);                                             \
  template Decomposition<T> decompose(const MomentVector<T>&, const IndexSet&, int, double);                       \
  template CheckResult reconstruction_check(const MomentVector<T>&, const Decomposition<T>&, double);              \
  template CertifyReport certify(const MomentVector<T>&, const ConstraintSystem&, int, double);                    \
  template CheckResult check_monotone(const MomentVector<T>&, int, double);                                        \
  template CheckResult check_one_iff_singletons(const MomentVector<T>&, int, double);                              \
  template CheckResult check_product_on_integral(const MomentVector<T>&, int, double);                             \
  template CheckResult check_one_absorbs(const MomentVector<T>&, int, double);                                     \
  template CheckResult check_infeasible_zeros(const MomentVector<T>&, InfeasibleSetProbe&, int, double);

DSTLIFT_INSTANTIATE(Rational)
DSTLIFT_INSTANTIATE(double)

}  // namespace dstlift
