#include "dstlift/lasserre_sdp.hpp"

#include "dstlift/instance.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <boost/random/mersenne_twister.hpp>
#include <boost/random/uniform_real_distribution.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <map>
#include <sstream>

namespace dstlift {

std::uint64_t moment_budget() {
  if (const char* env = std::getenv("DSTLIFT_MOMENT_BUDGET")) {
    char* end = nullptr;
    unsigned long long v = std::strtoull(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return v;
  }
  return kDefaultMomentBudget;
}

nlohmann::json DimensionReport::to_json() const {
  return {{"num_vars", num_vars},     {"t", t},
          {"num_rows", num_rows},     {"moment_dim", moment_dim},
          {"row_dim", row_dim},       {"free_vars", free_vars},
          {"psd_blocks", psd_blocks}, {"budget", budget},
          {"within_budget", within_budget}};
}

DimensionReport lift_dimensions(const ConstraintSystem& cs, int t) {
  if (t < 0) throw std::invalid_argument("lift level must be nonnegative");
  DimensionReport d;
  d.num_vars = cs.num_vars;
  d.t = t;
  d.num_rows = static_cast<int>(cs.rows.size());
  d.moment_dim = count_index_sets(cs.num_vars, t + 1);
  d.row_dim = count_index_sets(cs.num_vars, t);
  d.free_vars = count_index_sets(cs.num_vars, 2 * t + 2);
  d.psd_blocks = 1 + cs.rows.size();
  d.budget = moment_budget();
  d.within_budget = d.moment_dim <= d.budget;
  return d;
}

SdpProblem assemble(const ConstraintSystem& cs, int t) {
  SdpProblem p;
  p.dims = lift_dimensions(cs, t);
  if (!p.dims.within_budget) throw BudgetExceeded(p.dims.moment_dim, p.dims.budget);
  const int n = cs.num_vars;
  p.cs = cs;
  p.t = t;
  p.free_vars = index_sets_up_to(n, std::min(2 * t + 2, n));
  for (int i = 0; i < static_cast<int>(p.free_vars.size()); ++i) p.free_index.emplace(p.free_vars[i], i);
  p.moment_index = index_sets_up_to(n, std::min(t + 1, n));
  p.row_index = index_sets_up_to(n, std::min(t, n));
  p.blocks.push_back({-1, static_cast<int>(p.moment_index.size()), {}, Rational(-1)});
  for (int r = 0; r < static_cast<int>(cs.rows.size()); ++r)
    p.blocks.push_back({r, static_cast<int>(p.row_index.size()), cs.rows[r].terms, cs.rows[r].rhs});
  p.objective.assign(p.free_vars.size(), Rational(0));
  for (int j = 0; j < n; ++j)
    if (cs.objective[j] != 0) p.objective[p.free_index.at(IndexSet{j})] = cs.objective[j];
  return p;
}

std::vector<std::pair<int, Rational>> SdpProblem::slot(int block, int i, int j) const {
  const SdpBlock& b = blocks.at(block);
  const auto& index = b.row < 0 ? moment_index : row_index;
  const IndexSet K = index.at(i) | index.at(j);
  std::map<int, Rational> acc;
  for (auto& [k, a] : b.terms) {
    IndexSet Kk = K;
    Kk.insert(k);
    acc[free_index.at(Kk)] += a;
  }
  acc[free_index.at(K)] -= b.beta;
  std::vector<std::pair<int, Rational>> out;
  for (auto& [v, c] : acc)
    if (c != 0) out.emplace_back(v, c);
  return out;
}

void SolverConfig::validate() const {
  if (!(tol > 0)) throw std::invalid_argument("solver tolerance must be positive");
  if (max_iters < 1) throw std::invalid_argument("max_iters must be at least 1");
  if (!(rho > 0)) throw std::invalid_argument("rho must be positive");
  if (!(alpha > 0 && alpha < 2)) throw std::invalid_argument("alpha must lie in (0, 2)");
  if (anderson < 0) throw std::invalid_argument("anderson memory must be nonnegative");
  if (backend == SolverBackend::external_file && external_path.empty())
    throw std::invalid_argument("external backend needs a moment file");
}

nlohmann::json SolveDiagnostics::to_json() const {
  return {{"method", method},
          {"converged", converged},
          {"infeasible", infeasible},
          {"iterations", iterations},
          {"objective", objective},
          {"dual_objective", dual_objective},
          {"gap", gap},
          {"primal_residual", primal_residual},
          {"dual_residual", dual_residual},
          {"rho", rho},
          {"presolve", {{"eliminated_vars", eliminated_vars}, {"zero_rows", zero_rows}, {"dropped_blocks", dropped_blocks}}},
          {"psd_blocks", psd_blocks},
          {"witness", witness}};
}

Eigen::MatrixXd project_psd(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  const auto& ev = es.eigenvalues();
  const auto& V = es.eigenvectors();
  const int n = static_cast<int>(m.rows());
  int neg = 0;
  while (neg < n && ev(neg) < 0) ++neg;
  if (neg == 0) return m;
  if (neg == n) return Eigen::MatrixXd::Zero(n, n);
  if (n - neg <= neg) {
    auto Vp = V.rightCols(n - neg);
    return Vp * ev.tail(n - neg).asDiagonal() * Vp.transpose();
  }
  auto Vn = V.leftCols(neg);
  Eigen::MatrixXd out = m - Vn * ev.head(neg).asDiagonal() * Vn.transpose();
  return 0.5 * (out + out.transpose());
}

void project_psd_blocks(std::span<Eigen::MatrixXd> blocks, bool parallel) {
  const int nb = static_cast<int>(blocks.size());
  if (parallel) {
#pragma omp parallel for schedule(dynamic)
    for (int b = 0; b < nb; ++b) blocks[b] = project_psd(blocks[b]);
  } else {
    for (int b = 0; b < nb; ++b) blocks[b] = project_psd(blocks[b]);
  }
}

namespace {

constexpr double kSqrt2 = 1.4142135623730951;

/// Sparse affine form over compiled columns.
struct Form {
  std::map<int, double> coef;
  double constant = 0;
  bool zero() const {
    for (auto& [c, v] : coef)
      if (v != 0) return false;
    return true;
  }
};

/// Conic program min c^T x s.t. G x + h ∈ {0}^z × PSD blocks (svec layout).
struct Compiled {
  int n = 0;
  int t = 0;
  IndexSet eliminated;
  std::vector<int> live;
  std::vector<IndexSet> cols;
  std::unordered_map<IndexSet, int, IndexSetHash> col_of;
  std::vector<Form> rows;     // cone rows in order
  int zero_rows = 0;
  std::vector<int> block_dims;
  int dropped_blocks = 0;
  bool infeasible = false;
  std::vector<double> c;      // per column

  // value of y_S as an affine form
  void add_moment(Form& f, const IndexSet& S, double w) const {
    if (w == 0) return;
    if (S.empty()) {
      f.constant += w;
      return;
    }
    if (S.intersects(eliminated)) return;
    f.coef[col_of.at(S)] += w;
  }

  Form shifted(const std::vector<std::pair<int, double>>& a, double beta, const IndexSet& K) const {
    Form f;
    for (auto& [i, ai] : a) {
      IndexSet Ki = K;
      Ki.insert(i);
      add_moment(f, Ki, ai);
    }
    add_moment(f, K, -beta);
    return f;
  }

  void add_block(const std::vector<std::pair<int, double>>& a, double beta, const std::vector<IndexSet>& index) {
    const int d = static_cast<int>(index.size());
    block_dims.push_back(d);
    for (int j = 0; j < d; ++j)
      for (int i = j; i < d; ++i) {
        Form f = shifted(a, beta, index[i] | index[j]);
        if (i != j) {
          for (auto& [k, v] : f.coef) v *= kSqrt2;
          f.constant *= kSqrt2;
        }
        rows.push_back(std::move(f));
      }
  }
};

std::vector<std::pair<int, double>> to_double_terms(const std::vector<std::pair<int, Rational>>& terms,
                                                    const IndexSet& eliminated) {
  std::vector<std::pair<int, double>> out;
  for (auto& [i, a] : terms)
    if (a != 0 && !eliminated.contains(i)) out.emplace_back(i, a.get_d());
  return out;
}

/// Variables with max x_i = 0 over K. Each LP maximizes the sum of the
/// undecided variables; an optimum of 0 settles all of them at once.
IndexSet forced_zero_vars(const ConstraintSystem& cs, bool& infeasible) {
  const int n = cs.num_vars;
  std::vector<bool> has_lower(n, false);
  for (auto& r : cs.rows)
    if (r.terms.size() == 1 && r.terms[0].second > 0 && r.rhs >= 0) has_lower[r.terms[0].first] = true;
  std::vector<bool> undecided(n);
  for (int i = 0; i < n; ++i) undecided[i] = has_lower[i];
  IndexSet zero;
  for (;;) {
    std::vector<Rational> obj(n, Rational(0));
    bool any = false;
    for (int i = 0; i < n; ++i)
      if (undecided[i]) obj[i] = -1, any = true;
    if (!any) break;
    LpSolution s = solve_lp(cs, obj);
    if (s.status == LpStatus::infeasible) {
      infeasible = true;
      return zero;
    }
    if (s.status != LpStatus::optimal) break;
    if (s.objective == 0) {
      for (int i = 0; i < n; ++i)
        if (undecided[i]) zero.insert(i);
      break;
    }
    for (int i = 0; i < n; ++i)
      if (undecided[i] && s.values[i] > 0) undecided[i] = false;
  }
  return zero;
}

bool is_implied_box(const std::vector<std::pair<int, double>>& a, double beta) {
  if (a.empty()) return beta <= 0;
  if (a.size() != 1) return false;
  double ai = a[0].second;
  // a x >= β with a > 0, β <= 0 follows from x >= 0; with a < 0, β <= a from x <= 1
  return (ai > 0 && beta <= 0) || (ai < 0 && beta <= ai);
}

Compiled compile(const SdpProblem& p, bool presolve) {
  Compiled cp;
  const ConstraintSystem& cs = p.cs;
  cp.n = cs.num_vars;
  cp.t = p.t;
  if (presolve) {
    cp.eliminated = forced_zero_vars(cs, cp.infeasible);
    if (cp.infeasible) return cp;
  }
  IndexSet live_set;
  for (int i = 0; i < cp.n; ++i)
    if (!cp.eliminated.contains(i)) {
      cp.live.push_back(i);
      live_set.insert(i);
    }
  const int t = p.t;
  for (const auto& S : subsets_of(live_set, 2 * t + 2)) {
    if (S.empty()) continue;
    cp.col_of.emplace(S, static_cast<int>(cp.cols.size()));
    cp.cols.push_back(S);
  }
  cp.c.assign(cp.cols.size(), 0.0);
  for (int i : cp.live)
    if (cs.objective[i] != 0) cp.c[cp.col_of.at(IndexSet{i})] = cs.objective[i].get_d();

  const auto row_index = subsets_of(live_set, t);
  // zero cone: equality pairs force z_K = 0 for |K| <= 2t
  if (presolve) {
    const auto zero_index = subsets_of(live_set, 2 * t);
    for (int r = 0; r < static_cast<int>(cs.rows.size()); ++r) {
      const LinearRow& row = cs.rows[r];
      if (row.pair < 0 || row.pair < r) continue;
      auto a = to_double_terms(row.terms, cp.eliminated);
      double beta = row.rhs.get_d();
      for (const auto& K : zero_index) {
        Form f = cp.shifted(a, beta, K);
        if (f.zero()) {
          if (f.constant != 0) cp.infeasible = true;
          continue;
        }
        cp.rows.push_back(std::move(f));
      }
    }
    cp.zero_rows = static_cast<int>(cp.rows.size());
  }
  cp.add_block({}, -1.0, subsets_of(live_set, t + 1));
  for (int r = 0; r < static_cast<int>(cs.rows.size()); ++r) {
    const LinearRow& row = cs.rows[r];
    auto a = to_double_terms(row.terms, cp.eliminated);
    double beta = row.rhs.get_d();
    if (presolve) {
      if (row.pair >= 0 || is_implied_box(a, beta)) {
        ++cp.dropped_blocks;
        continue;
      }
      if (a.empty()) {  // 0 >= β with β > 0
        cp.infeasible = true;
        continue;
      }
    }
    cp.add_block(a, beta, row_index);
  }
  return cp;
}

struct Layout {
  int zero_rows = 0;
  std::vector<int> dims;
  std::vector<int> offsets;
};

void project_block(Eigen::VectorXd& w, int off, int d) {
  if (d == 1) {
    w(off) = std::max(0.0, w(off));
    return;
  }
  Eigen::MatrixXd m(d, d);
  int k = off;
  for (int j = 0; j < d; ++j)
    for (int i = j; i < d; ++i) {
      double v = w(k++);
      if (i != j) v /= kSqrt2;
      m(i, j) = v;
      m(j, i) = v;
    }
  Eigen::MatrixXd pm = project_psd(m);
  k = off;
  for (int j = 0; j < d; ++j)
    for (int i = j; i < d; ++i) w(k++) = i == j ? pm(i, j) : pm(i, j) * kSqrt2;
}

void project_cones(Eigen::VectorXd& w, const Layout& lay, bool parallel) {
  for (int i = 0; i < lay.zero_rows; ++i) w(i) = 0;
  const int nb = static_cast<int>(lay.dims.size());
  if (parallel) {
#pragma omp parallel for schedule(dynamic)
    for (int b = 0; b < nb; ++b) project_block(w, lay.offsets[b], lay.dims[b]);
  } else {
    for (int b = 0; b < nb; ++b) project_block(w, lay.offsets[b], lay.dims[b]);
  }
}

FloatMoments expand(const Compiled& cp, const Eigen::VectorXd& x) {
  FloatMoments y(cp.n, cp.t);
  for (const auto& I : index_sets_up_to(cp.n, std::min(2 * cp.t + 2, cp.n))) {
    double v;
    if (I.empty())
      v = 1.0;
    else if (I.intersects(cp.eliminated))
      v = 0.0;
    else
      v = x(cp.col_of.at(I));
    y.set(I, v);
  }
  return y;
}

double objective_of(const ConstraintSystem& cs, const FloatMoments& y) {
  double v = 0;
  for (int j = 0; j < cs.num_vars; ++j)
    if (cs.objective[j] != 0) v += cs.objective[j].get_d() * y.at(IndexSet{j});
  return v;
}

SdpSolution solve_atoms(const SdpProblem& p, const Compiled& cp) {
  const ConstraintSystem& cs = p.cs;
  const int nl = static_cast<int>(cp.live.size());
  SdpSolution sol;
  sol.diag.method = "atom-basis";
  sol.diag.eliminated_vars = cp.eliminated.size();
  std::optional<Rational> best;
  std::uint64_t best_mask = 0;
  std::vector<Rational> x(cs.num_vars, Rational(0));
  for (std::uint64_t m = 0; m < (std::uint64_t{1} << nl); ++m) {
    for (int k = 0; k < nl; ++k) x[cp.live[k]] = (m >> k) & 1 ? 1 : 0;
    if (!check_point(cs, x).empty()) continue;
    Rational cost = 0;
    for (int j = 0; j < cs.num_vars; ++j) cost += cs.objective[j] * x[j];
    if (!best || cost < *best) best = cost, best_mask = m;
  }
  if (!best) {
    sol.diag.infeasible = true;
    sol.objective = std::numeric_limits<double>::infinity();
    sol.y = FloatMoments(cs.num_vars, p.t);
    return sol;
  }
  IndexSet support;
  for (int k = 0; k < nl; ++k)
    if ((best_mask >> k) & 1) support.insert(cp.live[k]);
  std::vector<Atom<double>> atom{{support, 1.0}};
  sol.y = from_atoms<double>(atom, cs.num_vars, p.t);
  sol.objective = best->get_d();
  sol.diag.converged = true;
  sol.diag.objective = sol.objective;
  sol.diag.dual_objective = sol.objective;
  sol.diag.witness = "point mass on the cheapest feasible 0/1 point " + support.to_string();
  return sol;
}

SdpSolution solve_admm(const SdpProblem& p, const Compiled& cp, const SolverConfig& cfg) {
  SdpSolution sol;
  SolveDiagnostics& dg = sol.diag;
  dg.method = "admm";
  dg.eliminated_vars = cp.eliminated.size();
  dg.zero_rows = cp.zero_rows;
  dg.dropped_blocks = cp.dropped_blocks;
  dg.psd_blocks = static_cast<int>(cp.block_dims.size());
  dg.witness = "first-order iterate";

  const int m = static_cast<int>(cp.rows.size());
  const int nx = static_cast<int>(cp.cols.size());
  Layout lay;
  lay.zero_rows = cp.zero_rows;
  lay.dims = cp.block_dims;
  int off = cp.zero_rows;
  for (int d : lay.dims) {
    lay.offsets.push_back(off);
    off += d * (d + 1) / 2;
  }

  std::vector<Eigen::Triplet<double>> trip;
  Eigen::VectorXd h(m);
  for (int r = 0; r < m; ++r) {
    h(r) = cp.rows[r].constant;
    for (auto& [c, v] : cp.rows[r].coef)
      if (v != 0) trip.emplace_back(r, c, v);
  }
  Eigen::SparseMatrix<double> G(m, nx);
  G.setFromTriplets(trip.begin(), trip.end());
  Eigen::SparseMatrix<double> Gt = G.transpose();
  Eigen::SparseMatrix<double> N = Gt * G;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(N);
  if (ldlt.info() != Eigen::Success) throw std::runtime_error("normal matrix factorization failed");

  Eigen::VectorXd c(nx);
  double cmax = 1;
  for (int j = 0; j < nx; ++j) c(j) = cp.c[j], cmax = std::max(cmax, std::fabs(cp.c[j]));
  const double cscale = 1.0 / cmax;
  const Eigen::VectorXd cs = c * cscale;

  Eigen::VectorXd x = Eigen::VectorXd::Zero(nx);
  Eigen::VectorXd s = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd u = Eigen::VectorXd::Zero(m);
  if (cfg.seed != 0) {
    boost::random::mt19937_64 gen(cfg.seed);
    boost::random::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int j = 0; j < nx; ++j) x(j) = unif(gen);
    s = G * x + h;
    project_cones(s, lay, !cfg.serial);
  }
  double rho = cfg.rho;
  const double alpha = cfg.alpha;
  const double hnorm = h.norm();
  const double cnorm = cs.norm();
  const double eps = 0.1 * cfg.tol;
  double pres = 0, dres = 0, gap = 0, pobj = 0, dobj = 0;

  // One ADMM pass on the state z = (s, u); also refreshes x and the residuals.
  Eigen::VectorXd Gx(m), v(m), w(m);
  auto step = [&](const Eigen::VectorXd& z, Eigen::VectorXd& fz) {
    auto sz = z.head(m);
    auto uz = z.tail(m);
    Eigen::VectorXd rhs = Gt * (sz - h - uz) - cs / rho;
    x = ldlt.solve(rhs);
    Gx = G * x;
    v = alpha * (Gx + h) + (1 - alpha) * sz;
    w = v + uz;
    project_cones(w, lay, !cfg.serial);
    fz.resize(2 * m);
    fz.tail(m) = uz + v - w;
    fz.head(m) = w;
    auto un = fz.tail(m);
    Eigen::VectorXd GtU = Gt * un;
    pres = (Gx + h - w).norm() / (1 + std::max({Gx.norm(), hnorm, w.norm()}));
    dres = (cs + rho * GtU).norm() / (1 + std::max(cnorm, rho * GtU.norm()));
    pobj = cs.dot(x);
    dobj = rho * un.dot(h);
    gap = std::fabs(pobj - dobj) / (1 + std::fabs(pobj) + std::fabs(dobj));
    return pres <= eps && dres <= eps && gap <= eps;
  };

  // Anderson acceleration (type II) on the fixed-point map, with a residual safeguard.
  const int mem = cfg.anderson;
  std::vector<Eigen::VectorXd> dF, dG;
  Eigen::VectorXd z(2 * m), fz, gz, f_prev, g_prev, cand, fc;
  z << s, u;
  int it = 0;
  bool done = step(z, fz);
  ++it;
  gz = z - fz;
  // penalty updates get sparser so that rho eventually settles
  double next_adapt = 25;
  while (!done && it < cfg.max_iters) {
    if (mem > 0 && f_prev.size() != 0) {
      dF.push_back(fz - f_prev);
      dG.push_back(gz - g_prev);
      if (static_cast<int>(dF.size()) > mem) {
        dF.erase(dF.begin());
        dG.erase(dG.begin());
      }
    }
    f_prev = fz;
    g_prev = gz;
    bool accepted = false;
    if (!dG.empty()) {
      const int k = static_cast<int>(dG.size());
      Eigen::MatrixXd A(k, k);
      Eigen::VectorXd b(k);
      for (int i = 0; i < k; ++i) {
        b(i) = dG[i].dot(gz);
        for (int j = 0; j <= i; ++j) A(i, j) = A(j, i) = dG[i].dot(dG[j]);
      }
      A.diagonal().array() += 1e-10 * (1 + A.diagonal().maxCoeff());
      Eigen::VectorXd gamma = A.ldlt().solve(b);
      if (gamma.allFinite()) {
        cand = fz;
        for (int i = 0; i < k; ++i) cand -= gamma(i) * dF[i];
        done = step(cand, fc);
        ++it;
        Eigen::VectorXd gc = cand - fc;
        if (done || gc.norm() <= gz.norm()) {
          z = std::move(cand);
          fz = fc;
          gz = std::move(gc);
          accepted = true;
        }
      }
      if (!accepted) {
        dF.clear();
        dG.clear();
      }
    }
    if (!accepted && !done) {
      z = fz;
      done = step(z, fz);
      ++it;
      gz = z - fz;
    }
    if (done) break;
    if (cfg.adaptive_rho && it >= next_adapt) {
      next_adapt = it + std::ceil(0.1 * it) + 24;
      double scale = 0;
      if (pres > 5 * dres && rho < 1e6)
        scale = 2;
      else if (dres > 5 * pres && rho > 1e-6)
        scale = 0.5;
      if (scale != 0) {
        rho *= scale;
        z.tail(m) /= scale;
        done = step(z, fz);
        ++it;
        gz = z - fz;
        dF.clear();
        dG.clear();
        f_prev.resize(0);
      }
    }
  }
  dg.converged = done;
  dg.iterations = it;
  dg.primal_residual = pres;
  dg.dual_residual = dres;
  dg.gap = gap;
  dg.rho = rho;
  sol.y = expand(cp, x);
  sol.objective = objective_of(p.cs, sol.y);
  dg.objective = sol.objective;
  dg.dual_objective = dobj / cscale;
  return sol;
}

}  // namespace

SdpSolution solve(const SdpProblem& p, const SolverConfig& cfg) {
  cfg.validate();
  if (cfg.backend == SolverBackend::external_file) {
    std::FILE* f = std::fopen(cfg.external_path.c_str(), "rb");
    if (!f) throw std::runtime_error("cannot open moment file " + cfg.external_path);
    std::string text;
    char buf[4096];
    for (std::size_t k; (k = std::fread(buf, 1, sizeof buf, f)) > 0;) text.append(buf, k);
    std::fclose(f);
    SdpSolution sol;
    sol.y = import_moments_float(text);
    if (sol.y.num_vars() != p.cs.num_vars)
      throw MomentError("moment file has " + std::to_string(sol.y.num_vars()) + " variables, problem has " +
                        std::to_string(p.cs.num_vars));
    sol.objective = objective_of(p.cs, sol.y);
    auto rep = certify(sol.y, p.cs, p.t, cfg.tol);
    sol.diag.method = "external";
    sol.diag.converged = rep.ok;
    sol.diag.objective = sol.objective;
    sol.diag.dual_objective = sol.objective;
    sol.diag.witness = "imported from " + cfg.external_path;
    return sol;
  }
  Compiled cp = compile(p, cfg.presolve);
  if (cp.infeasible) {
    SdpSolution sol;
    sol.diag.method = "presolve";
    sol.diag.infeasible = true;
    sol.objective = std::numeric_limits<double>::infinity();
    sol.y = FloatMoments(p.cs.num_vars, p.t);
    return sol;
  }
  if (cfg.full_level_reduction && static_cast<int>(cp.live.size()) <= p.t &&
      static_cast<int>(cp.live.size()) <= kMaxAtomVars)
    return solve_atoms(p, cp);
  return solve_admm(p, cp, cfg);
}

// ---------------------------------------------------------------------------
// Moment files

namespace {

template <class T>
std::string export_impl(const MomentVector<T>& y) {
  std::string out = "moments " + std::to_string(y.num_vars()) + " " + std::to_string(y.level()) + "\n";
  for (const auto& I : y.sorted_keys()) {
    std::string line;
    I.for_each([&](int i) {
      line += std::to_string(i);
      line += ' ';
    });
    line += ": ";
    if constexpr (std::is_same_v<T, Rational>) {
      line += to_string(y.at(I));
    } else {
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", y.at(I));
      line += buf;
    }
    out += line + "\n";
  }
  return out;
}

template <class T, class ParseValue>
MomentVector<T> import_impl(std::string_view text, ParseValue parse_value) {
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  std::optional<MomentVector<T>> y;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (!y) {
      std::istringstream ls(line);
      std::string kw, extra;
      int n, t;
      if (!(ls >> kw >> n >> t) || kw != "moments" || (ls >> extra) || n < 0 || t < 0)
        throw ParseError(line_no, "expected header 'moments <n_vars> <t>'");
      if (n > IndexSet::kMaxVars) throw ParseError(line_no, "too many variables");
      y.emplace(n, t);
      continue;
    }
    auto colon = line.find(':');
    if (colon == std::string::npos) throw ParseError(line_no, "expected '<ordinals> : <value>'");
    std::istringstream ls(line.substr(0, colon));
    IndexSet I;
    int prev = -1;
    std::string tok;
    while (ls >> tok) {
      int i;
      try {
        std::size_t pos;
        i = std::stoi(tok, &pos);
        if (pos != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        throw ParseError(line_no, "bad ordinal '" + tok + "'");
      }
      if (i <= prev) throw ParseError(line_no, "ordinals must be strictly increasing");
      if (i >= y->num_vars()) throw ParseError(line_no, "ordinal " + tok + " out of range");
      I.insert(i);
      prev = i;
    }
    std::istringstream vs(line.substr(colon + 1));
    std::string value, extra;
    if (!(vs >> value) || (vs >> extra)) throw ParseError(line_no, "expected exactly one value");
    if (y->has(I)) throw ParseError(line_no, "duplicate entry " + I.to_string());
    try {
      y->set(I, parse_value(value));
    } catch (const std::invalid_argument& ex) {
      throw ParseError(line_no, ex.what());
    }
  }
  if (!y) throw ParseError(line_no, "missing header");
  if (!y->complete()) {
    for (const auto& I : index_sets_up_to(y->num_vars(), std::min(2 * y->level() + 2, y->num_vars())))
      if (!y->has(I)) throw MomentError("incomplete moment domain: missing " + I.to_string());
  }
  return std::move(*y);
}

}  // namespace

std::string export_moments(const RationalMoments& y) { return export_impl(y); }
std::string export_moments(const FloatMoments& y) { return export_impl(y); }

RationalMoments import_moments(std::string_view text) {
  return import_impl<Rational>(text, [](const std::string& v) -> Rational {
    if (v.find_first_of("eE") == std::string::npos) return parse_rational(v);
    // exponent notation comes from float exports; take the double exactly
    char* end = nullptr;
    double d = std::strtod(v.c_str(), &end);
    if (end != v.c_str() + v.size() || !std::isfinite(d)) throw std::invalid_argument("bad value '" + v + "'");
    return Rational(d);
  });
}

FloatMoments import_moments_float(std::string_view text) {
  return import_impl<double>(text, [](const std::string& v) -> double {
    if (v.find('/') != std::string::npos) return parse_rational(v).get_d();
    char* end = nullptr;
    double d = std::strtod(v.c_str(), &end);
    if (end != v.c_str() + v.size() || v.empty()) throw std::invalid_argument("bad value '" + v + "'");
    return d;
  });
}

}  // namespace dstlift
