#include "dstlift/rounding.hpp"

#include "dstlift/exact_oracle.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <exception>
#include <map>
#include <random>
#include <stdexcept>
#include <tuple>

namespace dstlift {

Rational MomentOracle::exact_value(const IndexSet&) const {
  throw std::logic_error("exact value requested from a floating-point oracle");
}

template <class T>
double VectorOracle<T>::value(const IndexSet& P) const {
  if constexpr (std::is_same_v<T, Rational>)
    return to_double(y_->at(P));
  else
    return y_->at(P);
}

template <class T>
Rational VectorOracle<T>::exact_value(const IndexSet& P) const {
  if constexpr (std::is_same_v<T, Rational>)
    return y_->at(P);
  else
    return MomentOracle::exact_value(P);
}

template class VectorOracle<Rational>;
template class VectorOracle<double>;

DistributionOracle::DistributionOracle(std::vector<Atom<Rational>> atoms) : atoms_(std::move(atoms)) {
  Rational total = 0;
  for (const auto& a : atoms_) {
    if (a.mass < 0) throw MomentError("negative atom mass at " + a.support.to_string());
    total += a.mass;
  }
  if (total != 1) throw MomentError("atom masses sum to " + to_string(total) + ", not 1");
}

Rational DistributionOracle::exact_value(const IndexSet& P) const {
  Rational v = 0;
  for (const auto& a : atoms_)
    if (P.subset_of(a.support)) v += a.mass;
  return v;
}

std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t index) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return mix(seed ^ mix(index));
}

namespace {

// k / 2^53 < p, exactly.
bool coin_exact(std::uint64_t k, const Rational& p) {
  if (p <= 0) return false;
  if (p >= 1) return true;
  mpz_class lhs = mpz_class(static_cast<unsigned long>(k)) * p.get_den();
  mpz_class rhs;
  mpz_mul_2exp(rhs.get_mpz_t(), p.get_num().get_mpz_t(), 53);
  return lhs < rhs;
}

struct CorePath {
  std::vector<EdgeId> edges;
  IndexSet set;
  NodeId end;
  double y = 1;
  Rational yq = 1;
};

struct CoreRun {
  std::vector<CorePath> paths;
  std::size_t queries = 0;
  std::size_t clamps = 0;
  std::size_t dead = 0;
};

CoreRun sample_core(const MomentOracle& oracle, const DstInstance& g, std::uint64_t seed) {
  const bool exact = oracle.exact();
  std::mt19937_64 gen(seed);
  CoreRun run;
  CorePath root;
  root.end = g.root();

  auto extend = [&](const CorePath& P) {
    if (P.edges.size() > 0) {
      if (exact ? P.yq <= 0 : P.y < kDeadPathThreshold) {
        ++run.dead;
        return;
      }
    }
    for (EdgeId e : g.out_edges(P.end)) {
      CorePath Q;
      Q.set = P.set;
      Q.set.insert(e);
      ++run.queries;
      const std::uint64_t k = gen() >> 11;
      bool take;
      if (exact) {
        Q.yq = oracle.exact_value(Q.set);
        Rational p = Q.yq / P.yq;
        if (p < 0 || p > 1) ++run.clamps;
        take = coin_exact(k, p);
        Q.y = to_double(Q.yq);
      } else {
        Q.y = oracle.value(Q.set);
        double p = Q.y / P.y;
        if (!(p >= 0 && p <= 1)) {
          ++run.clamps;
          p = std::isnan(p) ? 0.0 : std::clamp(p, 0.0, 1.0);
        }
        take = static_cast<double>(k) * 0x1p-53 < p;
      }
      if (!take) continue;
      Q.edges = P.edges;
      Q.edges.push_back(e);
      Q.end = g.edge(e).head;
      run.paths.push_back(std::move(Q));
    }
  };

  extend(root);
  // Paths are appended in nondecreasing length, so one pass handles the levels in order.
  for (std::size_t i = 0; i < run.paths.size(); ++i) {
    const CorePath P = run.paths[i];
    extend(P);
  }
  return run;
}

}  // namespace

std::vector<EdgeId> SampleRun::edges() const {
  std::vector<EdgeId> out;
  for (const auto& p : paths) out.insert(out.end(), p.edges.begin(), p.edges.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<NodeId> SampleRun::nodes(NodeId root) const {
  std::vector<NodeId> out{root};
  for (const auto& p : paths) out.push_back(p.end);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

SampleRun sample_once(const MomentOracle& oracle, const LayeredInstance& li, std::uint64_t seed) {
  const DstInstance& g = li.graph();
  CoreRun core = sample_core(oracle, g, seed);
  SampleRun run;
  run.seed = seed;
  run.queries = core.queries;
  run.clamps = core.clamps;
  run.dead = core.dead;
  run.Z.assign(g.num_terminals(), 0);
  for (auto& p : core.paths) {
    if (g.is_terminal(p.end)) ++run.Z[g.terminal_index(p.end)];
    PathRecord rec = make_path(g, std::move(p.edges));
    run.paths.push_back(std::move(rec));
  }
  return run;
}

int default_reps(int ell, int num_terminals) {
  if (num_terminals <= 1) return 1;
  double r = std::ceil(2.0 * ell * std::log2(static_cast<double>(num_terminals)));
  return std::max(1, static_cast<int>(r));
}

RoundingResult round(const MomentOracle& oracle, const LayeredInstance& li, int reps, std::uint64_t seed) {
  const DstInstance& g = li.graph();
  RoundingResult res;
  res.reps = reps > 0 ? reps : default_reps(li.ell(), g.num_terminals());
  std::vector<EdgeId> H;
  for (int i = 0; i < res.reps; ++i) {
    CoreRun core = sample_core(oracle, g, trial_seed(seed, static_cast<std::uint64_t>(i)));
    res.queries += core.queries;
    res.clamps += core.clamps;
    res.dead += core.dead;
    for (const auto& p : core.paths) H.insert(H.end(), p.edges.begin(), p.edges.end());
  }
  std::sort(H.begin(), H.end());
  H.erase(std::unique(H.begin(), H.end()), H.end());
  const Rational sampled = g.cost_of(H);

  // Every sampled path starts at the root, so a terminal is connected iff it ends some edge of H.
  std::vector<char> reached(g.num_nodes(), 0);
  for (EdgeId e : H) reached[g.edge(e).head] = 1;
  for (NodeId s : g.terminals()) {
    res.connected.push_back(reached[s] != 0);
    if (reached[s]) continue;
    PathRecord p = shortest_path(li, s);
    H.insert(H.end(), p.edges.begin(), p.edges.end());
  }
  std::sort(H.begin(), H.end());
  H.erase(std::unique(H.begin(), H.end()), H.end());
  res.cost = g.cost_of(H);
  res.repair_cost = res.cost - sampled;
  res.edges = std::move(H);
  if (!connects_all_terminals(g, res.edges)) throw std::logic_error("rounding produced an infeasible edge set");
  return res;
}

namespace {

struct PathAcc {
  std::uint64_t hits = 0;
  std::uint64_t sum_z = 0;
  std::uint64_t sum_z2 = 0;
};

struct Accumulator {
  std::vector<std::uint64_t> sum_z, sum_z2, hits, hit_sum_z, hit_sum_z2;
  std::vector<std::uint64_t> edge_hits;
  std::map<std::vector<EdgeId>, PathAcc> paths;  // full paths only
  std::uint64_t queries = 0, queries2 = 0, clamps = 0, dead = 0;

  Accumulator(int k, int m)
      : sum_z(k), sum_z2(k), hits(k), hit_sum_z(k), hit_sum_z2(k), edge_hits(m) {}

  void merge(const Accumulator& o) {
    for (std::size_t s = 0; s < sum_z.size(); ++s) {
      sum_z[s] += o.sum_z[s];
      sum_z2[s] += o.sum_z2[s];
      hits[s] += o.hits[s];
      hit_sum_z[s] += o.hit_sum_z[s];
      hit_sum_z2[s] += o.hit_sum_z2[s];
    }
    for (std::size_t e = 0; e < edge_hits.size(); ++e) edge_hits[e] += o.edge_hits[e];
    for (const auto& [p, a] : o.paths) {
      PathAcc& t = paths[p];
      t.hits += a.hits;
      t.sum_z += a.sum_z;
      t.sum_z2 += a.sum_z2;
    }
    queries += o.queries;
    queries2 += o.queries2;
    clamps += o.clamps;
    dead += o.dead;
  }
};

// Records one trial; returns c(E(T)).
double record(const CoreRun& run, const DstInstance& g, Accumulator& acc, std::vector<char>& seen) {
  const int k = g.num_terminals();
  std::vector<std::uint64_t> Z(k, 0);
  for (const auto& p : run.paths)
    if (g.is_terminal(p.end)) ++Z[g.terminal_index(p.end)];
  for (int s = 0; s < k; ++s) {
    acc.sum_z[s] += Z[s];
    acc.sum_z2[s] += Z[s] * Z[s];
    if (Z[s] > 0) {
      ++acc.hits[s];
      acc.hit_sum_z[s] += Z[s];
      acc.hit_sum_z2[s] += Z[s] * Z[s];
    }
  }
  double cost = 0;
  std::fill(seen.begin(), seen.end(), 0);
  for (const auto& p : run.paths) {
    EdgeId e = p.edges.back();
    if (!seen[e]) {
      seen[e] = 1;
      ++acc.edge_hits[e];
      cost += to_double(g.edge(e).cost);
    }
  }
  for (const auto& p : run.paths) {
    if (!g.is_terminal(p.end)) continue;
    std::uint64_t z = Z[g.terminal_index(p.end)];
    PathAcc& a = acc.paths[p.edges];
    ++a.hits;
    a.sum_z += z;
    a.sum_z2 += z * z;
  }
  acc.queries += run.queries;
  acc.queries2 += static_cast<std::uint64_t>(run.queries) * run.queries;
  acc.clamps += run.clamps;
  acc.dead += run.dead;
  return cost;
}

// Mean and standard error of the mean from integer sums.
std::pair<double, double> mean_se(double sum, double sum2, double n) {
  if (n <= 0) return {0, 0};
  double mean = sum / n;
  if (n < 2) return {mean, 0};
  double var = std::max(0.0, (sum2 - n * mean * mean) / (n - 1));
  return {mean, std::sqrt(var / n)};
}

StatsReport finish(const MomentOracle& oracle, const LayeredInstance& li, std::uint64_t trials, std::uint64_t seed,
                   const Accumulator& acc, const std::vector<double>& costs) {
  const DstInstance& g = li.graph();
  const double N = static_cast<double>(trials);
  StatsReport rep;
  rep.trials = trials;
  rep.seed = seed;
  rep.edge_hits = acc.edge_hits;
  rep.clamps = acc.clamps;
  rep.dead = acc.dead;

  double cs = 0, cs2 = 0;
  for (double c : costs) cs += c, cs2 += c * c;
  std::tie(rep.mean_cost, rep.se_cost) = mean_se(cs, cs2, N);
  std::tie(rep.mean_queries, rep.se_queries) =
      mean_se(static_cast<double>(acc.queries), static_cast<double>(acc.queries2), N);

  for (int s = 0; s < g.num_terminals(); ++s) {
    TerminalStats ts;
    ts.terminal = g.terminals()[s];
    std::tie(ts.mean_z, ts.se_mean_z) =
        mean_se(static_cast<double>(acc.sum_z[s]), static_cast<double>(acc.sum_z2[s]), N);
    ts.hits = acc.hits[s];
    ts.pr_hit = static_cast<double>(ts.hits) / N;
    ts.se_pr_hit = std::sqrt(ts.pr_hit * (1 - ts.pr_hit) / N);
    std::tie(ts.cond_mean_z, ts.se_cond_mean_z) = mean_se(
        static_cast<double>(acc.hit_sum_z[s]), static_cast<double>(acc.hit_sum_z2[s]), static_cast<double>(ts.hits));

    std::map<std::vector<EdgeId>, PathFrequency> rows;
    std::vector<PathRecord> q;
    try {
      q = enumerate_paths(li, PathTarget::node(ts.terminal), kStatsPathCap);
    } catch (const CapExceeded&) {
      q.clear();
    }
    for (auto& p : q) rows[p.edges].edges = p.edges;
    for (const auto& [edges, a] : acc.paths)
      if (g.edge(edges.back()).head == ts.terminal) rows[edges].edges = edges;
    for (auto& [edges, row] : rows) {
      IndexSet P;
      for (EdgeId e : edges) P.insert(e);
      row.y = oracle.value(P);
      auto it = acc.paths.find(edges);
      if (it != acc.paths.end()) {
        row.hits = it->second.hits;
        std::tie(row.cond_mean_z, row.cond_se) =
            mean_se(static_cast<double>(it->second.sum_z), static_cast<double>(it->second.sum_z2),
                    static_cast<double>(row.hits));
        if (row.cond_mean_z > ts.max_path_cond_mean_z) {
          ts.max_path_cond_mean_z = row.cond_mean_z;
          ts.se_max_path_cond_mean_z = row.cond_se;
        }
      }
      row.freq = static_cast<double>(row.hits) / N;
      double yc = std::clamp(row.y, 0.0, 1.0);
      row.se = std::sqrt(yc * (1 - yc) / N);
      ts.paths.push_back(std::move(row));
    }
    rep.terminals.push_back(std::move(ts));
  }
  return rep;
}

StatsReport run_stats(const MomentOracle& oracle, const LayeredInstance& li, std::uint64_t trials, std::uint64_t seed,
                      bool parallel) {
  if (trials < 1) throw std::invalid_argument("stats needs at least one trial");
  const DstInstance& g = li.graph();
  const int k = g.num_terminals(), m = g.num_edges();
  std::vector<double> costs(trials);
  Accumulator total(k, m);
  const long long n = static_cast<long long>(trials);
  if (parallel) {
    const int threads = omp_get_max_threads();
    std::vector<Accumulator> parts(threads, Accumulator(k, m));
    std::exception_ptr error;
#pragma omp parallel num_threads(threads)
    {
      Accumulator& acc = parts[omp_get_thread_num()];
      std::vector<char> seen(m);
#pragma omp for schedule(static)
      for (long long i = 0; i < n; ++i) {
        try {
          CoreRun run = sample_core(oracle, g, trial_seed(seed, static_cast<std::uint64_t>(i)));
          costs[i] = record(run, g, acc, seen);
        } catch (...) {
#pragma omp critical
          if (!error) error = std::current_exception();
        }
      }
    }
    if (error) std::rethrow_exception(error);
    for (const auto& p : parts) total.merge(p);
  } else {
    std::vector<char> seen(m);
    for (long long i = 0; i < n; ++i) {
      CoreRun run = sample_core(oracle, g, trial_seed(seed, static_cast<std::uint64_t>(i)));
      costs[i] = record(run, g, total, seen);
    }
  }
  return finish(oracle, li, trials, seed, total, costs);
}

}  // namespace

StatsReport stats(const MomentOracle& oracle, const LayeredInstance& li, std::uint64_t trials, std::uint64_t seed) {
  return run_stats(oracle, li, trials, seed, true);
}

StatsReport stats_serial(const MomentOracle& oracle, const LayeredInstance& li, std::uint64_t trials,
                         std::uint64_t seed) {
  return run_stats(oracle, li, trials, seed, false);
}

EdgeMarginalReport edge_marginal_check(const MomentOracle& oracle, const LayeredInstance& li, std::uint64_t trials,
                                       std::uint64_t seed, double tol) {
  const DstInstance& g = li.graph();
  EdgeMarginalReport rep;
  rep.exact = oracle.exact();
  StatsReport st = stats(oracle, li, trials, seed);
  const double N = static_cast<double>(trials);
  rep.mean_cost = st.mean_cost;
  rep.se_cost = st.se_cost;
  for (EdgeId e = 0; e < g.num_edges(); ++e) {
    EdgeMarginal em;
    em.edge = e;
    IndexSet E1;
    E1.insert(e);
    std::vector<PathRecord> q = enumerate_paths(li, PathTarget::edge(e));
    if (rep.exact) {
      Rational ye = oracle.exact_value(E1), sum = 0;
      for (const auto& p : q) sum += oracle.exact_value(IndexSet::from_elements(p.edges));
      em.y_e = to_double(ye);
      em.path_sum = to_double(sum);
      em.exact_ok = sum <= ye;
    } else {
      em.y_e = oracle.value(E1);
      double sum = 0;
      for (const auto& p : q) sum += oracle.value(IndexSet::from_elements(p.edges));
      em.path_sum = sum;
      em.exact_ok = sum <= em.y_e + tol;
    }
    em.freq = static_cast<double>(st.edge_hits[e]) / N;
    double yc = std::clamp(em.y_e, 0.0, 1.0);
    em.se = std::sqrt(yc * (1 - yc) / N);
    em.empirical_ok = em.freq <= em.y_e + 3 * em.se;
    rep.lp_cost += to_double(g.edge(e).cost) * em.y_e;
    rep.ok = rep.ok && em.exact_ok && em.empirical_ok;
    rep.edges.push_back(em);
  }
  rep.cost_ok = rep.mean_cost <= rep.lp_cost + 3 * rep.se_cost;
  rep.ok = rep.ok && rep.cost_ok;
  return rep;
}

PathSumReport path_sum_check(const MomentOracle& oracle, const LayeredInstance& li, double tol) {
  const DstInstance& g = li.graph();
  PathSumReport rep;
  rep.exact = oracle.exact();
  auto fail = [&](const std::string& what) {
    if (rep.ok) rep.detail = what;
    rep.ok = false;
  };
  for (NodeId s : g.terminals()) {
    std::vector<PathRecord> q = enumerate_paths(li, PathTarget::node(s));
    // prefix (as edge list) -> Σ y_P over full paths extending it
    std::map<std::vector<EdgeId>, Rational> exact_sums;
    std::map<std::vector<EdgeId>, double> float_sums;
    Rational total_q = 0;
    double total_f = 0;
    for (const auto& p : q) {
      IndexSet P = IndexSet::from_elements(p.edges);
      Rational vq;
      double vf = 0;
      if (rep.exact) {
        vq = oracle.exact_value(P);
        total_q += vq;
      } else {
        vf = oracle.value(P);
        total_f += vf;
      }
      for (std::size_t len = 1; len < p.edges.size(); ++len) {
        std::vector<EdgeId> pre(p.edges.begin(), p.edges.begin() + static_cast<long>(len));
        if (rep.exact)
          exact_sums[pre] += vq;
        else
          float_sums[pre] += vf;
      }
    }
    double dev;
    if (rep.exact) {
      rep.terminal_sums.push_back(to_double(total_q));
      dev = std::fabs(to_double(total_q - 1));
      if (total_q != 1) fail("paths into '" + g.name(s) + "' sum to " + to_string(total_q));
      for (const auto& [pre, sum] : exact_sums) {
        ++rep.prefixes_checked;
        Rational excess = sum - oracle.exact_value(IndexSet::from_elements(pre));
        rep.max_prefix_excess = std::max(rep.max_prefix_excess, to_double(excess));
        if (excess > 0) fail("extensions into '" + g.name(s) + "' exceed their prefix mass");
      }
    } else {
      rep.terminal_sums.push_back(total_f);
      dev = std::fabs(total_f - 1);
      if (dev > tol) fail("paths into '" + g.name(s) + "' sum to " + std::to_string(total_f));
      for (const auto& [pre, sum] : float_sums) {
        ++rep.prefixes_checked;
        double excess = sum - oracle.value(IndexSet::from_elements(pre));
        rep.max_prefix_excess = std::max(rep.max_prefix_excess, excess);
        if (excess > tol) fail("extensions into '" + g.name(s) + "' exceed their prefix mass");
      }
    }
    rep.max_deviation = std::max(rep.max_deviation, dev);
  }
  return rep;
}

}  // namespace dstlift
