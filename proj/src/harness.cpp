#include "dstlift/harness.hpp"

#include "dstlift/exact_oracle.hpp"
#include "dstlift/flow_lp.hpp"
#include "dstlift/rounding.hpp"

#include <boost/random/bernoulli_distribution.hpp>
#include <boost/random/mersenne_twister.hpp>
#include <boost/random/uniform_int_distribution.hpp>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace dstlift {

DstInstance gen_set_cover(const std::vector<std::vector<int>>& sets, std::span<const Rational> costs, int k) {
  if (costs.size() != sets.size()) throw InstanceError("one cost per set required");
  std::vector<std::string> names{"r"};
  for (std::size_t i = 0; i < sets.size(); ++i) names.push_back("S" + std::to_string(i));
  for (int j = 0; j < k; ++j) names.push_back("e" + std::to_string(j));
  const int m = static_cast<int>(sets.size());
  std::vector<Edge> edges;
  std::vector<char> covered(k, 0);
  for (int i = 0; i < m; ++i) edges.push_back({0, 1 + i, costs[i]});
  for (int i = 0; i < m; ++i) {
    for (int j : sets[i]) {
      if (j < 0 || j >= k) throw InstanceError("set element " + std::to_string(j) + " outside [0, k)");
      edges.push_back({1 + i, 1 + m + j, Rational(0)});
      covered[j] = 1;
    }
  }
  std::vector<NodeId> terminals;
  for (int j = 0; j < k; ++j) {
    if (!covered[j]) throw InstanceError("element " + std::to_string(j) + " is in no set");
    terminals.push_back(1 + m + j);
  }
  return DstInstance(std::move(names), std::move(edges), 0, std::move(terminals));
}

DstInstance gen_set_cover(int m, int k, std::uint64_t seed) {
  if (m < 1 || k < 1) throw InstanceError("set cover needs at least one set and one element");
  boost::random::mt19937_64 gen(seed);
  boost::random::bernoulli_distribution<> coin(0.5);
  boost::random::uniform_int_distribution<int> pick(0, m - 1), cost(1, 5);
  std::vector<std::vector<int>> sets(m);
  for (int j = 0; j < k; ++j) {
    bool any = false;
    for (int i = 0; i < m; ++i)
      if (coin(gen)) sets[i].push_back(j), any = true;
    if (!any) sets[pick(gen)].push_back(j);
  }
  for (auto& s : sets) std::sort(s.begin(), s.end());
  std::vector<Rational> costs;
  for (int i = 0; i < m; ++i) costs.emplace_back(cost(gen));
  return gen_set_cover(sets, costs, k);
}

DstInstance gen_set_cover_gap(int k) {
  if (k < 2) throw InstanceError("gap instance needs k >= 2");
  std::vector<std::vector<int>> sets;
  for (int skip = 0; skip < k; ++skip) {
    std::vector<int> s;
    for (int j = 0; j < k; ++j)
      if (j != skip) s.push_back(j);
    sets.push_back(s);
  }
  std::vector<Rational> costs(sets.size(), Rational(1));
  return gen_set_cover(sets, costs, k);
}

DstInstance gen_random_layered(const LayeredSpec& spec) {
  if (spec.ell < 1 || static_cast<int>(spec.widths.size()) != spec.ell)
    throw InstanceError("widths must list one positive width per level");
  for (int w : spec.widths)
    if (w < 1) throw InstanceError("widths must be positive");
  if (!(spec.density > 0 && spec.density <= 1)) throw InstanceError("density must lie in (0, 1]");
  if (spec.cost_lo < 0 || spec.cost_hi < spec.cost_lo) throw InstanceError("bad cost range");

  std::vector<std::string> names{"r"};
  std::vector<std::vector<NodeId>> level{{0}};
  for (int j = 1; j <= spec.ell; ++j) {
    level.emplace_back();
    for (int i = 0; i < spec.widths[j - 1]; ++i) {
      level.back().push_back(static_cast<NodeId>(names.size()));
      names.push_back(j == spec.ell ? "s" + std::to_string(i) : "v" + std::to_string(j) + "_" + std::to_string(i));
    }
  }
  boost::random::mt19937_64 gen(spec.seed);
  boost::random::bernoulli_distribution<> coin(spec.density);
  boost::random::uniform_int_distribution<int> cost(spec.cost_lo, spec.cost_hi);
  for (int attempt = 0; attempt <= spec.retries; ++attempt) {
    std::vector<Edge> edges;
    std::vector<char> reached(names.size(), 0);
    reached[0] = 1;
    for (int j = 1; j <= spec.ell; ++j)
      for (NodeId u : level[j - 1])
        for (NodeId v : level[j]) {
          bool take = coin(gen);
          int c = cost(gen);
          if (!take) continue;
          edges.push_back({u, v, Rational(c)});
          if (reached[u]) reached[v] = 1;
        }
    if (std::find(reached.begin(), reached.end(), 0) != reached.end()) continue;
    return DstInstance(names, std::move(edges), 0, level[spec.ell]);
  }
  throw InstanceError("no instance with every node reachable after " + std::to_string(spec.retries + 1) +
                      " attempts");
}

std::uint64_t instance_hash(const DstInstance& inst) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : write_instance(inst)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

LayeredInstance layered_view(const DstInstance& inst, int ell, bool* as_is) {
  try {
    LayeredInstance wrapped = LayeredInstance::from_layered(inst);
    if (wrapped.ell() == ell) {
      if (as_is) *as_is = true;
      return wrapped;
    }
  } catch (const InstanceError&) {
  }
  if (as_is) *as_is = false;
  return levelize(inst, ell, LevelizeOptions{.prune = true});
}

nlohmann::json PipelineConfig::to_json() const {
  nlohmann::json j;
  j["solver"] = {{"max_iters", solver.max_iters}, {"tol", solver.tol},         {"rho", solver.rho},
                 {"alpha", solver.alpha},         {"seed", solver.seed},       {"presolve", solver.presolve},
                 {"adaptive_rho", solver.adaptive_rho},
                 {"full_level_reduction", solver.full_level_reduction}};
  j["solve_sdp"] = solve_sdp;
  j["moments_path"] = moments_path;
  j["round"] = round;
  j["reps"] = reps;
  j["seeds"] = seeds;
  j["certify_tol"] = certify_tol;
  j["sandwich_tol"] = sandwich_tol;
  return j;
}

namespace {

nlohmann::json opt_or_null(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(); }

std::optional<double> ratio(std::optional<double> a, std::optional<double> b) {
  if (!a || !b || *b == 0) return std::nullopt;
  return *a / *b;
}

template <class F>
auto stage(const std::string& name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const PipelineError&) {
    throw;
  } catch (const std::exception& e) {
    throw PipelineError(name, e.what());
  }
}

bool leq_rel(double a, double b, double tol) { return a <= b + tol * std::max(1.0, std::fabs(b)); }

}  // namespace

nlohmann::json ExperimentRow::to_json() const {
  nlohmann::json j;
  std::ostringstream hs;
  hs << std::hex << std::setw(16) << std::setfill('0') << hash;
  j["id"] = id;
  j["hash"] = hs.str();
  j["n"] = n;
  j["terminals"] = terminals;
  j["ell"] = ell;
  j["t"] = t;
  j["layering"] = layering;
  j["layered_nodes"] = layered_nodes;
  j["layered_edges"] = layered_edges;
  j["num_vars"] = num_vars;
  j["lp"] = lp;
  j["lp_exact"] = lp_exact;
  j["sdp"] = opt_or_null(sdp);
  j["sdp_method"] = sdp_method;
  j["sdp_certified"] = sdp_certified;
  j["sdp_iterations"] = sdp_iterations;
  j["reps"] = reps;
  j["rounded"] = rounded;
  j["repaired"] = repaired;
  j["rounded_mean"] = opt_or_null(rounded_mean);
  j["rounded_std"] = opt_or_null(rounded_std);
  j["opt"] = opt;
  j["opt_exact"] = opt_exact;
  j["opt_layered"] = opt_layered;
  j["sandwich_ok"] = sandwich_ok;
  j["ratios"] = {{"sdp_over_lp", opt_or_null(ratio(sdp, lp))},
                 {"opt_over_lp", opt_or_null(ratio(opt, lp))},
                 {"opt_over_sdp", opt_or_null(ratio(opt, sdp))},
                 {"rounded_over_sdp", opt_or_null(ratio(rounded_mean, sdp))},
                 {"rounded_over_opt", opt_or_null(ratio(rounded_mean, opt))}};
  return j;
}

ExperimentRow run_pipeline(const DstInstance& inst, const std::string& id, int ell, int t,
                           const PipelineConfig& cfg) {
  if (t < 0) throw PipelineError("lift", "level t must be nonnegative");
  if (cfg.round && t < ell)
    throw PipelineError("round", "rounding needs t >= ell so that every path entry exists (t=" + std::to_string(t) +
                                     ", ell=" + std::to_string(ell) + ")");
  ExperimentRow row;
  row.id = id;
  row.hash = instance_hash(inst);
  row.n = inst.num_nodes();
  row.terminals = inst.num_terminals();
  row.ell = ell;
  row.t = t;

  LayeredInstance li = stage("levelize", [&] {
    bool as_is = false;
    LayeredInstance v = layered_view(inst, ell, &as_is);
    row.layering = as_is ? "as-is" : "levelized";
    return v;
  });
  const DstInstance& g = li.graph();
  row.layered_nodes = g.num_nodes();
  row.layered_edges = g.num_edges();

  ConstraintSystem cs = build_flow_lp(li);
  row.num_vars = cs.num_vars;
  LpSolution lp = stage("lp", [&] { return solve_lp(cs); });
  if (lp.status != LpStatus::optimal) throw PipelineError("lp", std::string("status ") + lp_status_name(lp.status));
  row.lp = to_double(lp.objective);
  row.lp_exact = to_string(lp.objective);

  std::optional<FloatMoments> y;
  if (!cfg.moments_path.empty()) {
    y = stage("import", [&] {
      std::ifstream in(cfg.moments_path);
      if (!in) throw std::runtime_error("cannot open " + cfg.moments_path);
      std::stringstream ss;
      ss << in.rdbuf();
      return import_moments_float(ss.str());
    });
    if (y->num_vars() != cs.num_vars) throw PipelineError("import", "moment file has the wrong variable count");
    double obj = 0;
    for (int e = 0; e < g.num_edges(); ++e) obj += to_double(g.edge(e).cost) * y->at(IndexSet::from_elements(std::vector<int>{e}));
    row.sdp = obj;
    row.sdp_method = "import";
  } else if (cfg.solve_sdp) {
    SdpSolution sol = stage("sdp", [&] { return solve(assemble(cs, t), cfg.solver); });
    if (sol.diag.infeasible) throw PipelineError("sdp", "relaxation is infeasible");
    row.sdp = sol.objective;
    row.sdp_method = sol.diag.method;
    row.sdp_iterations = sol.diag.iterations;
    y = std::move(sol.y);
  }
  if (y) {
    int level = std::min(t, y->level());
    row.sdp_certified = stage("certify", [&] { return certify(*y, cs, level, cfg.certify_tol).ok; });
  }

  if (cfg.round && y) {
    VectorOracle<double> oracle(*y);
    row.reps = cfg.reps > 0 ? cfg.reps : default_reps(li.ell(), g.num_terminals());
    double sum = 0, sum2 = 0;
    for (std::uint64_t seed : cfg.seeds) {
      RoundingResult r = stage("round", [&] { return round(oracle, li, row.reps, seed); });
      double c = to_double(map_back(r.edges, li).cost);
      row.rounded.push_back(c);
      row.repaired.push_back(std::find(r.connected.begin(), r.connected.end(), false) != r.connected.end());
      sum += c;
      sum2 += c * c;
    }
    if (!cfg.seeds.empty()) {
      double k = static_cast<double>(cfg.seeds.size());
      row.rounded_mean = sum / k;
      row.rounded_std = k > 1 ? std::sqrt(std::max(0.0, (sum2 - k * (sum / k) * (sum / k)) / (k - 1))) : 0.0;
    }
  }

  ExactResult opt = stage("exact", [&] { return exact_opt(inst); });
  row.opt = to_double(opt.opt_cost);
  row.opt_exact = to_string(opt.opt_cost);
  row.opt_layered = row.layering == "as-is" ? row.opt : to_double(stage("exact", [&] { return exact_opt(g); }).opt_cost);

  const double tol = cfg.sandwich_tol;
  row.sandwich_ok = leq_rel(row.lp, row.opt_layered, tol);
  if (row.sdp) row.sandwich_ok = row.sandwich_ok && leq_rel(row.lp, *row.sdp, tol) && leq_rel(*row.sdp, row.opt_layered, tol);
  return row;
}

nlohmann::json ExperimentReport::to_json() const {
  nlohmann::json j;
  j["suite"] = suite;
  j["config"] = config.to_json();
  j["rows"] = nlohmann::json::array();
  for (const auto& r : rows) j["rows"].push_back(r.to_json());
  return j;
}

std::string ExperimentReport::to_tsv() const {
  std::ostringstream out;
  out << std::setprecision(10);
  out << "# id\tn\tX\tell\tt\tlp\tsdp\trounded_mean\trounded_std\topt\tsdp_over_lp\topt_over_sdp\trounded_over_sdp\t"
         "rounded_over_opt\n";
  auto cell = [&](const std::optional<double>& v) {
    if (v)
      out << *v;
    else
      out << "NaN";
  };
  for (const auto& r : rows) {
    out << r.id << '\t' << r.n << '\t' << r.terminals << '\t' << r.ell << '\t' << r.t << '\t' << r.lp << '\t';
    cell(r.sdp);
    out << '\t';
    cell(r.rounded_mean);
    out << '\t';
    cell(r.rounded_std);
    out << '\t' << r.opt << '\t';
    cell(ratio(r.sdp, r.lp));
    out << '\t';
    cell(ratio(r.opt, r.sdp));
    out << '\t';
    cell(ratio(r.rounded_mean, r.sdp));
    out << '\t';
    cell(ratio(r.rounded_mean, r.opt));
    out << '\n';
  }
  return out.str();
}

DstInstance single_edge_instance() {
  return DstInstance({"r", "s"}, {{0, 1, Rational(1)}}, 0, {1});
}

DstInstance two_route_instance() {
  return DstInstance({"r", "a", "b", "s"},
                     {{0, 1, Rational(1)}, {0, 2, Rational(1)}, {1, 3, Rational(1)}, {2, 3, Rational(1)}}, 0, {3});
}

DstInstance star_instance(int terminals) {
  std::vector<std::string> names{"r"};
  std::vector<Edge> edges;
  std::vector<NodeId> ts;
  for (int i = 0; i < terminals; ++i) {
    names.push_back("s" + std::to_string(i));
    edges.push_back({0, i + 1, Rational(1)});
    ts.push_back(i + 1);
  }
  return DstInstance(std::move(names), std::move(edges), 0, std::move(ts));
}

DstInstance three_level_instance() {
  static const char* text = R"(dst 12 17
node r
node u1
node u2
node u3
node v1
node v2
node v3
node v4
node s1
node s2
node s3
node s4
root r
terminal s1
terminal s2
terminal s3
terminal s4
edge r u1 3
edge r u2 4
edge r u3 2
edge u1 v1 3
edge u1 v2 5
edge u2 v2 8
edge u2 v3 9
edge u2 v4 7
edge u3 v4 2
edge v1 s1 2
edge v2 s1 6
edge v2 s2 0
edge v2 s3 1
edge v3 s2 7
edge v3 s3 4
edge v3 s4 8
edge v4 s4 1
)";
  return parse_instance(text);
}

namespace {

void smoke_rows(ExperimentReport& rep, const PipelineConfig& cfg) {
  rep.rows.push_back(run_pipeline(single_edge_instance(), "single-edge", 1, 2, cfg));
  rep.rows.push_back(run_pipeline(star_instance(2), "star-2", 1, 2, cfg));
  rep.rows.push_back(run_pipeline(two_route_instance(), "two-route", 2, 2, cfg));
}

void gap_rows(ExperimentReport& rep, const PipelineConfig& cfg) {
  PipelineConfig c = cfg;
  c.round = false;
  DstInstance gap = gen_set_cover_gap(3);
  for (int t : {0, 1}) rep.rows.push_back(run_pipeline(gap, "setcover-gap-k3-t" + std::to_string(t), 2, t, c));
}

}  // namespace

ExperimentReport run_suite(const std::string& suite, const PipelineConfig& cfg) {
  ExperimentReport rep;
  rep.suite = suite;
  rep.config = cfg;
  if (suite == "smoke") {
    smoke_rows(rep, cfg);
  } else if (suite == "gap") {
    gap_rows(rep, cfg);
  } else if (suite == "full") {
    smoke_rows(rep, cfg);
    gap_rows(rep, cfg);
    for (std::uint64_t seed : {1, 2, 3}) {
      LayeredSpec spec{.ell = 2, .widths = {2, 2}, .density = 0.6, .cost_lo = 1, .cost_hi = 9, .seed = seed};
      rep.rows.push_back(
          run_pipeline(gen_random_layered(spec), "random-l2-w22-seed" + std::to_string(seed), 2, 1, [&] {
            PipelineConfig c = cfg;
            c.round = false;
            return c;
          }()));
    }
    PipelineConfig lp_only = cfg;
    lp_only.solve_sdp = false;
    lp_only.round = false;
    rep.rows.push_back(run_pipeline(three_level_instance(), "three-level", 3, 6, lp_only));
  } else {
    throw std::invalid_argument("unknown suite '" + suite + "' (expected smoke, gap or full)");
  }
  return rep;
}

}  // namespace dstlift
