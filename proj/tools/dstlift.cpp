#include "dstlift/exact_oracle.hpp"
#include "dstlift/flow_lp.hpp"
#include "dstlift/harness.hpp"
#include "dstlift/lasserre_sdp.hpp"
#include "dstlift/moments.hpp"
#include "dstlift/rounding.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

using namespace dstlift;
using nlohmann::json;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

void emit(const json& j, const std::string& out_path) {
  std::string text = j.dump(2) + "\n";
  if (!out_path.empty()) write_file(out_path, text);
  std::cout << text;
}

std::string edge_name(const DstInstance& g, EdgeId e) {
  return g.name(g.edge(e).tail) + "->" + g.name(g.edge(e).head);
}

json edge_list(const DstInstance& g, std::span<const EdgeId> edges) {
  json a = json::array();
  for (EdgeId e : edges) a.push_back({{"id", e}, {"edge", edge_name(g, e)}, {"cost", to_string(g.edge(e).cost)}});
  return a;
}

json certify_json(const CertifyReport& r) {
  json v = json::array();
  for (const auto& x : r.violations) v.push_back({{"kind", x.kind}, {"where", x.where}, {"amount", x.amount}});
  return {{"ok", r.ok},
          {"exact", r.exact},
          {"t", r.t},
          {"tol", r.tol},
          {"missing_entries", r.missing_entries},
          {"first_missing", r.first_missing},
          {"y_empty", r.y_empty},
          {"moment_min_eig", r.moment_min_eig},
          {"moment_psd", r.moment_psd},
          {"worst_row", r.worst_row},
          {"worst_row_min_eig", r.worst_row_min_eig},
          {"failing_rows", r.failing_rows},
          {"blocks_checked", r.blocks_checked},
          {"domain", r.domain},
          {"violations", v}};
}

struct Common {
  std::string input;
  int ell = 1;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("input", c.input, "instance file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--ell", c.ell, "number of levels")->check(CLI::PositiveNumber);
}

std::unique_ptr<MomentOracle> load_oracle(const std::string& path, bool exact, int num_vars) {
  std::string text = read_file(path);
  if (exact) {
    RationalMoments y = import_moments(text);
    if (y.num_vars() != num_vars) throw std::runtime_error("moment file has the wrong variable count");
    return std::make_unique<VectorOracle<Rational>>(std::move(y));
  }
  FloatMoments y = import_moments_float(text);
  if (y.num_vars() != num_vars) throw std::runtime_error("moment file has the wrong variable count");
  return std::make_unique<VectorOracle<double>>(std::move(y));
}

// certify plus the inversion and shift-commutativity identities for every
// single-variable split S = {i}, X in {∅, S}.
template <class T>
json check_suite(const MomentVector<T>& y, const ConstraintSystem& cs, int t, double tol) {
  if (y.num_vars() != cs.num_vars) throw std::runtime_error("moment file and system disagree on the variable count");
  CertifyReport cr = certify(y, cs, t, tol);
  double inv_dev = 0, com_dev = 0;
  std::size_t inv_checked = 0, com_checked = 0;
  bool inv_ok = true, com_ok = true;
  std::string first;
  if (y.complete_degree() >= 1) {
    for (int i = 0; i < y.num_vars(); ++i) {
      IndexSet S;
      S.insert(i);
      CheckResult inv = inversion_check(y, S, tol);
      inv_dev = std::max(inv_dev, inv.max_deviation);
      inv_checked += inv.checked;
      if (!inv.ok && inv_ok) first = inv.detail;
      inv_ok = inv_ok && inv.ok;
      for (const IndexSet& X : {IndexSet{}, S})
        for (const LinearRow& row : cs.rows) {
          CheckResult c = shift_commutes_check(y, X, S, row, tol);
          com_dev = std::max(com_dev, c.max_deviation);
          com_checked += c.checked;
          if (!c.ok && com_ok && inv_ok) first = c.detail;
          com_ok = com_ok && c.ok;
        }
    }
  }
  json j = certify_json(cr);
  j["inversion"] = {{"ok", inv_ok}, {"max_deviation", inv_dev}, {"checked", inv_checked}};
  j["shift_commutes"] = {{"ok", com_ok}, {"max_deviation", com_dev}, {"checked", com_checked}};
  j["certified"] = cr.ok;
  j["ok"] = cr.ok && inv_ok && com_ok;
  j["first_failure"] = first;
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lift-and-project relaxations and rounding for directed Steiner tree"};
  app.require_subcommand(1);

  // levelize
  Common lv;
  bool lv_prune = false;
  std::string lv_out;
  auto* c_lv = app.add_subcommand("levelize", "Build the layered instance");
  add_common(c_lv, lv);
  c_lv->add_flag("--prune", lv_prune, "drop edges on no root-terminal path");
  c_lv->add_option("output", lv_out, "write the layered instance here");

  // solve-lp
  Common lp;
  std::string lp_dump;
  auto* c_lp = app.add_subcommand("solve-lp", "Solve the flow LP exactly");
  add_common(c_lp, lp);
  c_lp->add_option("--lp-dump", lp_dump, "write the constraint system here");

  // check
  std::string ck_moments, ck_system;
  int ck_t = 0;
  double ck_tol = 1e-6;
  bool ck_exact = false;
  auto* c_ck = app.add_subcommand("check", "Certify a moment vector and run the conditioning identities");
  c_ck->add_option("moments", ck_moments, "moment file")->required()->check(CLI::ExistingFile);
  c_ck->add_option("system", ck_system, "constraint system (lp-dump format)")->required()->check(CLI::ExistingFile);
  c_ck->add_option("--t", ck_t, "level")->required()->check(CLI::NonNegativeNumber);
  c_ck->add_option("--tol", ck_tol, "tolerance (float files)");
  c_ck->add_flag("--exact", ck_exact, "read values as exact rationals");

  // lift-solve
  Common ls;
  int ls_t = 0;
  SolverConfig ls_cfg;
  std::string ls_out;
  bool ls_no_presolve = false, ls_no_reduction = false;
  auto* c_ls = app.add_subcommand("lift-solve", "Solve the level-t relaxation");
  add_common(c_ls, ls);
  c_ls->add_option("--t", ls_t, "level")->required()->check(CLI::NonNegativeNumber);
  c_ls->add_option("--tol", ls_cfg.tol, "solver tolerance");
  c_ls->add_option("--max-iters", ls_cfg.max_iters, "iteration limit");
  c_ls->add_option("--anderson", ls_cfg.anderson, "Anderson acceleration memory (0: plain ADMM)");
  c_ls->add_option("--seed", ls_cfg.seed, "0 starts from zero, otherwise a seeded random start");
  c_ls->add_option("--out", ls_out, "write the moment vector here");
  c_ls->add_flag("--no-presolve", ls_no_presolve, "skip the exact presolve");
  c_ls->add_flag("--no-atom-basis", ls_no_reduction, "always use the first-order solver");
  c_ls->add_flag("--serial", ls_cfg.serial, "project cone blocks on one thread");

  // lift-dim
  Common ld;
  int ld_t = 0;
  auto* c_ld = app.add_subcommand("lift-dim", "Report the size of the level-t relaxation");
  add_common(c_ld, ld);
  c_ld->add_option("--t", ld_t, "level")->required()->check(CLI::NonNegativeNumber);

  // round
  Common rd;
  std::string rd_moments, rd_out;
  int rd_reps = 0;
  std::uint64_t rd_seed = 0, rd_trials = 1;
  bool rd_exact = false;
  auto* c_rd = app.add_subcommand("round", "Round a moment vector to a tree");
  add_common(c_rd, rd);
  c_rd->add_option("--moments", rd_moments, "moment file")->required()->check(CLI::ExistingFile);
  c_rd->add_option("--reps", rd_reps, "samples per rounding (0: 2*ell*log2|X|, at least 1)");
  c_rd->add_option("--seed", rd_seed, "base seed");
  c_rd->add_option("--trials", rd_trials, "independent roundings")->check(CLI::PositiveNumber);
  c_rd->add_option("--out", rd_out, "write the JSON result here");
  c_rd->add_flag("--exact", rd_exact, "read values as exact rationals");

  // stats
  Common st;
  std::string st_moments, st_out, st_dat;
  std::uint64_t st_seed = 0, st_trials = 10000;
  bool st_exact = false;
  auto* c_st = app.add_subcommand("stats", "Monte-Carlo statistics of the path sampler");
  add_common(c_st, st);
  c_st->add_option("--moments", st_moments, "moment file")->required()->check(CLI::ExistingFile);
  c_st->add_option("--seed", st_seed, "base seed");
  c_st->add_option("--trials", st_trials, "samples")->check(CLI::PositiveNumber);
  c_st->add_option("--out", st_out, "write the JSON report here");
  c_st->add_option("--dat", st_dat, "write a per-path data file (gnuplot columns)");
  c_st->add_flag("--exact", st_exact, "read values as exact rationals");

  // exact
  std::string ex_input;
  auto* c_ex = app.add_subcommand("exact", "Optimal tree by dynamic programming");
  c_ex->add_option("input", ex_input, "instance file")->required()->check(CLI::ExistingFile);

  // experiment
  std::string ex_suite = "smoke", ex_out, ex_tsv;
  auto* c_xp = app.add_subcommand("experiment", "Run an experiment suite");
  c_xp->add_option("--suite", ex_suite, "smoke, gap or full")->check(CLI::IsMember({"smoke", "gap", "full"}));
  c_xp->add_option("--out", ex_out, "write the JSON report here");
  c_xp->add_option("--tsv", ex_tsv, "write a whitespace-separated ratio table here");

  CLI11_PARSE(app, argc, argv);

  try {
    if (c_lv->parsed()) {
      DstInstance inst = read_instance_file(lv.input);
      LayeredInstance li = levelize(inst, lv.ell, LevelizeOptions{.prune = lv_prune});
      const DstInstance& g = li.graph();
      if (!lv_out.empty()) write_file(lv_out, write_instance(g));
      json levels = json::array();
      for (int j = 0; j <= li.ell(); ++j) levels.push_back(li.nodes_at_level(j).size());
      emit({{"ell", li.ell()}, {"nodes", g.num_nodes()}, {"edges", g.num_edges()}, {"level_sizes", levels}}, "");
    } else if (c_lp->parsed()) {
      DstInstance inst = read_instance_file(lp.input);
      LayeredInstance li = layered_view(inst, lp.ell);
      ConstraintSystem cs = build_flow_lp(li);
      if (!lp_dump.empty()) write_file(lp_dump, write_lp_dump(cs));
      LpSolution sol = solve_lp(cs);
      json j = {{"status", lp_status_name(sol.status)}, {"num_vars", cs.num_vars}, {"num_rows", cs.rows.size()},
                {"pivots", sol.pivots}};
      if (sol.status == LpStatus::optimal) {
        j["objective"] = to_string(sol.objective);
        j["objective_float"] = to_double(sol.objective);
        json vals = json::object();
        bool integral = true;
        std::vector<EdgeId> support;
        for (int i = 0; i < cs.num_vars; ++i) {
          if (sol.values[i] == 0) continue;
          vals[cs.var_names[i]] = to_string(sol.values[i]);
          if (sol.values[i] != 1) integral = false;
          if (i < li.graph().num_edges()) support.push_back(i);
        }
        j["values"] = vals;
        j["integral"] = integral;
        if (integral) {
          MappedSolution m = map_back(support, li);
          j["mapped"] = {{"edges", edge_list(inst, m.edges)}, {"cost", to_string(m.cost)}};
        }
      }
      emit(j, "");
    } else if (c_ck->parsed()) {
      ConstraintSystem cs = parse_lp_dump(read_file(ck_system));
      std::string text = ck_moments.empty() ? "" : read_file(ck_moments);
      json j = ck_exact ? check_suite(import_moments(text), cs, ck_t, 0) : check_suite(import_moments_float(text), cs, ck_t, ck_tol);
      emit(j, "");
      return j["ok"].get<bool>() ? 0 : 3;
    } else if (c_ls->parsed()) {
      DstInstance inst = read_instance_file(ls.input);
      ConstraintSystem cs = build_flow_lp(layered_view(inst, ls.ell));
      ls_cfg.presolve = !ls_no_presolve;
      ls_cfg.full_level_reduction = !ls_no_reduction;
      ls_cfg.validate();
      SdpProblem p = assemble(cs, ls_t);
      SdpSolution sol = solve(p, ls_cfg);
      if (!ls_out.empty()) write_file(ls_out, export_moments(sol.y));
      CertifyReport cr = certify(sol.y, cs, ls_t, ls_cfg.tol);
      emit({{"dimensions", p.dims.to_json()},
            {"diagnostics", sol.diag.to_json()},
            {"objective", sol.objective},
            {"certified", cr.ok}},
           "");
    } else if (c_ld->parsed()) {
      DstInstance inst = read_instance_file(ld.input);
      ConstraintSystem cs = build_flow_lp(layered_view(inst, ld.ell));
      emit(lift_dimensions(cs, ld_t).to_json(), "");
    } else if (c_rd->parsed()) {
      DstInstance inst = read_instance_file(rd.input);
      LayeredInstance li = layered_view(inst, rd.ell);
      const int nv = build_flow_lp(li).num_vars;
      auto oracle = load_oracle(rd_moments, rd_exact, nv);
      json runs = json::array();
      double sum = 0;
      for (std::uint64_t i = 0; i < rd_trials; ++i) {
        const std::uint64_t seed = rd_trials == 1 ? rd_seed : trial_seed(rd_seed, i);
        RoundingResult r = round(*oracle, li, rd_reps, seed);
        MappedSolution m = map_back(r.edges, li);
        json conn = json::array();
        for (bool b : r.connected) conn.push_back(b);
        runs.push_back({{"seed", seed},
                        {"layered_edges", edge_list(li.graph(), r.edges)},
                        {"layered_cost", to_string(r.cost)},
                        {"edges", edge_list(inst, m.edges)},
                        {"cost", to_string(m.cost)},
                        {"connected_before_repair", conn},
                        {"repair_cost", to_string(r.repair_cost)},
                        {"reps", r.reps},
                        {"queries", r.queries},
                        {"clamps", r.clamps},
                        {"dead_paths", r.dead}});
        sum += to_double(m.cost);
      }
      emit({{"runs", runs}, {"mean_cost", sum / static_cast<double>(rd_trials)}, {"trials", rd_trials}}, rd_out);
    } else if (c_st->parsed()) {
      DstInstance inst = read_instance_file(st.input);
      LayeredInstance li = layered_view(inst, st.ell);
      const DstInstance& g = li.graph();
      const int nv = build_flow_lp(li).num_vars;
      auto oracle = load_oracle(st_moments, st_exact, nv);
      StatsReport r = stats(*oracle, li, st_trials, st_seed);
      PathSumReport ps = path_sum_check(*oracle, li);
      std::ostringstream dat;
      dat << "# terminal\tpath\ty\tfreq\tse\tcond_mean_z\n";
      json terms = json::array();
      for (std::size_t s = 0; s < r.terminals.size(); ++s) {
        const TerminalStats& ts = r.terminals[s];
        json paths = json::array();
        for (const auto& p : ts.paths) {
          std::string name;
          for (EdgeId e : p.edges) name += (name.empty() ? "" : ",") + edge_name(g, e);
          paths.push_back({{"path", name},
                           {"y", p.y},
                           {"hits", p.hits},
                           {"freq", p.freq},
                           {"se", p.se},
                           {"cond_mean_z", p.cond_mean_z},
                           {"cond_se", p.cond_se}});
          dat << g.name(ts.terminal) << '\t' << name << '\t' << p.y << '\t' << p.freq << '\t' << p.se << '\t'
              << p.cond_mean_z << '\n';
        }
        terms.push_back({{"terminal", g.name(ts.terminal)},
                         {"mean_z", ts.mean_z},
                         {"se_mean_z", ts.se_mean_z},
                         {"pr_hit", ts.pr_hit},
                         {"se_pr_hit", ts.se_pr_hit},
                         {"cond_mean_z", ts.cond_mean_z},
                         {"se_cond_mean_z", ts.se_cond_mean_z},
                         {"max_path_cond_mean_z", ts.max_path_cond_mean_z},
                         {"se_max_path_cond_mean_z", ts.se_max_path_cond_mean_z},
                         {"path_mass", ps.terminal_sums[s]},
                         {"paths", paths}});
      }
      json edges = json::array();
      for (EdgeId e = 0; e < g.num_edges(); ++e)
        edges.push_back({{"edge", edge_name(g, e)}, {"freq", static_cast<double>(r.edge_hits[e]) / r.trials}});
      if (!st_dat.empty()) write_file(st_dat, dat.str());
      emit({{"trials", r.trials},
            {"seed", r.seed},
            {"ell", li.ell()},
            {"terminals", terms},
            {"edges", edges},
            {"mean_cost", r.mean_cost},
            {"se_cost", r.se_cost},
            {"mean_queries", r.mean_queries},
            {"se_queries", r.se_queries},
            {"query_bound", static_cast<double>(g.num_nodes()) * g.num_nodes()},
            {"clamps", r.clamps},
            {"dead_paths", r.dead},
            {"path_sums", {{"ok", ps.ok}, {"max_deviation", ps.max_deviation},
                           {"prefixes_checked", ps.prefixes_checked}, {"max_prefix_excess", ps.max_prefix_excess}}}},
           st_out);
    } else if (c_ex->parsed()) {
      DstInstance inst = read_instance_file(ex_input);
      ExactResult r = exact_opt(inst);
      emit({{"opt", to_string(r.opt_cost)},
            {"witness", edge_list(inst, r.witness)},
            {"dp_states", r.dp_states},
            {"relaxations", r.relaxations}},
           "");
    } else if (c_xp->parsed()) {
      ExperimentReport rep = run_suite(ex_suite);
      if (!ex_tsv.empty()) write_file(ex_tsv, rep.to_tsv());
      emit(rep.to_json(), ex_out);
    }
  } catch (const BudgetExceeded& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
