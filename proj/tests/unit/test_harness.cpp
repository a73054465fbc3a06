#include "doctest.h"
#include "support.hpp"

#include "dstlift/rounding.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

using namespace dstlift;
using namespace testing;

TEST_CASE("set cover generator") {
  std::vector<std::vector<int>> sets{{0, 1}, {1, 2}, {2}};
  std::vector<Rational> costs{Rational(3), Rational(2), Rational(1)};
  DstInstance g = gen_set_cover(sets, costs, 3);
  CHECK(g.num_nodes() == 1 + 3 + 3);
  CHECK(g.num_terminals() == 3);
  CHECK(g.num_edges() == 3 + 5);
  LayeredInstance li = LayeredInstance::from_layered(g);
  CHECK(li.ell() == 2);
  // {0,1} + {2} = 4 beats {0,1} + {1,2} = 5
  CHECK(exact_opt(g).opt_cost == 4);

  std::vector<Rational> short_costs{Rational(1)};
  CHECK_THROWS_AS(gen_set_cover(sets, short_costs, 3), InstanceError);
  CHECK_THROWS_AS(gen_set_cover(sets, costs, 4), InstanceError);
  std::vector<std::vector<int>> outside{{0, 5}, {1}, {2}};
  CHECK_THROWS_AS(gen_set_cover(outside, costs, 3), InstanceError);

  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    DstInstance r = gen_set_cover(4, 5, seed);
    CHECK(r.num_terminals() == 5);
    CHECK(LayeredInstance::from_layered(r).ell() == 2);
    for (EdgeId e = 0; e < r.num_edges(); ++e) {
      const Edge& ed = r.edge(e);
      if (ed.tail == r.root()) {
        CHECK(ed.cost >= 1);
        CHECK(ed.cost <= 5);
      } else {
        CHECK(ed.cost == 0);
      }
    }
    CHECK(write_instance(gen_set_cover(4, 5, seed)) == write_instance(r));
  }
  CHECK_THROWS_AS(gen_set_cover(0, 3, 1), InstanceError);
}

TEST_CASE("set cover gap instance: LP k/(k-1), optimum 2") {
  for (int k = 2; k <= 5; ++k) {
    DstInstance g = gen_set_cover_gap(k);
    LpSolution lp = solve_lp(build_flow_lp(LayeredInstance::from_layered(g)));
    REQUIRE(lp.status == LpStatus::optimal);
    CHECK(lp.objective == Rational(k) / (k - 1));
    CHECK(exact_opt(g).opt_cost == 2);
  }
  CHECK_THROWS_AS(gen_set_cover_gap(1), InstanceError);
}

TEST_CASE("random layered generator") {
  LayeredSpec spec;
  spec.ell = 3;
  spec.widths = {3, 4, 4};
  spec.seed = 42;
  DstInstance g = gen_random_layered(spec);
  // regression value
  CHECK(instance_hash(g) == 0x3e37928e61238317ULL);
  CHECK(instance_hash(gen_random_layered(spec)) == instance_hash(g));
  CHECK(g.num_nodes() == 12);
  CHECK(g.num_terminals() == 4);
  LayeredInstance li = LayeredInstance::from_layered(g);
  CHECK(li.ell() == 3);
  for (NodeId v = 0; v < g.num_nodes(); ++v) CHECK((v == g.root() || !g.in_edges(v).empty()));

  spec.density = 1.0;
  spec.cost_lo = 2;
  spec.cost_hi = 2;
  DstInstance full = gen_random_layered(spec);
  CHECK(full.num_edges() == 3 + 3 * 4 + 4 * 4);
  for (EdgeId e = 0; e < full.num_edges(); ++e) CHECK(full.edge(e).cost == 2);

  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    LayeredSpec s{.ell = 2, .widths = {2, 3}, .density = 0.4, .cost_lo = 0, .cost_hi = 3, .seed = seed};
    DstInstance r = gen_random_layered(s);
    CHECK(LayeredInstance::from_layered(r).ell() == 2);
    CHECK(r.num_terminals() == 3);
  }

  LayeredSpec bad = spec;
  bad.widths = {1, 2};
  CHECK_THROWS_AS(gen_random_layered(bad), InstanceError);
  bad = spec;
  bad.density = 0;
  CHECK_THROWS_AS(gen_random_layered(bad), InstanceError);
  bad = spec;
  bad.cost_hi = 0;
  CHECK_THROWS_AS(gen_random_layered(bad), InstanceError);
  bad = spec;
  bad.density = 0.01;
  bad.retries = 2;
  CHECK_THROWS_AS(gen_random_layered(bad), InstanceError);
}

TEST_CASE("instance hash and layered view") {
  DstInstance f = three_level_instance();
  CHECK(write_instance(f) == write_instance(parse_instance(three_level_text())));
  // regression value
  CHECK(instance_hash(f) == 0x7d583ccdc3bbd527ULL);
  CHECK(instance_hash(f) != instance_hash(two_route_instance()));

  bool as_is = false;
  LayeredInstance same = layered_view(f, 3, &as_is);
  CHECK(as_is);
  CHECK(same.graph().num_edges() == f.num_edges());
  LayeredInstance deeper = layered_view(f, 4, &as_is);
  CHECK_FALSE(as_is);
  CHECK(deeper.ell() == 4);
  CHECK(exact_opt(deeper.graph()).opt_cost >= 19);

  DstInstance cyc = random_digraph(3, 6, 12, 2);
  LayeredInstance lv = layered_view(cyc, 2, &as_is);
  CHECK_FALSE(as_is);
  CHECK(lv.ell() == 2);
}

TEST_CASE("pipeline on the single edge") {
  PipelineConfig cfg;
  cfg.seeds = {1, 2, 3};
  ExperimentRow row = run_pipeline(single_edge_instance(), "one", 1, 1, cfg);
  CHECK(row.id == "one");
  CHECK(row.hash == instance_hash(single_edge_instance()));
  CHECK(row.layering == "as-is");
  CHECK(row.lp == 1);
  CHECK(row.lp_exact == "1");
  REQUIRE(row.sdp);
  CHECK(*row.sdp == doctest::Approx(1).epsilon(1e-6));
  CHECK(row.sdp_certified);
  CHECK(row.reps == 1);
  CHECK(row.rounded == std::vector<double>{1, 1, 1});
  CHECK(row.repaired == std::vector<bool>{false, false, false});
  REQUIRE(row.rounded_mean);
  CHECK(*row.rounded_mean == 1);
  CHECK(*row.rounded_std == 0);
  CHECK(row.opt == 1);
  CHECK(row.opt_exact == "1");
  CHECK(row.sandwich_ok);

  nlohmann::json j = row.to_json();
  CHECK(j["hash"].get<std::string>().size() == 16);
  CHECK(j["ratios"]["opt_over_lp"] == 1.0);
  CHECK(j["ratios"]["rounded_over_opt"] == 1.0);

  PipelineConfig no_sdp = cfg;
  no_sdp.solve_sdp = false;
  ExperimentRow bare = run_pipeline(single_edge_instance(), "bare", 1, 1, no_sdp);
  CHECK_FALSE(bare.sdp);
  CHECK(bare.rounded.empty());
  CHECK(bare.to_json()["sdp"].is_null());
  CHECK(bare.to_json()["ratios"]["opt_over_sdp"].is_null());
}

TEST_CASE("pipeline errors name their stage") {
  PipelineConfig cfg;
  try {
    run_pipeline(three_level_instance(), "three-level", 3, 0, cfg);
    FAIL("expected a rounding error");
  } catch (const PipelineError& e) {
    CHECK(e.stage() == "round");
    CHECK(std::string(e.what()).rfind("round: ", 0) == 0);
  }
  try {
    run_pipeline(three_level_instance(), "three-level", 3, -1, cfg);
    FAIL("expected a lift error");
  } catch (const PipelineError& e) {
    CHECK(e.stage() == "lift");
  }
  PipelineConfig imp = cfg;
  imp.moments_path = "/nonexistent/moments.txt";
  try {
    run_pipeline(single_edge_instance(), "one", 1, 1, imp);
    FAIL("expected an import error");
  } catch (const PipelineError& e) {
    CHECK(e.stage() == "import");
  }
  CHECK_THROWS_AS(run_suite("nope"), std::invalid_argument);
}

TEST_CASE("pipeline imports a moment file") {
  DstInstance g = two_route_instance();
  LayeredInstance li = LayeredInstance::from_layered(g);
  ConstraintSystem cs = build_flow_lp(li);
  auto sols = enumerate_integral_solutions(li);
  RationalMoments y = from_distribution(solution_distribution(g, {sols[0].edges, sols[1].edges}), cs.num_vars, 2);
  const std::filesystem::path path = std::filesystem::temp_directory_path() / "dstlift_harness_moments.txt";
  {
    std::ofstream out(path);
    out << export_moments(y);
  }
  PipelineConfig cfg;
  cfg.moments_path = path.string();
  ExperimentRow row = run_pipeline(g, "import", 2, 2, cfg);
  CHECK(row.sdp_method == "import");
  CHECK(*row.sdp == 2);
  CHECK(row.sdp_certified);
  CHECK(row.rounded.size() == cfg.seeds.size());
  for (double c : row.rounded) CHECK((c == 2 || c == 4));
  std::filesystem::remove(path);
}

TEST_CASE("gap instance rounding from an optimal level-2 distribution") {
  // The uniform law over the three optimal covers is feasible at every level.
  DstInstance g = gen_set_cover_gap(3);
  LayeredInstance li = LayeredInstance::from_layered(g);
  std::map<std::vector<EdgeId>, std::vector<EdgeId>> by_cover;
  for (const auto& s : enumerate_integral_solutions(li)) {
    if (s.cost != 2) continue;
    std::vector<EdgeId> top;
    for (EdgeId e : s.edges)
      if (g.edge(e).tail == g.root()) top.push_back(e);
    by_cover.emplace(top, s.edges);
  }
  REQUIRE(by_cover.size() == 3);
  std::vector<std::vector<EdgeId>> covers;
  for (auto& [top, sol] : by_cover) covers.push_back(sol);
  DistributionOracle y(solution_distribution(g, covers));
  Rational lp_cost = 0;
  for (EdgeId e = 0; e < g.num_edges(); ++e) lp_cost += g.edge(e).cost * y.exact_value(IndexSet{e});
  CHECK(lp_cost == 2);

  const int reps = default_reps(2, 3);
  CHECK(reps == 7);
  double sum = 0;
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    RoundingResult r = round(y, li, reps, seed);
    CHECK(verify_solution(g, r.edges).feasible);
    CHECK(to_double(r.cost) / 2 <= 2.0 * reps);
    sum += to_double(r.cost);
  }
  CHECK(sum / 200 <= (reps + 1) * 2.0);
}

TEST_CASE("suite report output") {
  ExperimentReport rep;
  rep.suite = "custom";
  PipelineConfig cfg;
  cfg.seeds = {4};
  rep.config = cfg;
  rep.rows.push_back(run_pipeline(single_edge_instance(), "one", 1, 1, cfg));
  PipelineConfig bare = cfg;
  bare.solve_sdp = false;
  rep.rows.push_back(run_pipeline(star_instance(2), "star", 1, 1, bare));

  nlohmann::json j = rep.to_json();
  CHECK(j["suite"] == "custom");
  CHECK(j["rows"].size() == 2);
  CHECK(j["config"].is_object());
  CHECK(nlohmann::json::parse(j.dump()) == j);

  std::string tsv = rep.to_tsv();
  std::istringstream in(tsv);
  std::string header, line;
  std::getline(in, header);
  CHECK(header.rfind("# id\t", 0) == 0);
  const auto columns = std::count(header.begin(), header.end(), '\t');
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    CHECK(std::count(line.begin(), line.end(), '\t') == columns);
  }
  CHECK(rows == 2);
  CHECK(tsv.find("star\t3\t2\t1\t1\t2\tNaN") != std::string::npos);
}

TEST_CASE("smoke suite") {
  ExperimentReport rep = run_suite("smoke");
  CHECK(rep.suite == "smoke");
  REQUIRE(rep.rows.size() == 3);
  for (const auto& r : rep.rows) {
    CAPTURE(r.id);
    CHECK(r.sandwich_ok);
    CHECK(r.sdp_certified);
    CHECK(r.rounded.size() == rep.config.seeds.size());
    for (double c : r.rounded) CHECK(c >= r.opt);
  }
  CHECK(rep.to_json().dump() == run_suite("smoke").to_json().dump());
}
