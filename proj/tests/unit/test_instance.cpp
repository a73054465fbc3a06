#include "doctest.h"
#include "support.hpp"

#include <cmath>

using namespace dstlift;
using namespace testing;

namespace {

DstInstance path_instance() {
  return parse_instance("dst 3 2\nnode r\nnode a\nnode s\nroot r\nterminal s\nedge r a 1\nedge a s 1\n");
}

DstInstance triangle_instance() {
  return parse_instance(
      "dst 3 3\nnode r\nnode a\nnode b\nroot r\nterminal b\nedge r a 1\nedge a b 1\nedge r b 5\n");
}

}  // namespace

TEST_CASE("parse the three-level example") {
  DstInstance g = parse_instance(three_level_text());
  CHECK(g.num_nodes() == 12);
  CHECK(g.num_edges() == 17);
  CHECK(g.name(g.root()) == "r");
  CHECK(g.num_terminals() == 4);
  CHECK(g.cost_of(three_level_black(g)) == 19);
  CHECK(connects_all_terminals(g, three_level_black(g)));
}

TEST_CASE("parse minimal and malformed files") {
  DstInstance g = parse_instance("dst 2 1\nnode r\nnode s\nroot r\nterminal s\nedge r s 5\n");
  CHECK(g.num_nodes() == 2);
  CHECK(g.edge(0).cost == 5);

  CHECK_THROWS_AS(parse_instance("dst 2 1\nnode r\nnode s\nroot r\nterminal s\nedge r x 5\n"), InstanceError);
  CHECK_THROWS_AS(parse_instance("dst 2 1\nnode r\nnode s\nroot r\nterminal s\nedge r s -1\n"), InstanceError);
  CHECK_THROWS_AS(parse_instance("dst 3 1\nnode r\nnode s\nnode t\nroot r\nterminal t\nedge r s 1\n"),
                  InstanceError);
  CHECK_THROWS_AS(parse_instance("dst 2 1\nnode r\nnode s\nroot r\nterminal s\nedge r s\n"), ParseError);
  CHECK_THROWS_AS(parse_instance("dst 2 1\nnode r\nnode s\nroot r\nterminal s\nedgy r s 1\n"), ParseError);
  CHECK_THROWS_AS(parse_instance("node r\n"), ParseError);
  CHECK_THROWS_AS(parse_instance("dst 2 1\nnode r\nnode s\nroot r\nterminal s\nedge r s 1e3\n"), ParseError);
  CHECK_THROWS_AS(parse_instance("dst 2 1\nnode r\nnode s\nroot r\nterminal r\nedge r s 1\n"), InstanceError);

  try {
    parse_instance("dst 2 1\nnode r\nnode s\nroot r\nterminal s\nedge r s abc\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 6);
  }
}

TEST_CASE("parallel edges keep the cheapest copy, rationals and comments parse") {
  DstInstance g = parse_instance(
      "# header comment\ndst 2 3\nnode r\nnode s\nroot r\nterminal s\nedge r s 7/2\nedge r s 1.25\nedge r s 3\n");
  REQUIRE(g.num_edges() == 1);
  CHECK(g.edge(0).cost == Rational(5, 4));
}

TEST_CASE("write_instance round-trips") {
  for (const DstInstance& g : {parse_instance(three_level_text()), triangle_instance(), random_digraph(3, 7, 14, 2)}) {
    DstInstance h = parse_instance(write_instance(g));
    CHECK(write_instance(h) == write_instance(g));
    REQUIRE(h.num_edges() == g.num_edges());
    for (EdgeId e = 0; e < g.num_edges(); ++e) {
      CHECK(h.edge(e).tail == g.edge(e).tail);
      CHECK(h.edge(e).head == g.edge(e).head);
      CHECK(h.edge(e).cost == g.edge(e).cost);
    }
  }
}

TEST_CASE("make_path checks incidence") {
  DstInstance g = path_instance();
  PathRecord p = make_path(g, {0, 1});
  CHECK(p.start == 0);
  CHECK(p.end == 2);
  CHECK(p.cost == 2);
  CHECK_THROWS_AS(make_path(g, {1, 0}), InstanceError);
}

TEST_CASE("metric closure examples") {
  DstInstance f = parse_instance(three_level_text());
  MetricClosure mc = metric_closure(f);
  NodeId r = *f.find_node("r"), s4 = *f.find_node("s4");
  CHECK(*mc.cost(r, s4) == 5);
  std::vector<EdgeId> expect{edge_by_name(f, "r", "u3"), edge_by_name(f, "u3", "v4"), edge_by_name(f, "v4", "s4")};
  CHECK(mc.witness(f, r, s4) == expect);
  CHECK_FALSE(mc.reachable(s4, r));

  DstInstance single = single_edge_instance();
  MetricClosure ms = metric_closure(single);
  CHECK(*ms.cost(single.root(), single.terminals()[0]) == single.edge(0).cost);

  DstInstance tri = triangle_instance();
  MetricClosure mt = metric_closure(tri);
  CHECK(*mt.cost(0, 2) == 2);
  CHECK(mt.witness(tri, 0, 2).size() == 2);
}

TEST_CASE("metric closure agrees with path enumeration and is a metric") {
  for (std::uint64_t seed = 1; seed <= 12; ++seed) {
    DstInstance g = random_digraph(seed, 6, 13, 2);
    MetricClosure mc = metric_closure(g);
    const int n = g.num_nodes();
    for (NodeId u = 0; u < n; ++u)
      for (NodeId v = 0; v < n; ++v) {
        auto brute = brute_shortest(g, u, v);
        REQUIRE(mc.reachable(u, v) == brute.has_value());
        if (!brute) continue;
        CHECK(*mc.cost(u, v) == *brute);
        if (u != v) {
          auto w = mc.witness(g, u, v);
          PathRecord p = make_path(g, w);
          CHECK(p.start == u);
          CHECK(p.end == v);
          CHECK(p.cost == *brute);
        }
      }
    for (NodeId u = 0; u < n; ++u)
      for (NodeId v = 0; v < n; ++v)
        for (NodeId w = 0; w < n; ++w)
          if (mc.reachable(u, v) && mc.reachable(v, w)) {
            REQUIRE(mc.reachable(u, w));
            CHECK(*mc.cost(u, w) <= *mc.cost(u, v) + *mc.cost(v, w));
          }
  }
}

TEST_CASE("levelize examples") {
  DstInstance single = single_edge_instance();
  LayeredInstance l1 = levelize(single, 1);
  REQUIRE(l1.graph().num_edges() == 1);
  CHECK(l1.graph().edge(0).cost == single.edge(0).cost);
  CHECK(l1.level(l1.graph().edge(0).tail) == 0);
  CHECK(l1.level(l1.graph().edge(0).head) == 1);

  LayeredInstance lp = levelize(path_instance(), 1);
  REQUIRE(lp.graph().num_edges() == 1);
  CHECK(lp.graph().edge(0).cost == 2);
  std::vector<EdgeId> sol{0};
  MappedSolution back = map_back(sol, lp);
  CHECK(back.edges == std::vector<EdgeId>{0, 1});
  CHECK(back.cost == 2);

  DstInstance f = parse_instance(three_level_text());
  LayeredInstance lf = levelize(f, 3);
  Rational lopt = exact_opt(lf.graph()).opt_cost;
  CHECK(lopt == 19);
  CHECK(to_double(lopt) <= 3 * std::cbrt(4.0) * 19);

  CHECK_THROWS_AS(levelize(f, 0), InstanceError);
}

TEST_CASE("from_layered keeps an already layered graph and map_back is the identity") {
  DstInstance f = parse_instance(three_level_text());
  LayeredInstance li = LayeredInstance::from_layered(f);
  CHECK(li.ell() == 3);
  std::vector<EdgeId> black = three_level_black(f);
  MappedSolution back = map_back(black, li);
  CHECK(back.edges == black);
  CHECK(back.cost == 19);

  CHECK_THROWS_AS(LayeredInstance::from_layered(triangle_instance()), InstanceError);
  std::vector<EdgeId> partial{black[0]};
  CHECK_THROWS_AS(map_back(partial, li), InstanceError);
}

TEST_CASE("shortest_path examples") {
  DstInstance f = parse_instance(three_level_text());
  LayeredInstance li = LayeredInstance::from_layered(f);
  NodeId s4 = *f.find_node("s4"), s2 = *f.find_node("s2");
  PathRecord p4 = shortest_path(li, s4);
  CHECK(p4.cost == 5);
  CHECK(p4.edges == std::vector<EdgeId>{edge_by_name(f, "r", "u3"), edge_by_name(f, "u3", "v4"),
                                        edge_by_name(f, "v4", "s4")});
  CHECK(shortest_path(li, s2).cost == 8);
  CHECK(*brute_shortest(f, f.root(), s2) == 8);
  CHECK_THROWS_AS(shortest_path(li, *f.find_node("v1")), InstanceError);

  LayeredInstance ls = LayeredInstance::from_layered(single_edge_instance());
  PathRecord ps = shortest_path(ls, ls.graph().terminals()[0]);
  CHECK(ps.edges == std::vector<EdgeId>{0});
  CHECK(ps.cost == ls.graph().edge(0).cost);
}

TEST_CASE("levelize properties on random digraphs") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    DstInstance g = random_digraph(100 + seed, 6, 11, 1 + seed % 3);
    Rational opt = brute_opt(g);
    std::optional<Rational> previous;
    for (int ell = 1; ell <= 3; ++ell) {
      for (bool prune : {false, true}) {
        LayeredInstance li = levelize(g, ell, {prune});
        const DstInstance& h = li.graph();
        for (const Edge& e : h.edges()) CHECK(li.level(e.head) == li.level(e.tail) + 1);
        for (NodeId s : h.terminals()) CHECK(li.level(s) == ell);
        CHECK(h.num_terminals() == g.num_terminals());

        ExactResult lay = exact_opt(h);
        CHECK(lay.opt_cost >= opt);
        CHECK(to_double(lay.opt_cost) <= ell * std::pow(static_cast<double>(g.num_terminals()), 1.0 / ell) * to_double(opt) + 1e-9);

        MappedSolution back = map_back(lay.witness, li);
        CHECK(brute_feasible(g, [&] {
          std::uint64_t m = 0;
          for (EdgeId e : back.edges) m |= 1ULL << e;
          return m;
        }()));
        CHECK(back.cost <= lay.opt_cost);
        CHECK(back.cost == g.cost_of(back.edges));

        if (!prune) {
          if (previous) CHECK(lay.opt_cost <= *previous);
          previous = lay.opt_cost;
        }
      }
    }
  }
}

TEST_CASE("map_back of every minimal layered solution is feasible and no more expensive") {
  DstInstance g = random_digraph(7, 5, 9, 2);
  LayeredInstance li = levelize(g, 2, {true});
  auto sols = enumerate_integral_solutions(li);
  REQUIRE(!sols.empty());
  for (const auto& s : sols) {
    MappedSolution back = map_back(s.edges, li);
    CHECK(connects_all_terminals(g, back.edges));
    CHECK(back.cost <= s.cost);
  }
}
