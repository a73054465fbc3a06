#pragma once

// Brute-force reference implementations used as test oracles. They share no
// code with the library beyond the instance types.

#include "dstlift/exact_oracle.hpp"
#include "dstlift/flow_lp.hpp"
#include "dstlift/harness.hpp"
#include "dstlift/instance.hpp"
#include "dstlift/moments.hpp"

#include <boost/random/mersenne_twister.hpp>
#include <boost/random/uniform_int_distribution.hpp>

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace testing {

using namespace dstlift;

inline std::string three_level_text() {
  return R"(# three-level example
dst 12 17
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
}

inline EdgeId edge_by_name(const DstInstance& g, const std::string& u, const std::string& v) {
  auto a = g.find_node(u), b = g.find_node(v);
  if (!a || !b) throw std::runtime_error("no node " + u + " or " + v);
  auto e = g.find_edge(*a, *b);
  if (!e) throw std::runtime_error("no edge " + u + "->" + v);
  return *e;
}

/// The nine black edges of the three-level example.
inline std::vector<EdgeId> three_level_black(const DstInstance& g) {
  std::vector<EdgeId> out;
  for (auto [u, v] : std::vector<std::pair<std::string, std::string>>{{"r", "u1"},
                                                                      {"r", "u3"},
                                                                      {"u1", "v1"},
                                                                      {"u1", "v2"},
                                                                      {"u3", "v4"},
                                                                      {"v1", "s1"},
                                                                      {"v2", "s2"},
                                                                      {"v2", "s3"},
                                                                      {"v4", "s4"}})
    out.push_back(edge_by_name(g, u, v));
  std::sort(out.begin(), out.end());
  return out;
}

/// Every simple directed path from `from` to `to` as an edge list.
inline std::vector<std::vector<EdgeId>> all_simple_paths(const DstInstance& g, NodeId from, NodeId to) {
  std::vector<std::vector<EdgeId>> out;
  std::vector<EdgeId> cur;
  std::vector<char> on(g.num_nodes(), 0);
  std::function<void(NodeId)> go = [&](NodeId v) {
    if (v == to) {
      out.push_back(cur);
      return;
    }
    on[v] = 1;
    for (EdgeId e = 0; e < g.num_edges(); ++e) {
      if (g.edge(e).tail != v || on[g.edge(e).head]) continue;
      cur.push_back(e);
      go(g.edge(e).head);
      cur.pop_back();
    }
    on[v] = 0;
  };
  go(from);
  return out;
}

/// Cheapest simple path cost by exhaustive enumeration.
inline std::optional<Rational> brute_shortest(const DstInstance& g, NodeId from, NodeId to) {
  if (from == to) return Rational(0);
  std::optional<Rational> best;
  for (const auto& p : all_simple_paths(g, from, to)) {
    Rational c = g.cost_of(p);
    if (!best || c < *best) best = c;
  }
  return best;
}

/// Reachability check written independently of connects_all_terminals.
inline bool brute_feasible(const DstInstance& g, std::uint64_t mask) {
  std::vector<char> seen(g.num_nodes(), 0);
  seen[g.root()] = 1;
  bool changed = true;
  while (changed) {
    changed = false;
    for (EdgeId e = 0; e < g.num_edges(); ++e)
      if ((mask >> e) & 1 && seen[g.edge(e).tail] && !seen[g.edge(e).head]) seen[g.edge(e).head] = 1, changed = true;
  }
  for (NodeId s : g.terminals())
    if (!seen[s]) return false;
  return true;
}

inline Rational mask_cost(const DstInstance& g, std::uint64_t mask) {
  Rational c = 0;
  for (EdgeId e = 0; e < g.num_edges(); ++e)
    if ((mask >> e) & 1) c += g.edge(e).cost;
  return c;
}

/// Optimum over all 2^m edge subsets (m <= 20).
inline Rational brute_opt(const DstInstance& g) {
  std::optional<Rational> best;
  for (std::uint64_t mask = 0; mask < (1ULL << g.num_edges()); ++mask)
    if (brute_feasible(g, mask)) {
      Rational c = mask_cost(g, mask);
      if (!best || c < *best) best = c;
    }
  return *best;
}

/// All inclusion-minimal feasible subsets as sorted edge lists.
inline std::set<std::vector<EdgeId>> brute_minimal_solutions(const DstInstance& g) {
  std::set<std::vector<EdgeId>> out;
  const int m = g.num_edges();
  for (std::uint64_t mask = 0; mask < (1ULL << m); ++mask) {
    if (!brute_feasible(g, mask)) continue;
    bool minimal = true;
    for (int e = 0; e < m && minimal; ++e)
      if ((mask >> e) & 1 && brute_feasible(g, mask & ~(1ULL << e))) minimal = false;
    if (!minimal) continue;
    std::vector<EdgeId> s;
    for (int e = 0; e < m; ++e)
      if ((mask >> e) & 1) s.push_back(e);
    out.insert(s);
  }
  return out;
}

/// Random general digraph (cycles allowed) with every terminal reachable.
inline DstInstance random_digraph(std::uint64_t seed, int n, int m, int terminals, int max_cost = 6) {
  boost::random::mt19937_64 gen(seed);
  boost::random::uniform_int_distribution<int> node(0, n - 1), cost(0, max_cost);
  for (;;) {
    std::vector<std::string> names;
    for (int i = 0; i < n; ++i) names.push_back("n" + std::to_string(i));
    std::vector<Edge> edges;
    std::set<std::pair<int, int>> used;
    while (static_cast<int>(edges.size()) < m) {
      int a = node(gen), b = node(gen);
      if (a == b || b == 0 || used.count({a, b})) continue;
      used.insert({a, b});
      edges.push_back({a, b, Rational(cost(gen))});
    }
    std::vector<NodeId> ts;
    for (int i = 0; i < terminals; ++i) ts.push_back(n - 1 - i);
    try {
      return DstInstance(names, edges, 0, ts);
    } catch (const InstanceError&) {
      continue;
    }
  }
}

/// Uniform distribution over the 0/1 points of the given arborescences, with
/// rational weights 1..k normalized.
inline std::vector<Atom<Rational>> solution_distribution(const DstInstance& g,
                                                         const std::vector<std::vector<EdgeId>>& sols,
                                                         const std::vector<int>& weights = {}) {
  std::vector<Atom<Rational>> atoms;
  Rational total = 0;
  for (std::size_t i = 0; i < sols.size(); ++i) total += weights.empty() ? 1 : weights[i];
  for (std::size_t i = 0; i < sols.size(); ++i) {
    Rational w = weights.empty() ? Rational(1) : Rational(weights[i]);
    atoms.push_back({IndexSet::from_elements(integral_point_support(g, sols[i])), Rational(w / total)});
  }
  std::sort(atoms.begin(), atoms.end(), [](const auto& a, const auto& b) { return a.support.elements() < b.support.elements(); });
  // merge equal supports
  std::vector<Atom<Rational>> merged;
  for (auto& a : atoms) {
    if (!merged.empty() && merged.back().support == a.support)
      merged.back().mass += a.mass;
    else
      merged.push_back(a);
  }
  return merged;
}

/// Dense 0/1 point from a support.
inline std::vector<Rational> point_from_support(int n, const IndexSet& support) {
  std::vector<Rational> x(n, Rational(0));
  support.for_each([&](int i) { x[i] = 1; });
  return x;
}

}  // namespace testing
