#include "dstlift/exact_oracle.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <functional>
#include <optional>
#include <queue>
#include <set>

namespace dstlift {

namespace {

struct Choice {
  enum Kind : std::uint8_t { none, base, split, edge } kind = none;
  std::uint32_t arg = 0;  // submask for split, edge id for edge
};

}  // namespace

ExactResult exact_opt(const DstInstance& inst) {
  const int k = inst.num_terminals();
  if (k > kMaxExactTerminals)
    throw CapExceeded("exact_opt supports at most " + std::to_string(kMaxExactTerminals) + " terminals, got " +
                      std::to_string(k));
  const int n = inst.num_nodes();
  const std::uint32_t full = (k == 0) ? 0u : ((1u << k) - 1);
  ExactResult res;
  if (k == 0) return res;

  std::vector<std::vector<std::optional<Rational>>> dp(std::size_t(full) + 1,
                                                       std::vector<std::optional<Rational>>(n));
  std::vector<std::vector<Choice>> choice(std::size_t(full) + 1, std::vector<Choice>(n));

  for (std::uint32_t mask = 1; mask <= full; ++mask) {
    auto& d = dp[mask];
    auto& ch = choice[mask];
    if ((mask & (mask - 1)) == 0) {
      int s = std::countr_zero(mask);
      d[inst.terminals()[s]] = Rational(0);
      ch[inst.terminals()[s]] = {Choice::base, 0};
    } else {
      const std::uint32_t low = mask & (~mask + 1);
      for (std::uint32_t a = (mask - 1) & mask; a > 0; a = (a - 1) & mask) {
        if (!(a & low)) continue;
        const std::uint32_t b = mask ^ a;
        for (NodeId v = 0; v < n; ++v) {
          if (!dp[a][v] || !dp[b][v]) continue;
          Rational c = *dp[a][v] + *dp[b][v];
          if (!d[v] || c < *d[v]) {
            d[v] = std::move(c);
            ch[v] = {Choice::split, a};
          }
        }
      }
    }
    // Dijkstra on reversed edges: d[u] <= c(u,v) + d[v].
    using Item = std::pair<Rational, NodeId>;
    std::set<Item> queue;
    for (NodeId v = 0; v < n; ++v)
      if (d[v]) queue.insert({*d[v], v});
    std::vector<char> done(n, 0);
    while (!queue.empty()) {
      auto [dv, v] = *queue.begin();
      queue.erase(queue.begin());
      if (done[v]) continue;
      done[v] = 1;
      for (EdgeId e : inst.in_edges(v)) {
        NodeId u = inst.edge(e).tail;
        if (done[u]) continue;
        ++res.relaxations;
        Rational c = dv + inst.edge(e).cost;
        if (!d[u] || c < *d[u]) {
          if (d[u]) queue.erase({*d[u], u});
          d[u] = c;
          ch[u] = {Choice::edge, static_cast<std::uint32_t>(e)};
          queue.insert({std::move(c), u});
        }
      }
    }
    for (NodeId v = 0; v < n; ++v)
      if (d[v]) ++res.dp_states;
  }

  const NodeId r = inst.root();
  if (!dp[full][r]) throw InstanceError("some terminal is unreachable from the root");
  res.opt_cost = *dp[full][r];

  std::vector<std::pair<std::uint32_t, NodeId>> stack{{full, r}};
  while (!stack.empty()) {
    auto [mask, v] = stack.back();
    stack.pop_back();
    const Choice& c = choice[mask][v];
    switch (c.kind) {
      case Choice::base:
        break;
      case Choice::split:
        stack.push_back({c.arg, v});
        stack.push_back({mask ^ c.arg, v});
        break;
      case Choice::edge:
        res.witness.push_back(static_cast<EdgeId>(c.arg));
        stack.push_back({mask, inst.edge(static_cast<EdgeId>(c.arg)).head});
        break;
      case Choice::none:
        throw std::logic_error("exact_opt: broken witness table");
    }
  }
  std::sort(res.witness.begin(), res.witness.end());
  res.witness.erase(std::unique(res.witness.begin(), res.witness.end()), res.witness.end());
  return res;
}

Verification verify_solution(const DstInstance& inst, std::span<const EdgeId> edges) {
  for (EdgeId e : edges)
    if (e < 0 || e >= inst.num_edges()) throw std::out_of_range("unknown edge id " + std::to_string(e));
  return {connects_all_terminals(inst, edges), inst.cost_of(edges)};
}

std::vector<PathRecord> enumerate_paths(const LayeredInstance& li, PathTarget target, std::size_t cap) {
  const DstInstance& g = li.graph();
  NodeId end;
  if (target.kind == PathTarget::Kind::node) {
    if (target.id < 0 || target.id >= g.num_nodes()) throw std::out_of_range("unknown node id");
    end = target.id;
  } else {
    if (target.id < 0 || target.id >= g.num_edges()) throw std::out_of_range("unknown edge id");
    end = g.edge(target.id).tail;
  }

  // Nodes that reach `end`.
  std::vector<char> useful(g.num_nodes(), 0);
  std::vector<NodeId> stack{end};
  useful[end] = 1;
  while (!stack.empty()) {
    NodeId v = stack.back();
    stack.pop_back();
    for (EdgeId e : g.in_edges(v)) {
      NodeId u = g.edge(e).tail;
      if (!useful[u]) useful[u] = 1, stack.push_back(u);
    }
  }

  std::vector<PathRecord> out;
  if (!useful[g.root()]) return out;
  std::vector<EdgeId> cur;
  std::function<void(NodeId)> dfs = [&](NodeId v) {
    if (v == end) {
      std::vector<EdgeId> p = cur;
      if (target.kind == PathTarget::Kind::edge) p.push_back(target.id);
      if (out.size() >= cap)
        throw CapExceeded("more than " + std::to_string(cap) + " paths to enumerate");
      out.push_back(make_path(g, std::move(p)));
      if (!out.back().edges.empty()) out.back().start = g.root();
      else out.back().start = out.back().end = g.root();
      return;
    }
    for (EdgeId e : g.out_edges(v)) {
      NodeId w = g.edge(e).head;
      if (!useful[w]) continue;
      cur.push_back(e);
      dfs(w);
      cur.pop_back();
    }
  };
  dfs(g.root());
  std::sort(out.begin(), out.end(), [](const PathRecord& a, const PathRecord& b) { return a.edges < b.edges; });
  return out;
}

std::vector<IntegralSolution> enumerate_integral_solutions(const LayeredInstance& li, std::size_t cap) {
  const DstInstance& g = li.graph();
  std::vector<NodeId> order;
  for (int j = 1; j <= li.ell(); ++j)
    for (NodeId v : li.nodes_at_level(j)) order.push_back(v);

  std::vector<char> present(g.num_nodes(), 0);
  std::vector<EdgeId> parent(g.num_nodes(), -1);
  present[g.root()] = 1;
  std::vector<IntegralSolution> out;

  // Every present non-terminal node of level j has a present child.
  auto level_ok = [&](int j) {
    for (NodeId v : li.nodes_at_level(j)) {
      if (!present[v] || g.is_terminal(v)) continue;
      bool child = false;
      for (EdgeId e : g.out_edges(v))
        if (present[g.edge(e).head] && parent[g.edge(e).head] == e) child = true;
      if (!child) return false;
    }
    return true;
  };

  std::function<void(std::size_t)> go = [&](std::size_t i) {
    if (i > 0 && (i == order.size() || li.level(order[i]) != li.level(order[i - 1])))
      if (!level_ok(li.level(order[i - 1]) - 1)) return;
    if (i == order.size()) {
      IntegralSolution sol;
      for (NodeId v : order)
        if (present[v]) sol.edges.push_back(parent[v]);
      std::sort(sol.edges.begin(), sol.edges.end());
      sol.cost = g.cost_of(sol.edges);
      if (out.size() >= cap)
        throw CapExceeded("more than " + std::to_string(cap) + " minimal solutions to enumerate");
      out.push_back(std::move(sol));
      return;
    }
    NodeId v = order[i];
    if (!g.is_terminal(v)) go(i + 1);
    for (EdgeId e : g.in_edges(v)) {
      if (!present[g.edge(e).tail]) continue;
      present[v] = 1;
      parent[v] = e;
      go(i + 1);
      present[v] = 0;
      parent[v] = -1;
    }
  };
  go(0);
  std::sort(out.begin(), out.end(), [](const IntegralSolution& a, const IntegralSolution& b) {
    if (a.cost != b.cost) return a.cost < b.cost;
    return a.edges < b.edges;
  });
  return out;
}

}  // namespace dstlift
