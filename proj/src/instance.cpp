#include "dstlift/instance.hpp"

#include <algorithm>
#include <fstream>
#include <queue>
#include <set>
#include <sstream>

namespace dstlift {

// ---------------------------------------------------------------------------
// DstInstance

DstInstance::DstInstance(std::vector<std::string> node_names, std::vector<Edge> edges,
                         NodeId root, std::vector<NodeId> terminals)
    : names_(std::move(node_names)), root_(root) {
  const int n = num_nodes();
  for (NodeId v = 0; v < n; ++v) {
    if (!by_name_.emplace(names_[v], v).second)
      throw InstanceError("duplicate node '" + names_[v] + "'");
  }
  if (root < 0 || root >= n) throw InstanceError("root is not a node");

  // Merge parallel edges, keeping the cheapest at the first position.
  std::unordered_map<long long, EdgeId> seen;
  for (auto& e : edges) {
    if (e.tail < 0 || e.tail >= n || e.head < 0 || e.head >= n)
      throw InstanceError("edge endpoint is not a node");
    if (e.tail == e.head) throw InstanceError("self-loop at '" + names_[e.tail] + "'");
    if (e.cost < 0)
      throw InstanceError("negative cost on edge " + names_[e.tail] + "->" + names_[e.head]);
    long long key = static_cast<long long>(e.tail) * n + e.head;
    if (auto it = seen.find(key); it != seen.end()) {
      if (e.cost < edges_[it->second].cost) edges_[it->second].cost = e.cost;
      continue;
    }
    seen.emplace(key, static_cast<EdgeId>(edges_.size()));
    edges_.push_back(std::move(e));
  }

  out_.assign(n, {});
  in_.assign(n, {});
  for (EdgeId e = 0; e < num_edges(); ++e) {
    out_[edges_[e].tail].push_back(e);
    in_[edges_[e].head].push_back(e);
  }

  if (terminals.empty()) throw InstanceError("instance has no terminals");
  terminal_pos_.assign(n, -1);
  for (NodeId s : terminals) {
    if (s < 0 || s >= n) throw InstanceError("terminal is not a node");
    if (s == root_) throw InstanceError("root '" + names_[s] + "' cannot be a terminal");
    if (terminal_pos_[s] >= 0) throw InstanceError("duplicate terminal '" + names_[s] + "'");
    terminal_pos_[s] = static_cast<int>(terminals_.size());
    terminals_.push_back(s);
  }

  std::vector<char> seen_node(n, 0);
  std::vector<NodeId> stack{root_};
  seen_node[root_] = 1;
  while (!stack.empty()) {
    NodeId u = stack.back();
    stack.pop_back();
    for (EdgeId e : out_[u]) {
      NodeId w = edges_[e].head;
      if (!seen_node[w]) {
        seen_node[w] = 1;
        stack.push_back(w);
      }
    }
  }
  for (NodeId s : terminals_)
    if (!seen_node[s]) throw InstanceError("terminal '" + names_[s] + "' is unreachable from the root");
}

std::optional<NodeId> DstInstance::find_node(std::string_view name) const {
  if (auto it = by_name_.find(std::string(name)); it != by_name_.end()) return it->second;
  return std::nullopt;
}

std::optional<EdgeId> DstInstance::find_edge(NodeId tail, NodeId head) const {
  for (EdgeId e : out_.at(tail))
    if (edges_[e].head == head) return e;
  return std::nullopt;
}

Rational DstInstance::cost_of(std::span<const EdgeId> edges) const {
  std::vector<EdgeId> ids(edges.begin(), edges.end());
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  Rational total = 0;
  for (EdgeId e : ids) total += edge(e).cost;
  return total;
}

bool connects_all_terminals(const DstInstance& inst, std::span<const EdgeId> edges) {
  const int n = inst.num_nodes();
  std::vector<std::vector<NodeId>> adj(n);
  for (EdgeId e : edges) {
    if (e < 0 || e >= inst.num_edges()) throw InstanceError("unknown edge id " + std::to_string(e));
    adj[inst.edge(e).tail].push_back(inst.edge(e).head);
  }
  std::vector<char> seen(n, 0);
  std::vector<NodeId> stack{inst.root()};
  seen[inst.root()] = 1;
  while (!stack.empty()) {
    NodeId u = stack.back();
    stack.pop_back();
    for (NodeId w : adj[u])
      if (!seen[w]) {
        seen[w] = 1;
        stack.push_back(w);
      }
  }
  return std::all_of(inst.terminals().begin(), inst.terminals().end(),
                     [&](NodeId s) { return seen[s] != 0; });
}

PathRecord make_path(const DstInstance& inst, std::vector<EdgeId> edges) {
  PathRecord p;
  p.cost = 0;
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const Edge& e = inst.edge(edges[i]);
    if (i > 0 && inst.edge(edges[i - 1]).head != e.tail)
      throw InstanceError("path edges are not consecutive");
    p.cost += e.cost;
  }
  if (!edges.empty()) {
    p.start = inst.edge(edges.front()).tail;
    p.end = inst.edge(edges.back()).head;
  }
  p.edges = std::move(edges);
  return p;
}

// ---------------------------------------------------------------------------
// Text format

namespace {

std::vector<std::string> tokenize(std::string_view line) {
  std::vector<std::string> out;
  std::istringstream in{std::string(line)};
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

long parse_count(const std::string& tok, int line) {
  try {
    std::size_t used = 0;
    long v = std::stol(tok, &used);
    if (used != tok.size() || v < 0) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw ParseError(line, "expected a nonnegative integer, got '" + tok + "'");
  }
}

}  // namespace

DstInstance parse_instance(std::string_view text) {
  struct PendingEdge {
    std::string tail, head;
    Rational cost;
    int line;
  };
  std::vector<std::string> nodes;
  std::vector<int> node_lines;
  std::vector<std::pair<std::string, int>> terminals;
  std::optional<std::pair<std::string, int>> root;
  std::vector<PendingEdge> edges;
  long declared_nodes = -1, declared_edges = -1;

  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    auto tok = tokenize(line);
    if (tok.empty()) continue;

    const std::string& kw = tok[0];
    if (declared_nodes < 0) {
      if (kw != "dst" || tok.size() != 3) throw ParseError(line_no, "expected header 'dst <n_nodes> <n_edges>'");
      declared_nodes = parse_count(tok[1], line_no);
      declared_edges = parse_count(tok[2], line_no);
      continue;
    }
    if (kw == "node") {
      if (tok.size() != 2) throw ParseError(line_no, "expected 'node <id>'");
      nodes.push_back(tok[1]);
      node_lines.push_back(line_no);
    } else if (kw == "root") {
      if (tok.size() != 2) throw ParseError(line_no, "expected 'root <id>'");
      if (root) throw ParseError(line_no, "root declared twice");
      root = {tok[1], line_no};
    } else if (kw == "terminal") {
      if (tok.size() != 2) throw ParseError(line_no, "expected 'terminal <id>'");
      terminals.emplace_back(tok[1], line_no);
    } else if (kw == "edge") {
      if (tok.size() != 4) throw ParseError(line_no, "expected 'edge <tail> <head> <cost>'");
      Rational c;
      try {
        c = parse_rational(tok[3]);
      } catch (const std::invalid_argument& ex) {
        throw ParseError(line_no, ex.what());
      }
      edges.push_back({tok[1], tok[2], c, line_no});
    } else {
      throw ParseError(line_no, "unknown keyword '" + kw + "'");
    }
  }
  if (declared_nodes < 0) throw ParseError(line_no, "missing 'dst' header");
  if (static_cast<long>(nodes.size()) != declared_nodes)
    throw ParseError(line_no, "header declares " + std::to_string(declared_nodes) + " nodes, found " +
                                  std::to_string(nodes.size()));
  if (static_cast<long>(edges.size()) != declared_edges)
    throw ParseError(line_no, "header declares " + std::to_string(declared_edges) + " edges, found " +
                                  std::to_string(edges.size()));
  if (!root) throw ParseError(line_no, "missing 'root' line");

  std::unordered_map<std::string, NodeId> ids;
  for (std::size_t i = 0; i < nodes.size(); ++i)
    if (!ids.emplace(nodes[i], static_cast<NodeId>(i)).second)
      throw InstanceError("line " + std::to_string(node_lines[i]) + ": duplicate node '" + nodes[i] + "'");
  auto resolve = [&](const std::string& name, int line) {
    auto it = ids.find(name);
    if (it == ids.end()) throw InstanceError("line " + std::to_string(line) + ": unknown node '" + name + "'");
    return it->second;
  };

  std::vector<Edge> resolved;
  resolved.reserve(edges.size());
  for (auto& e : edges) {
    if (e.cost < 0)
      throw InstanceError("line " + std::to_string(e.line) + ": negative cost " + to_string(e.cost));
    resolved.push_back({resolve(e.tail, e.line), resolve(e.head, e.line), e.cost});
  }
  std::vector<NodeId> term_ids;
  for (auto& [name, line] : terminals) term_ids.push_back(resolve(name, line));
  NodeId r = resolve(root->first, root->second);
  return DstInstance(std::move(nodes), std::move(resolved), r, std::move(term_ids));
}

DstInstance read_instance_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_instance(buf.str());
}

std::string write_instance(const DstInstance& inst) {
  std::ostringstream out;
  out << "dst " << inst.num_nodes() << ' ' << inst.num_edges() << '\n';
  for (NodeId v = 0; v < inst.num_nodes(); ++v) out << "node " << inst.name(v) << '\n';
  out << "root " << inst.name(inst.root()) << '\n';
  for (NodeId s : inst.terminals()) out << "terminal " << inst.name(s) << '\n';
  for (const Edge& e : inst.edges())
    out << "edge " << inst.name(e.tail) << ' ' << inst.name(e.head) << ' ' << to_string(e.cost) << '\n';
  return out.str();
}

// ---------------------------------------------------------------------------
// Metric closure

namespace {

void dijkstra_from(const DstInstance& inst, NodeId src, std::optional<Rational>* dist, EdgeId* parent) {
  using Item = std::pair<Rational, NodeId>;
  auto cmp = [](const Item& a, const Item& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second > b.second;
  };
  std::priority_queue<Item, std::vector<Item>, decltype(cmp)> heap(cmp);
  const int n = inst.num_nodes();
  std::vector<char> done(n, 0);
  dist[src] = Rational(0);
  heap.emplace(Rational(0), src);
  while (!heap.empty()) {
    auto [d, u] = heap.top();
    heap.pop();
    if (done[u]) continue;
    done[u] = 1;
    for (EdgeId e : inst.out_edges(u)) {
      NodeId w = inst.edge(e).head;
      Rational nd = d + inst.edge(e).cost;
      if (!dist[w] || nd < *dist[w]) {
        dist[w] = nd;
        parent[w] = e;
        heap.emplace(nd, w);
      }
    }
  }
}

}  // namespace

MetricClosure metric_closure(const DstInstance& inst) {
  const int n = inst.num_nodes();
  std::vector<std::optional<Rational>> dist(static_cast<std::size_t>(n) * n);
  std::vector<EdgeId> parent(static_cast<std::size_t>(n) * n, -1);
#pragma omp parallel for schedule(dynamic)
  for (NodeId u = 0; u < n; ++u)
    dijkstra_from(inst, u, dist.data() + static_cast<std::size_t>(u) * n,
                  parent.data() + static_cast<std::size_t>(u) * n);
  return MetricClosure(n, std::move(dist), std::move(parent));
}

MetricClosure metric_closure_serial(const DstInstance& inst) {
  const int n = inst.num_nodes();
  std::vector<std::optional<Rational>> dist(static_cast<std::size_t>(n) * n);
  std::vector<EdgeId> parent(static_cast<std::size_t>(n) * n, -1);
  for (NodeId u = 0; u < n; ++u)
    dijkstra_from(inst, u, dist.data() + static_cast<std::size_t>(u) * n,
                  parent.data() + static_cast<std::size_t>(u) * n);
  return MetricClosure(n, std::move(dist), std::move(parent));
}

std::vector<EdgeId> MetricClosure::witness(const DstInstance& inst, NodeId u, NodeId v) const {
  if (!reachable(u, v))
    throw InstanceError("no path " + inst.name(u) + " -> " + inst.name(v));
  std::vector<EdgeId> path;
  for (NodeId w = v; w != u;) {
    EdgeId e = parent_[u * n_ + w];
    path.push_back(e);
    w = inst.edge(e).tail;
  }
  std::reverse(path.begin(), path.end());
  return path;
}

// ---------------------------------------------------------------------------
// Layered instances

LayeredInstance::LayeredInstance(DstInstance graph, DstInstance original, int ell,
                                 std::vector<int> level_of, std::vector<NodeId> origin,
                                 std::vector<std::vector<EdgeId>> edge_origin)
    : graph_(std::move(graph)),
      original_(std::move(original)),
      ell_(ell),
      level_of_(std::move(level_of)),
      origin_(std::move(origin)),
      edge_origin_(std::move(edge_origin)) {
  if (ell_ < 1) throw InstanceError("layered instance needs ell >= 1");
  const int n = graph_.num_nodes();
  if (static_cast<int>(level_of_.size()) != n || static_cast<int>(origin_.size()) != n ||
      static_cast<int>(edge_origin_.size()) != graph_.num_edges())
    throw InstanceError("layered instance metadata has the wrong size");
  levels_.assign(ell_ + 1, {});
  for (NodeId v = 0; v < n; ++v) {
    if (level_of_[v] < 0 || level_of_[v] > ell_) throw InstanceError("node level out of range");
    levels_[level_of_[v]].push_back(v);
  }
  if (level_of_[graph_.root()] != 0 || levels_[0].size() != 1)
    throw InstanceError("level 0 must contain exactly the root");
  for (const Edge& e : graph_.edges())
    if (level_of_[e.head] != level_of_[e.tail] + 1)
      throw InstanceError("edge " + graph_.name(e.tail) + "->" + graph_.name(e.head) +
                          " does not join consecutive levels");
  std::vector<NodeId> last = levels_[ell_];
  std::vector<NodeId> terms(graph_.terminals().begin(), graph_.terminals().end());
  std::sort(last.begin(), last.end());
  std::sort(terms.begin(), terms.end());
  if (last != terms) throw InstanceError("level ell must equal the terminal set");
}

LayeredInstance LayeredInstance::from_layered(DstInstance graph) {
  const int n = graph.num_nodes();
  std::vector<int> level(n, -1);
  std::queue<NodeId> q;
  level[graph.root()] = 0;
  q.push(graph.root());
  while (!q.empty()) {
    NodeId u = q.front();
    q.pop();
    for (EdgeId e : graph.out_edges(u)) {
      NodeId w = graph.edge(e).head;
      if (level[w] < 0) {
        level[w] = level[u] + 1;
        q.push(w);
      }
    }
  }
  for (NodeId v = 0; v < n; ++v)
    if (level[v] < 0) throw InstanceError("node '" + graph.name(v) + "' is unreachable; cannot assign a level");
  int ell = 0;
  for (NodeId s : graph.terminals()) ell = std::max(ell, level[s]);
  std::vector<NodeId> origin(n);
  for (NodeId v = 0; v < n; ++v) origin[v] = v;
  std::vector<std::vector<EdgeId>> edge_origin(graph.num_edges());
  for (EdgeId e = 0; e < graph.num_edges(); ++e) edge_origin[e] = {e};
  DstInstance original = graph;
  return LayeredInstance(std::move(graph), std::move(original), ell, std::move(level), std::move(origin),
                         std::move(edge_origin));
}

LayeredInstance levelize(const DstInstance& inst, int ell, const LevelizeOptions& opts) {
  if (ell < 1) throw InstanceError("levelize needs ell >= 1, got " + std::to_string(ell));
  const MetricClosure closure = metric_closure(inst);
  const int n = inst.num_nodes();
  const NodeId r = inst.root();

  // copy_id[j][v] = layered node for original v at level j, or -1.
  std::vector<std::vector<NodeId>> copy_id(ell + 1, std::vector<NodeId>(n, -1));
  std::vector<std::string> names;
  std::vector<int> level_of;
  std::vector<NodeId> origin;
  auto add_node = [&](NodeId v, int j) {
    copy_id[j][v] = static_cast<NodeId>(names.size());
    names.push_back(inst.name(v) + "@" + std::to_string(j));
    level_of.push_back(j);
    origin.push_back(v);
  };
  add_node(r, 0);
  for (int j = 1; j < ell; ++j)
    for (NodeId v = 0; v < n; ++v)
      if (v != r) add_node(v, j);
  for (NodeId s : inst.terminals()) add_node(s, ell);

  std::vector<Edge> edges;
  std::vector<std::vector<EdgeId>> edge_origin;
  for (int j = 1; j <= ell; ++j) {
    for (NodeId u = 0; u < n; ++u) {
      NodeId lu = copy_id[j - 1][u];
      if (lu < 0) continue;
      for (NodeId v = 0; v < n; ++v) {
        NodeId lv = copy_id[j][v];
        if (lv < 0) continue;
        if (u == v) {
          edges.push_back({lu, lv, Rational(0)});
          edge_origin.emplace_back();
        } else if (closure.reachable(u, v)) {
          edges.push_back({lu, lv, *closure.cost(u, v)});
          edge_origin.push_back(closure.witness(inst, u, v));
        }
      }
    }
  }

  std::vector<NodeId> terminals;
  for (NodeId s : inst.terminals()) terminals.push_back(copy_id[ell][s]);

  if (opts.prune) {
    const int ln = static_cast<int>(names.size());
    std::vector<std::vector<int>> out(ln), in(ln);
    for (int e = 0; e < static_cast<int>(edges.size()); ++e) {
      out[edges[e].tail].push_back(e);
      in[edges[e].head].push_back(e);
    }
    std::vector<char> fwd(ln, 0), bwd(ln, 0);
    std::vector<NodeId> stack{copy_id[0][r]};
    fwd[copy_id[0][r]] = 1;
    while (!stack.empty()) {
      NodeId u = stack.back();
      stack.pop_back();
      for (int e : out[u])
        if (!fwd[edges[e].head]) fwd[edges[e].head] = 1, stack.push_back(edges[e].head);
    }
    for (NodeId s : terminals) bwd[s] = 1, stack.push_back(s);
    while (!stack.empty()) {
      NodeId u = stack.back();
      stack.pop_back();
      for (int e : in[u])
        if (!bwd[edges[e].tail]) bwd[edges[e].tail] = 1, stack.push_back(edges[e].tail);
    }
    std::vector<NodeId> remap(ln, -1);
    std::vector<std::string> kept_names;
    std::vector<int> kept_level;
    std::vector<NodeId> kept_origin;
    for (NodeId v = 0; v < ln; ++v) {
      if (!(fwd[v] && bwd[v])) continue;
      remap[v] = static_cast<NodeId>(kept_names.size());
      kept_names.push_back(names[v]);
      kept_level.push_back(level_of[v]);
      kept_origin.push_back(origin[v]);
    }
    std::vector<Edge> kept_edges;
    std::vector<std::vector<EdgeId>> kept_edge_origin;
    for (std::size_t e = 0; e < edges.size(); ++e) {
      NodeId a = remap[edges[e].tail], b = remap[edges[e].head];
      if (a < 0 || b < 0) continue;
      kept_edges.push_back({a, b, edges[e].cost});
      kept_edge_origin.push_back(edge_origin[e]);
    }
    for (NodeId& s : terminals) s = remap[s];
    DstInstance graph(std::move(kept_names), std::move(kept_edges), remap[copy_id[0][r]], terminals);
    return LayeredInstance(std::move(graph), inst, ell, std::move(kept_level), std::move(kept_origin),
                           std::move(kept_edge_origin));
  }

  DstInstance graph(std::move(names), std::move(edges), copy_id[0][r], std::move(terminals));
  return LayeredInstance(std::move(graph), inst, ell, std::move(level_of), std::move(origin),
                         std::move(edge_origin));
}

MappedSolution map_back(std::span<const EdgeId> layered_solution, const LayeredInstance& li) {
  if (!connects_all_terminals(li.graph(), layered_solution))
    throw InstanceError("layered solution does not connect every terminal to the root");
  std::vector<EdgeId> out;
  for (EdgeId e : layered_solution)
    for (EdgeId o : li.edge_origin(e)) out.push_back(o);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  Rational cost = li.original().cost_of(out);
  return {std::move(out), std::move(cost)};
}

PathRecord shortest_path(const LayeredInstance& li, NodeId terminal) {
  const DstInstance& g = li.graph();
  if (terminal < 0 || terminal >= g.num_nodes() || !g.is_terminal(terminal))
    throw InstanceError("shortest_path target is not a terminal");
  const int n = g.num_nodes();
  std::vector<std::optional<Rational>> dist(n);
  std::vector<EdgeId> parent(n, -1);
  dist[g.root()] = Rational(0);
  for (int j = 0; j < li.ell(); ++j) {
    for (NodeId u : li.nodes_at_level(j)) {
      if (!dist[u]) continue;
      for (EdgeId e : g.out_edges(u)) {
        NodeId w = g.edge(e).head;
        Rational nd = *dist[u] + g.edge(e).cost;
        if (!dist[w] || nd < *dist[w]) {
          dist[w] = nd;
          parent[w] = e;
        }
      }
    }
  }
  if (!dist[terminal]) throw InstanceError("terminal '" + g.name(terminal) + "' is unreachable");
  std::vector<EdgeId> path;
  for (NodeId w = terminal; w != g.root(); w = g.edge(parent[w]).tail) path.push_back(parent[w]);
  std::reverse(path.begin(), path.end());
  return make_path(g, std::move(path));
}

}  // namespace dstlift
