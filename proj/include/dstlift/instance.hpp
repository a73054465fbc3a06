#pragma once

#include "dstlift/rational.hpp"

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace dstlift {

using NodeId = int;
using EdgeId = int;

/// Raised for syntactically broken instance files. what() carries "line N: ...".
class ParseError : public std::runtime_error {
 public:
  ParseError(int line, const std::string& msg)
      : std::runtime_error("line " + std::to_string(line) + ": " + msg), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

/// Raised when an instance is well-formed text but semantically invalid.
class InstanceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Edge {
  NodeId tail;
  NodeId head;
  Rational cost;
};

/// Directed Steiner Tree instance: graph, nonnegative rational costs, root and terminals.
///
/// Construction validates everything: costs are nonnegative, self-loops are
/// rejected, parallel edges collapse to the cheapest copy (kept at the position
/// of the first occurrence), the root is not a terminal, and every terminal is
/// reachable from the root.
class DstInstance {
 public:
  DstInstance(std::vector<std::string> node_names, std::vector<Edge> edges, NodeId root,
              std::vector<NodeId> terminals);

  int num_nodes() const { return static_cast<int>(names_.size()); }
  int num_edges() const { return static_cast<int>(edges_.size()); }
  int num_terminals() const { return static_cast<int>(terminals_.size()); }

  const std::string& name(NodeId v) const { return names_.at(v); }
  std::optional<NodeId> find_node(std::string_view name) const;
  const Edge& edge(EdgeId e) const { return edges_.at(e); }
  std::span<const Edge> edges() const { return edges_; }
  NodeId root() const { return root_; }
  std::span<const NodeId> terminals() const { return terminals_; }
  bool is_terminal(NodeId v) const { return terminal_pos_[v] >= 0; }
  /// Position of v in terminals(), or -1.
  int terminal_index(NodeId v) const { return terminal_pos_[v]; }

  std::span<const EdgeId> out_edges(NodeId v) const { return out_[v]; }
  std::span<const EdgeId> in_edges(NodeId v) const { return in_[v]; }
  std::optional<EdgeId> find_edge(NodeId tail, NodeId head) const;

  /// Sum of costs over the deduplicated edge set.
  Rational cost_of(std::span<const EdgeId> edges) const;

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, NodeId> by_name_;
  std::vector<Edge> edges_;
  NodeId root_;
  std::vector<NodeId> terminals_;
  std::vector<int> terminal_pos_;
  std::vector<std::vector<EdgeId>> out_;
  std::vector<std::vector<EdgeId>> in_;
};

/// Reads the line-oriented instance format ("dst", "node", "root", "terminal", "edge").
DstInstance parse_instance(std::string_view text);
DstInstance read_instance_file(const std::string& path);
/// Writes the same format back; parse_instance(write_instance(x)) reproduces x.
std::string write_instance(const DstInstance& inst);

/// True iff every terminal is reachable from the root using only `edges`.
bool connects_all_terminals(const DstInstance& inst, std::span<const EdgeId> edges);

/// A directed walk given by consecutive edges; in a layered instance edge i runs V_{i-1} -> V_i.
struct PathRecord {
  std::vector<EdgeId> edges;
  NodeId start = -1;
  NodeId end = -1;
  Rational cost;
};

/// Builds a PathRecord, checking head(e_i) == tail(e_{i+1}). Throws InstanceError otherwise.
PathRecord make_path(const DstInstance& inst, std::vector<EdgeId> edges);

/// All-pairs shortest paths with one witness path per reachable ordered pair.
class MetricClosure {
 public:
  MetricClosure(int n, std::vector<std::optional<Rational>> dist, std::vector<EdgeId> parent)
      : n_(n), dist_(std::move(dist)), parent_(std::move(parent)) {}

  int num_nodes() const { return n_; }
  const std::optional<Rational>& cost(NodeId u, NodeId v) const { return dist_[u * n_ + v]; }
  bool reachable(NodeId u, NodeId v) const { return dist_[u * n_ + v].has_value(); }
  /// Edges of the shortest u-v path found (empty for u == v). Throws if unreachable.
  std::vector<EdgeId> witness(const DstInstance& inst, NodeId u, NodeId v) const;

 private:
  int n_;
  std::vector<std::optional<Rational>> dist_;
  std::vector<EdgeId> parent_;  // parent_[u*n+v]: last edge of the u-v path
};

/// Dijkstra from every source. Sources are processed in parallel (OpenMP).
MetricClosure metric_closure(const DstInstance& inst);
/// Single-threaded reference for metric_closure; results are identical.
MetricClosure metric_closure_serial(const DstInstance& inst);

/// ℓ-level acyclic instance with V_0 = {r}, V_ℓ = terminals and edges only
/// between consecutive levels, plus the mapping back to the graph it came from.
class LayeredInstance {
 public:
  /// Wraps a graph that is already layered (levels = BFS depth from the root).
  /// Throws InstanceError if some edge skips or repeats a level, some node is
  /// unreachable, or the deepest level is not exactly the terminal set.
  static LayeredInstance from_layered(DstInstance graph);

  LayeredInstance(DstInstance graph, DstInstance original, int ell, std::vector<int> level_of,
                  std::vector<NodeId> origin, std::vector<std::vector<EdgeId>> edge_origin);

  const DstInstance& graph() const { return graph_; }
  const DstInstance& original() const { return original_; }
  int ell() const { return ell_; }
  int level(NodeId v) const { return level_of_[v]; }
  std::span<const NodeId> nodes_at_level(int j) const { return levels_[j]; }
  /// Original node a layered node is a copy of.
  NodeId origin(NodeId v) const { return origin_[v]; }
  /// Original edges a layered edge stands for (empty for cost-0 copy edges).
  std::span<const EdgeId> edge_origin(EdgeId e) const { return edge_origin_[e]; }

 private:
  DstInstance graph_;
  DstInstance original_;
  int ell_;
  std::vector<int> level_of_;
  std::vector<std::vector<NodeId>> levels_;
  std::vector<NodeId> origin_;
  std::vector<std::vector<EdgeId>> edge_origin_;
};

struct LevelizeOptions {
  /// Drop layered edges that lie on no root-terminal path.
  bool prune = false;
};

/// ℓ+1 copies of the node set: V_0 = {r}, V_1..V_{ℓ-1} hold a copy of every
/// non-root node, V_ℓ holds the terminals. Consecutive copies of a node are
/// joined by cost-0 edges, and every finite metric-closure pair (u, v) yields
/// an edge u@j-1 -> v@j.
LayeredInstance levelize(const DstInstance& inst, int ell, const LevelizeOptions& opts = {});

struct MappedSolution {
  std::vector<EdgeId> edges;  // sorted, deduplicated, ids of the original instance
  Rational cost;
};

/// Expands a feasible layered solution into original edges (copy edges vanish,
/// closure edges become their witness paths). Throws InstanceError if the
/// layered solution does not connect every terminal.
MappedSolution map_back(std::span<const EdgeId> layered_solution, const LayeredInstance& li);

/// Cheapest root-to-`terminal` path in the layered DAG (`terminal` is a node of li.graph()).
PathRecord shortest_path(const LayeredInstance& li, NodeId terminal);

}  // namespace dstlift
