#pragma once

#include "dstlift/instance.hpp"
#include "dstlift/rational.hpp"

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace dstlift {

/// A guard (terminal count, path count, solution count) would be exceeded.
class CapExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kMaxExactTerminals = 16;

struct ExactResult {
  Rational opt_cost;
  std::vector<EdgeId> witness;  // sorted, deduplicated
  std::size_t dp_states = 0;    // finite (subset, node) entries
  std::size_t relaxations = 0;  // edge relaxations in the shortest-path phase
};

/// Minimum-cost arborescence from the root to every terminal, by dynamic
/// programming over (node, terminal subset) with subset splits and Dijkstra
/// relaxation. Works on any directed graph. Throws CapExceeded for more than
/// kMaxExactTerminals terminals.
ExactResult exact_opt(const DstInstance& inst);

struct Verification {
  bool feasible = false;
  Rational cost;  // over the deduplicated set
};

/// Throws std::out_of_range for an unknown edge id.
Verification verify_solution(const DstInstance& inst, std::span<const EdgeId> edges);

struct PathTarget {
  enum class Kind { node, edge };
  Kind kind = Kind::node;
  int id = -1;

  static PathTarget node(NodeId v) { return {Kind::node, v}; }
  static PathTarget edge(EdgeId e) { return {Kind::edge, e}; }
};

inline constexpr std::size_t kDefaultPathCap = 100'000;

/// Q(v): all root-v paths, or Q(e): root paths whose last edge is e. A terminal
/// target is a node target. Paths come in lexicographic order of edge ids.
/// Throws CapExceeded when more than `cap` paths exist.
std::vector<PathRecord> enumerate_paths(const LayeredInstance& li, PathTarget target,
                                        std::size_t cap = kDefaultPathCap);

struct IntegralSolution {
  std::vector<EdgeId> edges;  // sorted
  Rational cost;
};

inline constexpr std::size_t kDefaultSolutionCap = 100'000;

/// Every inclusion-minimal feasible edge set, i.e. every arborescence rooted at
/// r whose leaves are all terminals. Sorted by (cost, edges).
std::vector<IntegralSolution> enumerate_integral_solutions(const LayeredInstance& li,
                                                          std::size_t cap = kDefaultSolutionCap);

}  // namespace dstlift
