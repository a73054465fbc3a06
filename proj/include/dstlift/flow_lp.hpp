#pragma once

#include "dstlift/instance.hpp"
#include "dstlift/rational.hpp"

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace dstlift {

enum class RowKind { conservation, capacity, indegree, lower_bound, upper_bound, other };

const char* row_kind_name(RowKind k);
RowKind row_kind_from_name(std::string_view name);

/// One inequality a^T x >= rhs with a sparse coefficient list sorted by variable.
struct LinearRow {
  std::vector<std::pair<int, Rational>> terms;
  Rational rhs;
  RowKind kind = RowKind::other;
  /// Index of the opposite half when this row is one side of a split equality, else -1.
  int pair = -1;
  std::string label;
};

/// K = { x : a_i^T x >= b_i for every row }, objective min c^T x.
/// Equalities are stored as two opposite rows linked through `pair`, and every
/// variable carries explicit rows 0 <= x_j <= 1.
struct ConstraintSystem {
  int num_vars = 0;
  std::vector<LinearRow> rows;
  std::vector<Rational> objective;
  std::vector<std::string> var_names;
};

/// Variable ordinals of the flow LP: edge variables y_e come first in edge
/// order (ordinal e), then flow variables f_{s,e} in (terminal position, edge)
/// order (ordinal |E| + s*|E| + e). Moment files depend on this numbering.
struct VarIndex {
  enum class Kind { edge, flow };
  Kind kind;
  int terminal = -1;  // position in terminals(), flow variables only
  EdgeId edge;
  int ordinal;
};

inline int edge_var(EdgeId e) { return e; }
inline int flow_var(int num_edges, int terminal_pos, EdgeId e) {
  return num_edges + terminal_pos * num_edges + e;
}
VarIndex decode_var(int num_edges, int ordinal);

/// Flow LP of a layered instance: per-terminal unit flow conservation (split into
/// two rows), capacities f_{s,e} <= y_e, in-degree y(δ⁻(v)) <= 1, box bounds,
/// objective Σ c_e y_e. Rows with no terms and a satisfied right-hand side are omitted.
ConstraintSystem build_flow_lp(const LayeredInstance& li);
/// Same LP over an arbitrary instance graph.
ConstraintSystem build_flow_lp(const DstInstance& inst);

/// Ordinals set to 1 by the 0/1 point of an arborescence: its edge variables
/// and, per terminal, the flow variables along the root-terminal path. Throws
/// InstanceError unless `arborescence` has in-degree <= 1 everywhere and
/// reaches every terminal.
std::vector<int> integral_point_support(const DstInstance& g, std::span<const EdgeId> arborescence);

enum class LpStatus { optimal, infeasible, unbounded };
const char* lp_status_name(LpStatus s);

struct LpSolution {
  LpStatus status = LpStatus::infeasible;
  std::vector<Rational> values;
  Rational objective;
  long pivots = 0;
};

/// Exact two-phase dense tableau simplex with Bland's rule.
LpSolution solve_lp(const ConstraintSystem& cs);
/// Same feasible region, different objective (min objective^T x).
LpSolution solve_lp(const ConstraintSystem& cs, std::span<const Rational> objective);
/// Feasibility of K intersected with {x_i = 1 for i in ones}.
bool feasible_with_ones(const ConstraintSystem& cs, std::span<const int> ones);

struct RowViolation {
  int row;
  Rational slack;  // a^T x - rhs, negative
};

/// Every violated row with its slack; empty iff x lies in K. Throws
/// std::invalid_argument on dimension mismatch.
std::vector<RowViolation> check_point(const ConstraintSystem& cs, std::span<const Rational> x);

/// Text dump, one constraint per line:
///   lpdump <num_vars> <num_rows>
///   var <ordinal> <name>            (optional, one per variable)
///   objective <i>:<c> ...
///   row <kind> <pair|-> <rhs> <i>:<a> ...
std::string write_lp_dump(const ConstraintSystem& cs);
ConstraintSystem parse_lp_dump(std::string_view text);

}  // namespace dstlift
