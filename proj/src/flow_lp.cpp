#include "dstlift/flow_lp.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace dstlift {

const char* row_kind_name(RowKind k) {
  switch (k) {
    case RowKind::conservation: return "conservation";
    case RowKind::capacity: return "capacity";
    case RowKind::indegree: return "indegree";
    case RowKind::lower_bound: return "lower";
    case RowKind::upper_bound: return "upper";
    case RowKind::other: return "other";
  }
  return "other";
}

RowKind row_kind_from_name(std::string_view name) {
  if (name == "conservation") return RowKind::conservation;
  if (name == "capacity") return RowKind::capacity;
  if (name == "indegree") return RowKind::indegree;
  if (name == "lower") return RowKind::lower_bound;
  if (name == "upper") return RowKind::upper_bound;
  if (name == "other") return RowKind::other;
  throw std::invalid_argument("unknown row kind '" + std::string(name) + "'");
}

const char* lp_status_name(LpStatus s) {
  switch (s) {
    case LpStatus::optimal: return "optimal";
    case LpStatus::infeasible: return "infeasible";
    case LpStatus::unbounded: return "unbounded";
  }
  return "?";
}

VarIndex decode_var(int num_edges, int ordinal) {
  if (ordinal < num_edges) return {VarIndex::Kind::edge, -1, ordinal, ordinal};
  int k = ordinal - num_edges;
  return {VarIndex::Kind::flow, k / num_edges, k % num_edges, ordinal};
}

ConstraintSystem build_flow_lp(const LayeredInstance& li) { return build_flow_lp(li.graph()); }

ConstraintSystem build_flow_lp(const DstInstance& g) {
  const int m = g.num_edges();
  const int k = g.num_terminals();
  ConstraintSystem cs;
  cs.num_vars = m * (1 + k);
  cs.objective.assign(cs.num_vars, Rational(0));
  auto edge_name = [&](EdgeId e) { return g.name(g.edge(e).tail) + "->" + g.name(g.edge(e).head); };
  for (EdgeId e = 0; e < m; ++e) {
    cs.objective[edge_var(e)] = g.edge(e).cost;
    cs.var_names.push_back("y[" + edge_name(e) + "]");
  }
  for (int s = 0; s < k; ++s)
    for (EdgeId e = 0; e < m; ++e)
      cs.var_names.push_back("f[" + g.name(g.terminals()[s]) + "," + edge_name(e) + "]");

  auto add_equality = [&](std::vector<std::pair<int, Rational>> terms, const Rational& rhs, RowKind kind,
                          const std::string& label) {
    if (terms.empty() && rhs == 0) return;
    std::sort(terms.begin(), terms.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    LinearRow plus{terms, rhs, kind, -1, label + "+"};
    LinearRow minus{terms, -rhs, kind, -1, label + "-"};
    for (auto& [var, coef] : minus.terms) coef = -coef;
    int i = static_cast<int>(cs.rows.size());
    plus.pair = i + 1;
    minus.pair = i;
    cs.rows.push_back(std::move(plus));
    cs.rows.push_back(std::move(minus));
  };

  for (int s = 0; s < k; ++s) {
    const NodeId term = g.terminals()[s];
    for (NodeId v = 0; v < g.num_nodes(); ++v) {
      std::vector<std::pair<int, Rational>> terms;
      for (EdgeId e : g.out_edges(v)) terms.emplace_back(flow_var(m, s, e), Rational(1));
      for (EdgeId e : g.in_edges(v)) terms.emplace_back(flow_var(m, s, e), Rational(-1));
      Rational rhs = v == g.root() ? Rational(1) : (v == term ? Rational(-1) : Rational(0));
      add_equality(std::move(terms), rhs, RowKind::conservation, "cons[" + g.name(term) + "," + g.name(v) + "]");
    }
  }
  for (int s = 0; s < k; ++s)
    for (EdgeId e = 0; e < m; ++e)
      cs.rows.push_back({{{edge_var(e), Rational(1)}, {flow_var(m, s, e), Rational(-1)}},
                         Rational(0),
                         RowKind::capacity,
                         -1,
                         "cap[" + g.name(g.terminals()[s]) + "," + edge_name(e) + "]"});
  for (NodeId v = 0; v < g.num_nodes(); ++v) {
    if (g.in_edges(v).empty()) continue;
    LinearRow row{{}, Rational(-1), RowKind::indegree, -1, "indeg[" + g.name(v) + "]"};
    for (EdgeId e : g.in_edges(v)) row.terms.emplace_back(edge_var(e), Rational(-1));
    std::sort(row.terms.begin(), row.terms.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    cs.rows.push_back(std::move(row));
  }
  for (int j = 0; j < cs.num_vars; ++j) {
    cs.rows.push_back({{{j, Rational(1)}}, Rational(0), RowKind::lower_bound, -1, "lb[" + cs.var_names[j] + "]"});
    cs.rows.push_back({{{j, Rational(-1)}}, Rational(-1), RowKind::upper_bound, -1, "ub[" + cs.var_names[j] + "]"});
  }
  return cs;
}

// ---------------------------------------------------------------------------
// Exact simplex

std::vector<int> integral_point_support(const DstInstance& g, std::span<const EdgeId> arborescence) {
  const int m = g.num_edges();
  std::vector<EdgeId> parent(g.num_nodes(), -1);
  std::vector<int> out;
  for (EdgeId e : arborescence) {
    if (e < 0 || e >= m) throw std::out_of_range("unknown edge id " + std::to_string(e));
    NodeId h = g.edge(e).head;
    if (parent[h] == e) continue;
    if (parent[h] >= 0 || h == g.root())
      throw InstanceError("edge set is not an arborescence at node '" + g.name(h) + "'");
    parent[h] = e;
    out.push_back(edge_var(e));
  }
  for (int s = 0; s < g.num_terminals(); ++s) {
    NodeId v = g.terminals()[s];
    int steps = 0;
    while (v != g.root()) {
      if (parent[v] < 0 || ++steps > g.num_nodes())
        throw InstanceError("edge set does not reach terminal '" + g.name(g.terminals()[s]) + "'");
      out.push_back(flow_var(m, s, parent[v]));
      v = g.edge(parent[v]).tail;
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

/// Dense tableau over x >= 0, with one slack per row and artificials where needed.
class Tableau {
 public:
  Tableau(const ConstraintSystem& cs, std::span<const LinearRow> extra) : n_(cs.num_vars) {
    std::vector<const LinearRow*> rows;
    for (const auto& r : cs.rows) rows.push_back(&r);
    for (const auto& r : extra) rows.push_back(&r);
    m_ = static_cast<int>(rows.size());
    int n_art = 0;
    for (auto* r : rows)
      if (r->rhs > 0) ++n_art;
    art_begin_ = n_ + m_;
    cols_ = n_ + m_ + n_art;
    t_.assign(m_, std::vector<Rational>(cols_ + 1, Rational(0)));
    basis_.assign(m_, -1);
    int next_art = art_begin_;
    for (int i = 0; i < m_; ++i) {
      const LinearRow& r = *rows[i];
      auto& row = t_[i];
      if (r.rhs > 0) {
        // a x - s + art = b
        for (auto& [j, a] : r.terms) row[j] += a;
        row[n_ + i] = -1;
        row[next_art] = 1;
        row[cols_] = r.rhs;
        basis_[i] = next_art++;
      } else {
        // -a x + s = -b
        for (auto& [j, a] : r.terms) row[j] -= a;
        row[n_ + i] = 1;
        row[cols_] = -r.rhs;
        basis_[i] = n_ + i;
      }
    }
  }

  /// Phase 1; returns false when infeasible.
  bool phase1() {
    if (art_begin_ == cols_) return true;
    std::vector<Rational> cost(cols_, Rational(0));
    for (int j = art_begin_; j < cols_; ++j) cost[j] = 1;
    set_objective(cost);
    run(/*allow_artificial=*/true);
    if (obj_[cols_] != 0) return false;  // obj_[cols_] holds -value
    // Drive zero-level artificials out of the basis; drop redundant rows.
    for (int i = 0; i < m_; ++i) {
      if (basis_[i] < art_begin_) continue;
      int j = 0;
      while (j < art_begin_ && t_[i][j] == 0) ++j;
      if (j < art_begin_) {
        pivot(i, j);
      } else {
        t_.erase(t_.begin() + i);
        basis_.erase(basis_.begin() + i);
        --m_;
        --i;
      }
    }
    return true;
  }

  /// Phase 2 on the structural objective; returns false when unbounded.
  bool phase2(std::span<const Rational> c) {
    std::vector<Rational> cost(cols_, Rational(0));
    for (int j = 0; j < n_; ++j) cost[j] = c[j];
    set_objective(cost);
    return run(/*allow_artificial=*/false);
  }

  std::vector<Rational> values() const {
    std::vector<Rational> x(n_, Rational(0));
    for (int i = 0; i < m_; ++i)
      if (basis_[i] < n_) x[basis_[i]] = t_[i][cols_];
    return x;
  }

  long pivots() const { return pivots_; }

 private:
  void set_objective(const std::vector<Rational>& cost) {
    obj_.assign(cols_ + 1, Rational(0));
    for (int j = 0; j < cols_; ++j) obj_[j] = cost[j];
    for (int i = 0; i < m_; ++i) {
      const Rational& cb = cost[basis_[i]];
      if (cb == 0) continue;
      for (int j = 0; j <= cols_; ++j)
        if (t_[i][j] != 0) obj_[j] -= cb * t_[i][j];
    }
  }

  bool run(bool allow_artificial) {
    const int limit = allow_artificial ? cols_ : art_begin_;
    for (;;) {
      int enter = -1;
      for (int j = 0; j < limit; ++j)
        if (obj_[j] < 0) {
          enter = j;
          break;
        }
      if (enter < 0) return true;
      int leave = -1;
      Rational best;
      for (int i = 0; i < m_; ++i) {
        if (t_[i][enter] <= 0) continue;
        Rational ratio = t_[i][cols_] / t_[i][enter];
        if (leave < 0 || ratio < best || (ratio == best && basis_[i] < basis_[leave])) {
          leave = i;
          best = ratio;
        }
      }
      if (leave < 0) return false;
      pivot(leave, enter);
    }
  }

  void pivot(int r, int c) {
    ++pivots_;
    auto& prow = t_[r];
    Rational p = prow[c];
    std::vector<int> nz;
    for (int j = 0; j <= cols_; ++j)
      if (prow[j] != 0) {
        prow[j] /= p;
        nz.push_back(j);
      }
    auto eliminate = [&](std::vector<Rational>& row) {
      if (row[c] == 0) return;
      Rational f = row[c];
      for (int j : nz) row[j] -= f * prow[j];
    };
    for (int i = 0; i < m_; ++i)
      if (i != r) eliminate(t_[i]);
    eliminate(obj_);
    basis_[r] = c;
  }

  int n_, m_, art_begin_, cols_;
  std::vector<std::vector<Rational>> t_;
  std::vector<Rational> obj_;
  std::vector<int> basis_;
  long pivots_ = 0;
};

}  // namespace

LpSolution solve_lp(const ConstraintSystem& cs) { return solve_lp(cs, cs.objective); }

LpSolution solve_lp(const ConstraintSystem& cs, std::span<const Rational> objective) {
  if (static_cast<int>(objective.size()) != cs.num_vars)
    throw std::invalid_argument("objective dimension does not match the constraint system");
  Tableau tab(cs, {});
  LpSolution sol;
  if (!tab.phase1()) {
    sol.status = LpStatus::infeasible;
    sol.pivots = tab.pivots();
    return sol;
  }
  if (!tab.phase2(objective)) {
    sol.status = LpStatus::unbounded;
    sol.pivots = tab.pivots();
    return sol;
  }
  sol.status = LpStatus::optimal;
  sol.values = tab.values();
  sol.objective = 0;
  for (int j = 0; j < cs.num_vars; ++j) sol.objective += objective[j] * sol.values[j];
  sol.pivots = tab.pivots();
  return sol;
}

bool feasible_with_ones(const ConstraintSystem& cs, std::span<const int> ones) {
  std::vector<LinearRow> extra;
  for (int i : ones) extra.push_back({{{i, Rational(1)}}, Rational(1), RowKind::other, -1, "fix"});
  Tableau tab(cs, extra);
  return tab.phase1();
}

std::vector<RowViolation> check_point(const ConstraintSystem& cs, std::span<const Rational> x) {
  if (static_cast<int>(x.size()) != cs.num_vars)
    throw std::invalid_argument("point has dimension " + std::to_string(x.size()) + ", system has " +
                                std::to_string(cs.num_vars) + " variables");
  std::vector<RowViolation> out;
  for (int i = 0; i < static_cast<int>(cs.rows.size()); ++i) {
    Rational lhs = 0;
    for (auto& [j, a] : cs.rows[i].terms) lhs += a * x[j];
    Rational slack = lhs - cs.rows[i].rhs;
    if (slack < 0) out.push_back({i, slack});
  }
  return out;
}

// ---------------------------------------------------------------------------
// lp-dump

std::string write_lp_dump(const ConstraintSystem& cs) {
  std::ostringstream out;
  out << "lpdump " << cs.num_vars << ' ' << cs.rows.size() << '\n';
  for (int j = 0; j < static_cast<int>(cs.var_names.size()); ++j) out << "var " << j << ' ' << cs.var_names[j] << '\n';
  out << "objective";
  for (int j = 0; j < cs.num_vars; ++j)
    if (cs.objective[j] != 0) out << ' ' << j << ':' << to_string(cs.objective[j]);
  out << '\n';
  for (const auto& r : cs.rows) {
    out << "row " << row_kind_name(r.kind) << ' ';
    if (r.pair >= 0)
      out << r.pair;
    else
      out << '-';
    out << ' ' << to_string(r.rhs);
    for (auto& [j, a] : r.terms) out << ' ' << j << ':' << to_string(a);
    out << '\n';
  }
  return out.str();
}

ConstraintSystem parse_lp_dump(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  ConstraintSystem cs;
  long declared_rows = -1;
  auto fail = [&](const std::string& msg) -> void {
    throw std::runtime_error("lpdump line " + std::to_string(line_no) + ": " + msg);
  };
  auto parse_term = [&](const std::string& tok) {
    auto colon = tok.find(':');
    if (colon == std::string::npos) fail("expected <index>:<coef>, got '" + tok + "'");
    int j = 0;
    try {
      j = std::stoi(tok.substr(0, colon));
    } catch (const std::exception&) {
      fail("bad variable index in '" + tok + "'");
    }
    if (j < 0 || j >= cs.num_vars) fail("variable index out of range in '" + tok + "'");
    return std::pair<int, Rational>{j, parse_rational(tok.substr(colon + 1))};
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (auto h = line.find('#'); h != std::string::npos) line.resize(h);
    std::istringstream ls(line);
    std::string kw;
    if (!(ls >> kw)) continue;
    try {
      if (declared_rows < 0) {
        if (kw != "lpdump" || !(ls >> cs.num_vars >> declared_rows) || cs.num_vars < 0 || declared_rows < 0)
          fail("expected header 'lpdump <num_vars> <num_rows>'");
        cs.objective.assign(cs.num_vars, Rational(0));
        continue;
      }
      if (kw == "var") {
        int j;
        std::string name;
        if (!(ls >> j >> name) || j != static_cast<int>(cs.var_names.size())) fail("variables must be listed in order");
        cs.var_names.push_back(name);
      } else if (kw == "objective") {
        std::string tok;
        while (ls >> tok) {
          auto [j, c] = parse_term(tok);
          cs.objective[j] = c;
        }
      } else if (kw == "row") {
        std::string kind, pair, rhs, tok;
        if (!(ls >> kind >> pair >> rhs)) fail("expected 'row <kind> <pair> <rhs> ...'");
        LinearRow r;
        r.kind = row_kind_from_name(kind);
        r.pair = pair == "-" ? -1 : std::stoi(pair);
        r.rhs = parse_rational(rhs);
        while (ls >> tok) r.terms.push_back(parse_term(tok));
        std::sort(r.terms.begin(), r.terms.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
        cs.rows.push_back(std::move(r));
      } else {
        fail("unknown keyword '" + kw + "'");
      }
    } catch (const std::invalid_argument& ex) {
      fail(ex.what());
    }
  }
  if (declared_rows < 0) throw std::runtime_error("lpdump: missing header");
  if (static_cast<long>(cs.rows.size()) != declared_rows) throw std::runtime_error("lpdump: row count mismatch");
  if (!cs.var_names.empty() && static_cast<int>(cs.var_names.size()) != cs.num_vars)
    throw std::runtime_error("lpdump: variable name count mismatch");
  for (int i = 0; i < static_cast<int>(cs.rows.size()); ++i) {
    int p = cs.rows[i].pair;
    if (p >= static_cast<int>(cs.rows.size()) || (p >= 0 && cs.rows[p].pair != i))
      throw std::runtime_error("lpdump: inconsistent equality pair on row " + std::to_string(i));
  }
  return cs;
}

}  // namespace dstlift
