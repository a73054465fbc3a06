#include "doctest.h"
#include "support.hpp"

#include <boost/random/mersenne_twister.hpp>
#include <boost/random/uniform_int_distribution.hpp>

using namespace dstlift;
using namespace testing;

namespace {

using Q = Rational;

/// x0 + x1 <= 1 with box bounds.
ConstraintSystem packing_system() {
  ConstraintSystem cs;
  cs.num_vars = 2;
  cs.objective = {Q(1), Q(1)};
  cs.rows.push_back({{{0, Q(-1)}, {1, Q(-1)}}, Q(-1), RowKind::other, -1, "x0+x1<=1"});
  for (int j = 0; j < 2; ++j) {
    cs.rows.push_back({{{j, Q(1)}}, Q(0), RowKind::lower_bound, -1, "lb"});
    cs.rows.push_back({{{j, Q(-1)}}, Q(-1), RowKind::upper_bound, -1, "ub"});
  }
  return cs;
}

std::vector<Atom<Q>> atoms_of(std::initializer_list<std::pair<std::uint64_t, Q>> list) {
  std::vector<Atom<Q>> out;
  for (auto& [m, p] : list) out.push_back({IndexSet::from_mask(m), p});
  return out;
}

/// Random distribution over `k` distinct random 0/1 points of n variables.
std::vector<Atom<Q>> random_distribution(boost::random::mt19937_64& gen, int n, int k) {
  boost::random::uniform_int_distribution<std::uint64_t> pick(0, (1ULL << n) - 1);
  boost::random::uniform_int_distribution<int> w(1, 9);
  std::map<std::uint64_t, int> chosen;
  k = static_cast<int>(std::min<std::uint64_t>(k, 1ULL << n));
  while (static_cast<int>(chosen.size()) < k) chosen[pick(gen)] = w(gen);
  int total = 0;
  for (auto& [m, x] : chosen) total += x;
  std::vector<Atom<Q>> out;
  for (auto& [m, x] : chosen) out.push_back({IndexSet::from_mask(m), Q(x) / total});
  return out;
}

/// Mass of the atoms with I ∪ X in the support and nothing of S \ X.
Q brute_condition(const std::vector<Atom<Q>>& atoms, const IndexSet& I, const IndexSet& X, const IndexSet& S) {
  Q acc = 0;
  for (const auto& a : atoms)
    if ((I | X).subset_of(a.support) && !a.support.intersects(S - X)) acc += a.mass;
  return acc;
}

Q determinant(std::vector<std::vector<Q>> a) {
  const int n = static_cast<int>(a.size());
  Q det = 1;
  for (int c = 0; c < n; ++c) {
    int p = c;
    while (p < n && a[p][c] == 0) ++p;
    if (p == n) return 0;
    if (p != c) std::swap(a[p], a[c]), det = -det;
    det *= a[c][c];
    for (int r = c + 1; r < n; ++r) {
      Q f = a[r][c] / a[c][c];
      for (int k = c; k < n; ++k) a[r][k] -= f * a[c][k];
    }
  }
  return det;
}

/// PSD iff every principal minor is nonnegative.
bool psd_by_minors(const MomentMatrix<Q>& m) {
  const int n = m.dim();
  for (std::uint64_t mask = 1; mask < (1ULL << n); ++mask) {
    std::vector<int> idx;
    for (int i = 0; i < n; ++i)
      if ((mask >> i) & 1) idx.push_back(i);
    std::vector<std::vector<Q>> sub(idx.size(), std::vector<Q>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i)
      for (std::size_t j = 0; j < idx.size(); ++j) sub[i][j] = m(idx[i], idx[j]);
    if (determinant(sub) < 0) return false;
  }
  return true;
}

MomentMatrix<Q> dense(int n, const std::vector<Q>& values) {
  MomentMatrix<Q> m;
  m.index.resize(n);
  m.values = values;
  return m;
}

}  // namespace

TEST_CASE("moment matrix examples") {
  RationalMoments point = from_distribution(atoms_of({{0b1, Q(1)}}), 1, 0);
  MomentMatrix<Q> m1 = moment_matrix(point, 1);
  REQUIRE(m1.dim() == 2);
  CHECK(m1.values == std::vector<Q>{1, 1, 1, 1});

  RationalMoments half = from_distribution(atoms_of({{0b01, Q(1, 2)}, {0b10, Q(1, 2)}}), 2, 0);
  MomentMatrix<Q> m2 = moment_matrix(half, 1);
  REQUIRE(m2.dim() == 3);
  CHECK(m2.index[1] == IndexSet{0});
  CHECK(m2.index[2] == IndexSet{1});
  CHECK(m2(1, 2) == 0);
  CHECK(m2(1, 1) == Q(1, 2));
  CHECK(m2(0, 0) == 1);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK(m2(i, j) == m2(j, i));

  RationalMoments partial(2, 0);
  partial.set({}, Q(1));
  CHECK_THROWS_AS(moment_matrix(partial, 1), MomentError);
}

TEST_CASE("determinant identity on the {∅, I, J} submatrix") {
  RationalMoments y(2, 0);
  y.set({}, Q(1));
  y.set({0}, Q(1));
  y.set({1}, Q(1, 2));
  y.set({0, 1}, Q(1, 4));
  MomentMatrix<Q> m = moment_matrix_on(y, {IndexSet{}, IndexSet{0}, IndexSet{1}});
  std::vector<std::vector<Q>> a(3, std::vector<Q>(3));
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) a[i][j] = m(i, j);
  Q diff = y.at({1}) - y.at({0, 1});
  CHECK(determinant(a) == -diff * diff);
  CHECK(determinant(a) == Q(-1, 16));
  CHECK_FALSE(is_psd_exact(m));

  boost::random::mt19937_64 gen(5);
  for (int trial = 0; trial < 20; ++trial) {
    auto atoms = random_distribution(gen, 4, 3);
    for (auto& a2 : atoms) a2.support.insert(0);
    std::vector<Atom<Q>> fixed;
    for (auto& a2 : atoms) {
      bool found = false;
      for (auto& f : fixed)
        if (f.support == a2.support) f.mass += a2.mass, found = true;
      if (!found) fixed.push_back(a2);
    }
    RationalMoments z = from_distribution(fixed, 4, 1);
    CHECK(z.at({0}) == 1);
    CHECK(check_determinant_identity(z, 1).ok);
  }
}

TEST_CASE("shift examples") {
  RationalMoments point = from_distribution(atoms_of({{0b1, Q(1)}}), 1, 1);
  std::vector<std::pair<int, Q>> x0{{0, Q(1)}};
  RationalMoments z = shift(x0, Q(0), point);
  CHECK(z.at({}) == 1);

  RationalMoments half = from_distribution(atoms_of({{0b01, Q(1, 2)}, {0b10, Q(1, 2)}}), 2, 1);
  ConstraintSystem cs = packing_system();
  RationalMoments zp = shift(cs.rows[0], half);
  CHECK(zp.at({}) == 0);

  // z_∅ is the row slack at the singleton point
  boost::random::mt19937_64 gen(11);
  for (int trial = 0; trial < 10; ++trial) {
    RationalMoments y = from_distribution(random_distribution(gen, 2, 2), 2, 1);
    std::vector<Q> x{y.at({0}), y.at({1})};
    auto viol = check_point(cs, x);
    for (std::size_t r = 0; r < cs.rows.size(); ++r) {
      Q z0 = shift(cs.rows[r], y).at({});
      Q slack = -cs.rows[r].rhs;
      for (auto& [i, a] : cs.rows[r].terms) slack += a * x[i];
      CHECK(z0 == slack);
      bool listed = std::any_of(viol.begin(), viol.end(), [&](const RowViolation& v) { return v.row == (int)r; });
      CHECK(listed == (z0 < 0));
    }
  }
}

TEST_CASE("conditioning examples") {
  boost::random::mt19937_64 gen(3);
  RationalMoments y = from_distribution(random_distribution(gen, 3, 4), 3, 1);
  RationalMoments z = condition(y, IndexSet{}, IndexSet{0});
  CHECK(z.at({}) == y.at({}) - y.at({0}));
  RationalMoments w = condition(y, IndexSet{}, IndexSet{0, 1});
  CHECK(w.at({0}) == 0);

  CHECK_THROWS_AS(condition(y, IndexSet{2}, IndexSet{0}), MomentError);
  RationalMoments small = from_distribution(random_distribution(gen, 6, 3), 6, 0);
  CHECK_THROWS_AS(condition(small, IndexSet{}, IndexSet{0, 1, 2}), MomentError);
}

TEST_CASE("conditioning equals atom filtering, with cancellation outside X") {
  boost::random::mt19937_64 gen(17);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 3 + trial % 3;
    auto atoms = random_distribution(gen, n, 1 + trial % 5);
    RationalMoments y = from_distribution(atoms, n, 2);
    IndexSet S = IndexSet::from_mask(boost::random::uniform_int_distribution<std::uint64_t>(0, (1ULL << std::min(n, 3)) - 1)(gen));
    for (const auto& X : subsets_of(S)) {
      RationalMoments z = condition(y, X, S);
      CHECK(z.at({}) == brute_condition(atoms, {}, X, S));
      for (auto& [I, v] : z.entries()) {
        CHECK(v == brute_condition(atoms, I, X, S));
        if (I.intersects(S - X)) CHECK(v == 0);
      }
      CHECK(inversion_check(y, S).ok);
    }
  }
}

TEST_CASE("normalized conditioning is the conditional distribution") {
  auto atoms = atoms_of({{0b011, Q(1, 4)}, {0b001, Q(1, 4)}, {0b110, Q(1, 2)}});
  RationalMoments y = from_distribution(atoms, 3, 2);
  auto w = normalize_condition(y, IndexSet{0}, IndexSet{0});
  REQUIRE(w.has_value());
  RationalMoments expect = from_distribution(atoms_of({{0b011, Q(1, 2)}, {0b001, Q(1, 2)}}), 3, 2);
  for (auto& [I, v] : w->entries()) CHECK(v == expect.at(I));
  CHECK(w->at({}) == 1);
  CHECK(w->at({0}) == 1);

  auto w2 = normalize_condition(y, IndexSet{1}, IndexSet{0, 1});
  REQUIRE(w2.has_value());
  CHECK(w2->at({1}) == 1);
  CHECK(w2->at({0}) == 0);

  // x2 = 1 and x0 = 1 never happen together
  CHECK_FALSE(normalize_condition(y, IndexSet{0, 2}, IndexSet{0, 2}).has_value());

  auto wf = normalize_condition(to_float(y), IndexSet{0}, IndexSet{0});
  REQUIRE(wf.has_value());
  CHECK(wf->at({1}) == doctest::Approx(0.5));
}

TEST_CASE("mobius atoms and from_atoms") {
  RationalMoments point = from_distribution(atoms_of({{0b101, Q(1)}}), 3, 3);
  auto pa = mobius_atoms(point);
  REQUIRE(pa.size() == 1);
  CHECK(pa[0].support == IndexSet{0, 2});
  CHECK(pa[0].mass == 1);

  auto two = atoms_of({{0b01, Q(1, 2)}, {0b10, Q(1, 2)}});
  auto back = mobius_atoms(from_distribution(two, 2, 2));
  REQUIRE(back.size() == 2);
  CHECK(back[0].support == IndexSet{0});
  CHECK(back[1].support == IndexSet{1});
  CHECK(back[0].mass == Q(1, 2));

  boost::random::mt19937_64 gen(23);
  for (int trial = 0; trial < 25; ++trial) {
    const int n = 2 + trial % 5;
    auto atoms = random_distribution(gen, n, 1 + trial % 6);
    RationalMoments y = from_distribution(atoms, n, n);
    auto recovered = mobius_atoms(y);
    Q total = 0;
    for (auto& a : recovered) total += a.mass;
    CHECK(total == y.at({}));
    CHECK(from_atoms<Q>(recovered, n, n) == y);
    for (const auto& I : index_sets_up_to(n, n)) {
      Q sum = 0;
      for (auto& a : recovered)
        if (I.subset_of(a.support)) sum += a.mass;
      CHECK(sum == y.at(I));
    }
  }

  RationalMoments wide(kMaxAtomVars + 1, 0);
  CHECK_THROWS_AS(mobius_atoms(wide), MomentError);
}

TEST_CASE("from_distribution examples and errors") {
  RationalMoments p = from_distribution(atoms_of({{0b0110, Q(1)}}), 4, 1);
  for (auto& [I, v] : p.entries()) CHECK(v == (I.subset_of(IndexSet{1, 2}) ? 1 : 0));
  for (const auto& I : index_sets_up_to(4, 4)) {
    Q prod = 1;
    I.for_each([&](int i) { prod *= p.at({i}); });
    CHECK(p.at(I) == prod);
  }

  RationalMoments zero = from_distribution(atoms_of({{0, Q(1)}}), 3, 1);
  for (auto& [I, v] : zero.entries()) CHECK(v == (I.empty() ? 1 : 0));

  DstInstance g = two_route_instance();
  LayeredInstance li = LayeredInstance::from_layered(g);
  auto sols = enumerate_integral_solutions(li);
  REQUIRE(sols.size() == 2);
  std::vector<std::vector<EdgeId>> trees{sols[0].edges, sols[1].edges};
  const int n = build_flow_lp(li).num_vars;
  RationalMoments y = from_distribution(solution_distribution(g, trees), n, 1);
  for (EdgeId e = 0; e < g.num_edges(); ++e) CHECK(y.at({e}) == Q(1, 2));
  CHECK(y.at({edge_by_name(g, "r", "a"), edge_by_name(g, "r", "b")}) == 0);
  CHECK(y.at({edge_by_name(g, "r", "a"), edge_by_name(g, "a", "s")}) == Q(1, 2));

  CHECK_THROWS_AS(from_distribution(atoms_of({{1, Q(1, 2)}}), 2, 1), MomentError);
  CHECK_THROWS_AS(from_distribution(atoms_of({{1, Q(3, 2)}, {2, Q(-1, 2)}}), 2, 1), MomentError);
  CHECK_THROWS_AS(from_distribution(atoms_of({{0, Q(1)}}), 200, 5), MomentError);
  CHECK(y.complete());
  CHECK(y.restricted(2).complete_degree() == 2);
}

TEST_CASE("inversion and shift commutativity on distribution vectors") {
  boost::random::mt19937_64 gen(29);
  ConstraintSystem cs = build_flow_lp(LayeredInstance::from_layered(two_route_instance()));
  for (int trial = 0; trial < 20; ++trial) {
    auto atoms = random_distribution(gen, cs.num_vars, 1 + trial % 4);
    RationalMoments y = from_distribution(atoms, cs.num_vars, 2);
    CHECK(inversion_check(y, IndexSet{}).ok);
    IndexSet S{trial % cs.num_vars, (trial * 3 + 1) % cs.num_vars};
    auto inv = inversion_check(y, S);
    CHECK(inv.ok);
    CHECK(inv.max_deviation == 0);
    CHECK(inv.checked > 0);
    for (const auto& X : subsets_of(S))
      for (const auto& row : cs.rows) CHECK(shift_commutes_check(y, X, S, row).ok);
    const LinearRow& row = cs.rows[trial % cs.rows.size()];
    auto empty = shift_commutes_check(y, IndexSet{}, IndexSet{}, row);
    CHECK(empty.ok);
    RationalMoments lhs = shift(row, condition(y, IndexSet{}, IndexSet{}));
    CHECK(lhs == shift(row, y));

    LinearRow degenerate;
    RationalMoments zero = shift(degenerate, condition(y, IndexSet{}, S));
    for (auto& [I, v] : zero.entries()) CHECK(v == 0);
    CHECK(shift_commutes_check(y, IndexSet{}, S, degenerate).ok);
  }
}

TEST_CASE("float inversion tolerates rounding") {
  boost::random::mt19937_64 gen(31);
  auto atoms = random_distribution(gen, 5, 4);
  FloatMoments y = to_float(from_distribution(atoms, 5, 1));
  auto r = inversion_check(y, IndexSet{2}, 1e-12);
  CHECK(r.ok);
  CHECK(r.max_deviation <= 1e-12);
}

TEST_CASE("decomposition examples") {
  // two atoms distinguished by x1
  auto two = atoms_of({{0b011, Q(1, 3)}, {0b101, Q(2, 3)}});
  RationalMoments y = from_distribution(two, 3, 2);
  auto dec = decompose(y, IndexSet{1}, 1);
  REQUIRE(dec.terms.size() == 2);
  CHECK(dec.level == 1);
  CHECK(dec.terms[0].X == IndexSet{});
  CHECK(dec.terms[0].weight == Q(2, 3));
  CHECK(dec.terms[1].X == IndexSet{1});
  CHECK(dec.terms[1].weight == Q(1, 3));
  CHECK(dec.terms[0].w == from_distribution(atoms_of({{0b101, Q(1)}}), 3, 1));
  CHECK(dec.terms[1].w == from_distribution(atoms_of({{0b011, Q(1)}}), 3, 1));
  CHECK(reconstruction_check(y, dec).ok);

  // full level: every term is a point
  DstInstance g = two_route_instance();
  LayeredInstance li = LayeredInstance::from_layered(g);
  ConstraintSystem cs = build_flow_lp(li);
  const int n = cs.num_vars;
  auto sols = enumerate_integral_solutions(li);
  std::vector<std::vector<EdgeId>> trees;
  for (auto& s : sols) trees.push_back(s.edges);
  auto dist = solution_distribution(g, trees, {1, 3});
  RationalMoments full = from_distribution(dist, n, n);
  IndexSet all;
  for (int i = 0; i < n; ++i) all.insert(i);
  auto fd = decompose(full, all, n);
  REQUIRE(fd.terms.size() == 2);
  for (auto& term : fd.terms) {
    CHECK(check_point(cs, point_from_support(n, term.X)).empty());
    bool matches = false;
    for (auto& a : dist) matches = matches || (a.support == term.X && a.mass == term.weight);
    CHECK(matches);
  }
  CHECK(reconstruction_check(full, fd).ok);

  // precondition: at most k variables of S may be 1 together
  CHECK_THROWS_AS(decompose(y, IndexSet{0, 1, 2}, 1), MomentError);
  CHECK_THROWS_AS(decompose(y, IndexSet{0}, 3), MomentError);
}

TEST_CASE("decomposing on one terminal's flow variables yields paths") {
  for (std::uint64_t seed : {9, 12}) {
    DstInstance g = gen_random_layered({2, {2, 2}, 1.0, 1, 4, seed});
    const DstInstance* inst = &g;
    LayeredInstance li = LayeredInstance::from_layered(*inst);
    ConstraintSystem cs = build_flow_lp(li);
    const int m = inst->num_edges();
    auto sols = enumerate_integral_solutions(li);
    std::vector<std::vector<EdgeId>> trees;
    std::vector<int> weights;
    for (std::size_t i = 0; i < sols.size() && i < 5; ++i) trees.push_back(sols[i].edges), weights.push_back(1 + (int)i);
    auto dist = solution_distribution(*inst, trees, weights);
    const int t = li.ell();
    RationalMoments y = from_distribution(dist, cs.num_vars, t);
    for (int s = 0; s < inst->num_terminals(); ++s) {
      IndexSet S;
      for (EdgeId e = 0; e < m; ++e) S.insert(flow_var(m, s, e));
      auto dec = decompose(y, S, li.ell());
      CHECK(reconstruction_check(y, dec).ok);
      Q total = 0;
      for (auto& term : dec.terms) {
        total += term.weight;
        std::vector<EdgeId> path;
        term.X.for_each([&](int v) { path.push_back(decode_var(m, v).edge); });
        REQUIRE(static_cast<int>(path.size()) == li.ell());
        std::sort(path.begin(), path.end(), [&](EdgeId a, EdgeId b) { return li.level(inst->edge(a).tail) < li.level(inst->edge(b).tail); });
        PathRecord p = make_path(*inst, path);
        CHECK(p.start == inst->root());
        CHECK(p.end == inst->terminals()[s]);
        CHECK(certify(term.w, cs, dec.level, 0).ok);
      }
      CHECK(total == 1);
    }
  }
}

TEST_CASE("exact PSD test agrees with principal minors") {
  boost::random::mt19937_64 gen(41);
  boost::random::uniform_int_distribution<int> entry(-3, 3), dim(1, 5), rank(0, 3);
  int psd = 0, not_psd = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const int n = dim(gen);
    std::vector<Q> vals(n * n);
    if (trial % 2 == 0) {
      // Gram matrix of a few integer vectors: always PSD, often singular
      const int r = rank(gen);
      std::vector<std::vector<int>> v(n, std::vector<int>(r));
      for (auto& row : v)
        for (auto& x : row) x = entry(gen);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          int dot = 0;
          for (int k = 0; k < r; ++k) dot += v[i][k] * v[j][k];
          vals[i * n + j] = Q(dot) / (1 + trial % 3);
        }
    } else {
      for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) vals[i * n + j] = vals[j * n + i] = Q(entry(gen)) / 2;
    }
    MomentMatrix<Q> m = dense(n, vals);
    bool expect = psd_by_minors(m);
    CHECK(is_psd_exact(m) == expect);
    (expect ? psd : not_psd)++;
  }
  CHECK(psd > 100);
  CHECK(not_psd > 50);
}

TEST_CASE("certify examples") {
  ConstraintSystem cs = packing_system();
  RationalMoments half = from_distribution(atoms_of({{0b01, Q(1, 2)}, {0b10, Q(1, 2)}}), 2, 2);
  for (int t = 0; t <= 2; ++t) {
    RationalMoments y = from_distribution(atoms_of({{0b01, Q(1, 2)}, {0b10, Q(1, 2)}}), 2, t);
    CertifyReport r = certify(y, cs, t, 0);
    CHECK(r.ok);
    CHECK(r.exact);
    CHECK(r.blocks_checked == 1 + static_cast<int>(cs.rows.size()));
    CHECK(certify(to_float(y), cs, t, 1e-9).ok);
    CHECK(certify_serial(to_float(y), cs, t, 1e-9).ok);
  }

  RationalMoments bad = half;
  bad.set({0, 1}, Q(3, 4));
  CertifyReport rb = certify(bad, cs, 2, 0);
  CHECK_FALSE(rb.ok);
  bool monotone = false;
  for (auto& v : rb.violations) monotone = monotone || v.kind == "monotone";
  CHECK(monotone);

  RationalMoments outside = from_distribution(atoms_of({{0b11, Q(1)}}), 2, 1);
  CHECK(shift(cs.rows[0], outside).at({}) < 0);
  CertifyReport ro = certify(outside, cs, 1, 0);
  CHECK_FALSE(ro.ok);
  CHECK(ro.failing_rows >= 1);
  CHECK(ro.worst_row == 0);
  CertifyReport rf = certify(to_float(outside), cs, 1, 1e-6);
  CHECK_FALSE(rf.ok);
  CHECK(rf.worst_row == 0);
  CHECK(rf.worst_row_min_eig < 0);

  RationalMoments missing = half.restricted(1);
  CertifyReport rm = certify(missing, cs, 2, 0);
  CHECK_FALSE(rm.ok);
  CHECK(rm.missing_entries == 1);
  CHECK(rm.first_missing == "{0,1}");

  RationalMoments scaled = half;
  for (auto& [I, v] : half.entries()) scaled.set(I, v * 2);
  CHECK_FALSE(certify(scaled, cs, 2, 0).ok);
}

TEST_CASE("float tolerance scales with the largest entry") {
  ConstraintSystem cs = packing_system();
  FloatMoments y = to_float(from_distribution(atoms_of({{0b01, Q(1, 2)}, {0b10, Q(1, 2)}}), 2, 1));
  y.set({0, 1}, -1e-9);
  CHECK(certify(y, cs, 1, 1e-6).ok);
  CHECK_FALSE(certify(y, cs, 1, 1e-12).ok);
}

TEST_CASE("Las_t identities on distribution vectors over K") {
  DstInstance g = gen_random_layered({2, {2, 2}, 1.0, 1, 5, 4});
  LayeredInstance li = LayeredInstance::from_layered(g);
  ConstraintSystem cs = build_flow_lp(li);
  auto sols = enumerate_integral_solutions(li);
  REQUIRE(sols.size() >= 2);
  InfeasibleSetProbe probe(cs);
  boost::random::mt19937_64 gen(43);
  for (int trial = 0; trial < 6; ++trial) {
    std::vector<std::vector<EdgeId>> trees;
    std::vector<int> weights;
    for (std::size_t i = 0; i < sols.size(); ++i)
      if ((gen() & 3) != 0 || trees.empty()) trees.push_back(sols[i].edges), weights.push_back(1 + gen() % 5);
    RationalMoments y = from_distribution(solution_distribution(g, trees, weights), cs.num_vars, 1);
    const int t = 1;
    CHECK(certify(y, cs, t, 0).ok);
    CHECK(check_monotone(y, t).ok);
    CHECK(check_one_iff_singletons(y, t).ok);
    CHECK(check_product_on_integral(y, t).ok);
    CHECK(check_one_absorbs(y, t).ok);
    CHECK(check_determinant_identity(y, t).ok);
    CHECK(check_infeasible_zeros(y, probe, t).ok);
  }
  CHECK(probe.probes() > 0);
  // y_a = y_b = 1 for the two in-edges of one node is impossible in K
  NodeId s = g.terminals()[0];
  if (g.in_edges(s).size() >= 2) CHECK(probe.infeasible(IndexSet{g.in_edges(s)[0], g.in_edges(s)[1]}));
  CHECK_FALSE(probe.infeasible(IndexSet{}));
}

TEST_CASE("identity checks catch violations") {
  RationalMoments y(2, 1);
  y.set({}, Q(1));
  y.set({0}, Q(1));
  y.set({1}, Q(1, 2));
  y.set({0, 1}, Q(1, 2));
  CHECK(check_monotone(y, 2).ok);
  CHECK(check_one_absorbs(y, 1).ok);
  y.set({0, 1}, Q(1, 4));
  CHECK_FALSE(check_one_absorbs(y, 1).ok);
  y.set({1}, Q(0));
  CHECK_FALSE(check_product_on_integral(y, 2).ok);
  CHECK_FALSE(check_monotone(y, 2).ok);
  y.set({1}, Q(1));
  y.set({0, 1}, Q(1, 2));
  CHECK_FALSE(check_one_iff_singletons(y, 2).ok);
}
