#include <doctest.h>

#include <dpkit/errors.hpp>
#include <dpkit/formula.hpp>
#include <dpkit/oracle.hpp>
#include <dpkit/rng.hpp>
#include <dpkit/theory.hpp>

#include <cstdlib>
#include <vector>

using namespace dpkit;
using oracle::AtomArg;
using oracle::ConstraintExpr;
using oracle::ConstraintSet;
using oracle::SignedAtom;
using theory::Point;
using theory::RelationId;
using theory::TheoryId;

namespace {

Point pt(std::int64_t a) { return Point{{a}}; }
Point pt2(std::int64_t a, std::int64_t b) { return Point{{a, b}}; }

ConstraintSet make_cs(TheoryId th, int x_arity, int level_count = 2) {
  ConstraintSet cs;
  cs.theory = th;
  cs.level_count = level_count;
  cs.x_arity = x_arity;
  return cs;
}

// Evaluates a conjunction of signed atoms at a concrete variable assignment.
bool brute_holds(const ConstraintSet& cs, const std::vector<Point>& xs) {
  for (const auto& atom : cs.atoms) {
    const Point& l = atom.lhs.is_var
                         ? xs[static_cast<std::size_t>(atom.lhs.var)]
                         : atom.lhs.point;
    const Point& r = atom.rhs.is_var
                         ? xs[static_cast<std::size_t>(atom.rhs.var)]
                         : atom.rhs.point;
    if (theory::eval_atom(cs.theory, cs.level_count, atom.rel, l, r) !=
        atom.positive) {
      return false;
    }
  }
  return true;
}

// Anchor ranks 100, 300, ..., 900 split each order into gaps 0..5. Grid
// points fill every (gap, gap) cell with four tier combinations so any
// pairwise configuration between two free points is realized.
constexpr std::int64_t kAnchorRank(int i) { return 200 * i + 100; }

std::int64_t interior_base(int gap) { return gap == 0 ? 0 : 200 * (gap - 1) + 110; }

std::vector<Point> dlo_witness_pool() {
  std::vector<Point> pool;
  for (int i = 0; i < 5; ++i) pool.push_back(pt(kAnchorRank(i)));
  for (int g = 0; g <= 5; ++g) {
    for (int j = 0; j < 3; ++j) pool.push_back(pt(interior_base(g) + 30 * j));
  }
  return pool;
}

std::vector<Point> ddlo_witness_pool() {
  const int sigma[5] = {2, 0, 3, 1, 4};
  std::vector<Point> pool;
  for (int i = 0; i < 5; ++i) {
    pool.push_back(pt2(kAnchorRank(i), kAnchorRank(sigma[i])));
  }
  for (int g1 = 0; g1 <= 5; ++g1) {
    for (int g2 = 0; g2 <= 5; ++g2) {
      for (int j = 0; j < 4; ++j) {
        int t1 = j / 2;
        int t2 = j % 2;
        pool.push_back(pt2(interior_base(g1) + 40 * t1 + 4 * g2 + t2,
                           interior_base(g2) + 40 * t2 + 4 * g1 + t1));
      }
    }
  }
  return pool;
}

bool brute_search(const ConstraintSet& cs, const std::vector<Point>& pool) {
  std::vector<Point> xs(static_cast<std::size_t>(cs.x_arity));
  std::vector<int> pick(static_cast<std::size_t>(cs.x_arity), 0);
  while (true) {
    for (int v = 0; v < cs.x_arity; ++v) {
      xs[static_cast<std::size_t>(v)] = pool[static_cast<std::size_t>(
          pick[static_cast<std::size_t>(v)])];
    }
    if (brute_holds(cs, xs)) return true;
    int v = 0;
    while (v < cs.x_arity) {
      auto& p = pick[static_cast<std::size_t>(v)];
      if (++p < static_cast<int>(pool.size())) break;
      p = 0;
      ++v;
    }
    if (v == cs.x_arity) return false;
  }
}

ConstraintSet random_order_cs(Rng& rng, TheoryId th, int x_arity,
                              const std::vector<Point>& anchors) {
  ConstraintSet cs = make_cs(th, x_arity);
  int atom_count = 1 + static_cast<int>(rng.below(6));
  std::vector<RelationId> rels{RelationId::order1(), RelationId::equality()};
  if (th == TheoryId::Ddlo) rels.push_back(RelationId::order2());
  for (int a = 0; a < atom_count; ++a) {
    RelationId rel = rels[rng.below(rels.size())];
    bool positive = rng.coin();
    int shape = static_cast<int>(rng.below(3));
    AtomArg var = AtomArg::x(static_cast<int>(rng.below(
        static_cast<std::uint64_t>(x_arity))));
    AtomArg other = AtomArg::param(anchors[rng.below(anchors.size())]);
    if (shape == 2) {
      other = AtomArg::x(static_cast<int>(rng.below(
          static_cast<std::uint64_t>(x_arity))));
    }
    if (shape == 1) {
      cs.require(positive, rel, other, var);
    } else {
      cs.require(positive, rel, var, other);
    }
  }
  return cs;
}

}  // namespace

TEST_CASE("dlo order constraints resolve by dense completion") {
  auto between = make_cs(TheoryId::Dlo, 1);
  between.require(true, RelationId::order1(), AtomArg::param(pt(3)), AtomArg::x(0));
  between.require(true, RelationId::order1(), AtomArg::x(0), AtomArg::param(pt(5)));
  CHECK(oracle::consistent(between));

  auto adjacent = make_cs(TheoryId::Dlo, 1);
  adjacent.require(true, RelationId::order1(), AtomArg::param(pt(3)), AtomArg::x(0));
  adjacent.require(true, RelationId::order1(), AtomArg::x(0), AtomArg::param(pt(4)));
  CHECK(oracle::consistent(adjacent));

  auto crossed = make_cs(TheoryId::Dlo, 1);
  crossed.require(true, RelationId::order1(), AtomArg::x(0), AtomArg::param(pt(3)));
  crossed.require(true, RelationId::order1(), AtomArg::param(pt(5)), AtomArg::x(0));
  CHECK_FALSE(oracle::consistent(crossed));

  auto pinch = make_cs(TheoryId::Dlo, 1);
  pinch.require(true, RelationId::order1(), AtomArg::x(0), AtomArg::param(pt(3)));
  pinch.require(true, RelationId::order1(), AtomArg::param(pt(3)), AtomArg::x(0));
  CHECK_FALSE(oracle::consistent(pinch));
}

TEST_CASE("equality atoms pin and exclude") {
  auto pin_conflict = make_cs(TheoryId::Dlo, 1);
  pin_conflict.require(true, RelationId::equality(), AtomArg::x(0), AtomArg::param(pt(3)));
  pin_conflict.require(true, RelationId::order1(), AtomArg::x(0), AtomArg::param(pt(3)));
  CHECK_FALSE(oracle::consistent(pin_conflict));

  auto pin_ok = make_cs(TheoryId::Dlo, 1);
  pin_ok.require(true, RelationId::equality(), AtomArg::x(0), AtomArg::param(pt(3)));
  pin_ok.require(true, RelationId::order1(), AtomArg::x(0), AtomArg::param(pt(5)));
  CHECK(oracle::consistent(pin_ok));

  auto all_fresh = make_cs(TheoryId::Dlo, 1);
  for (std::int64_t v : {3, 4, 5}) {
    all_fresh.require(false, RelationId::equality(), AtomArg::x(0), AtomArg::param(pt(v)));
  }
  all_fresh.require(true, RelationId::order1(), AtomArg::param(pt(3)), AtomArg::x(0));
  all_fresh.require(true, RelationId::order1(), AtomArg::x(0), AtomArg::param(pt(4)));
  CHECK(oracle::consistent(all_fresh));
}

TEST_CASE("order cycles between variables are inconsistent") {
  auto chain = make_cs(TheoryId::Dlo, 3);
  chain.require(true, RelationId::order1(), AtomArg::x(0), AtomArg::x(1));
  chain.require(true, RelationId::order1(), AtomArg::x(1), AtomArg::x(2));
  CHECK(oracle::consistent(chain));
  chain.require(true, RelationId::order1(), AtomArg::x(2), AtomArg::x(0));
  CHECK_FALSE(oracle::consistent(chain));

  auto pair_loop = make_cs(TheoryId::Dlo, 2);
  pair_loop.require(true, RelationId::order1(), AtomArg::x(0), AtomArg::x(1));
  pair_loop.require(true, RelationId::order1(), AtomArg::x(1), AtomArg::x(0));
  CHECK_FALSE(oracle::consistent(pair_loop));
}

TEST_CASE("ddlo orders are independent") {
  auto cs = make_cs(TheoryId::Ddlo, 1);
  cs.require(true, RelationId::order1(), AtomArg::x(0), AtomArg::param(pt2(100, 100)));
  cs.require(true, RelationId::order2(), AtomArg::param(pt2(100, 100)), AtomArg::x(0));
  CHECK(oracle::consistent(cs));

  auto twisted = make_cs(TheoryId::Ddlo, 2);
  twisted.require(true, RelationId::order1(), AtomArg::x(0), AtomArg::x(1));
  twisted.require(true, RelationId::order2(), AtomArg::x(1), AtomArg::x(0));
  CHECK(oracle::consistent(twisted));
  twisted.require(true, RelationId::equality(), AtomArg::x(0), AtomArg::x(1));
  CHECK_FALSE(oracle::consistent(twisted));
}

TEST_CASE("class membership closes along the refinement direction") {
  auto s = theory::sample(TheoryId::Eqtree, 12, 7, 3, 2);
  Point a = s.points[0];

  auto fine_then_not_coarse = make_cs(TheoryId::Eqtree, 1, 3);
  fine_then_not_coarse.require(true, RelationId::equiv(0, 1), AtomArg::x(0), AtomArg::param(a));
  fine_then_not_coarse.require(false, RelationId::equiv(0, 2), AtomArg::x(0), AtomArg::param(a));
  CHECK_FALSE(oracle::consistent(fine_then_not_coarse));

  auto coarse_escaping_fine = make_cs(TheoryId::Eqtree, 1, 3);
  coarse_escaping_fine.require(true, RelationId::equiv(0, 2), AtomArg::x(0), AtomArg::param(a));
  coarse_escaping_fine.require(false, RelationId::equiv(0, 1), AtomArg::x(0), AtomArg::param(a));
  CHECK(oracle::consistent(coarse_escaping_fine));

  auto rs = theory::sample(TheoryId::EqtreeRev, 12, 7, 3, 2);
  Point b = rs.points[0];

  auto rev_blocked = make_cs(TheoryId::EqtreeRev, 1, 3);
  rev_blocked.require(true, RelationId::equiv(0, 2), AtomArg::x(0), AtomArg::param(b));
  rev_blocked.require(false, RelationId::equiv(0, 1), AtomArg::x(0), AtomArg::param(b));
  CHECK_FALSE(oracle::consistent(rev_blocked));

  auto rev_ok = make_cs(TheoryId::EqtreeRev, 1, 3);
  rev_ok.require(true, RelationId::equiv(0, 1), AtomArg::x(0), AtomArg::param(b));
  rev_ok.require(false, RelationId::equiv(0, 2), AtomArg::x(0), AtomArg::param(b));
  CHECK(oracle::consistent(rev_ok));
}

TEST_CASE("incompatible class memberships are rejected") {
  auto s = theory::sample(TheoryId::Eqtree, 12, 7, 3, 2);
  auto idx = theory::eq_relation_index(3, RelationId::equiv(0, 2));
  Point a = s.points[0];
  Point other;
  for (const auto& p : s.points) {
    if (p.coords[static_cast<std::size_t>(idx)] != a.coords[static_cast<std::size_t>(idx)]) {
      other = p;
      break;
    }
  }
  REQUIRE_FALSE(other.coords.empty());

  auto split = make_cs(TheoryId::Eqtree, 1, 3);
  split.require(true, RelationId::equiv(0, 2), AtomArg::x(0), AtomArg::param(a));
  split.require(true, RelationId::equiv(0, 2), AtomArg::x(0), AtomArg::param(other));
  CHECK_FALSE(oracle::consistent(split));

  auto same = make_cs(TheoryId::Eqtree, 1, 3);
  same.require(true, RelationId::equiv(0, 2), AtomArg::x(0), AtomArg::param(a));
  same.require(true, RelationId::equiv(0, 2), AtomArg::x(0), AtomArg::param(a));
  CHECK(oracle::consistent(same));
}

TEST_CASE("equality forces class membership and congruence chains propagate") {
  auto s = theory::sample(TheoryId::Eqtree, 12, 7, 3, 2);
  Point a = s.points[0];

  auto pinned = make_cs(TheoryId::Eqtree, 1, 3);
  pinned.require(true, RelationId::equality(), AtomArg::x(0), AtomArg::param(a));
  pinned.require(false, RelationId::equiv(0, 1), AtomArg::x(0), AtomArg::param(a));
  CHECK_FALSE(oracle::consistent(pinned));

  auto chain = make_cs(TheoryId::Eqtree, 2, 3);
  chain.require(true, RelationId::equiv(0, 1), AtomArg::x(0), AtomArg::param(a));
  chain.require(true, RelationId::equiv(0, 1), AtomArg::x(1), AtomArg::x(0));
  chain.require(false, RelationId::equiv(0, 1), AtomArg::x(1), AtomArg::param(a));
  CHECK_FALSE(oracle::consistent(chain));

  auto vars_only = make_cs(TheoryId::Eqtree, 2, 3);
  vars_only.require(true, RelationId::equiv(0, 2), AtomArg::x(0), AtomArg::x(1));
  vars_only.require(false, RelationId::equiv(0, 1), AtomArg::x(0), AtomArg::x(1));
  CHECK(oracle::consistent(vars_only));
  vars_only.require(true, RelationId::equiv(0, 1), AtomArg::x(1), AtomArg::x(0));
  CHECK_FALSE(oracle::consistent(vars_only));
}

TEST_CASE("incomparable relations at one level stay independent") {
  auto s = theory::sample(TheoryId::Eqtree, 12, 7, 3, 2);
  auto cs = make_cs(TheoryId::Eqtree, 1, 3);
  cs.require(true, RelationId::equiv(0, 2), AtomArg::x(0), AtomArg::param(s.points[0]));
  cs.require(true, RelationId::equiv(1, 2), AtomArg::x(0), AtomArg::param(s.points[5]));
  CHECK(oracle::consistent(cs));
}

TEST_CASE("dlo solver agrees with finite witness search at arity three") {
  std::vector<Point> anchors;
  for (int i = 0; i < 5; ++i) anchors.push_back(pt(kAnchorRank(i)));
  std::vector<Point> pool = dlo_witness_pool();
  Rng rng(2024);
  for (int trial = 0; trial < 150; ++trial) {
    ConstraintSet cs = random_order_cs(rng, TheoryId::Dlo, 3, anchors);
    CHECK(oracle::consistent(cs) == brute_search(cs, pool));
  }
}

TEST_CASE("ddlo solver agrees with finite witness search at arity two") {
  const int sigma[5] = {2, 0, 3, 1, 4};
  std::vector<Point> anchors;
  for (int i = 0; i < 5; ++i) {
    anchors.push_back(pt2(kAnchorRank(i), kAnchorRank(sigma[i])));
  }
  std::vector<Point> pool = ddlo_witness_pool();
  Rng rng(77);
  for (int trial = 0; trial < 150; ++trial) {
    ConstraintSet cs = random_order_cs(rng, TheoryId::Ddlo, 2, anchors);
    CHECK(oracle::consistent(cs) == brute_search(cs, pool));
  }
}

TEST_CASE("equivalence solver accepts whatever the finite model realizes") {
  Rng rng(5150);
  for (TheoryId th : {TheoryId::Eqtree, TheoryId::EqtreeRev}) {
    auto s = theory::sample(th, 24, 11, 3, 2);
    auto rels = theory::eq_relations(3);
    for (int trial = 0; trial < 200; ++trial) {
      ConstraintSet cs = make_cs(th, 2, 3);
      int atom_count = 1 + static_cast<int>(rng.below(5));
      for (int a = 0; a < atom_count; ++a) {
        RelationId rel = rng.below(8) == 0 ? RelationId::equality()
                                           : rels[rng.below(rels.size())];
        bool positive = rng.below(4) != 0;
        AtomArg lhs = AtomArg::x(static_cast<int>(rng.below(2)));
        AtomArg rhs = rng.coin()
                          ? AtomArg::param(s.points[rng.below(s.points.size())])
                          : AtomArg::x(static_cast<int>(rng.below(2)));
        cs.require(positive, rel, lhs, rhs);
      }
      if (brute_search(cs, s.points)) CHECK(oracle::consistent(cs));
    }
  }
}

TEST_CASE("dnf search escapes through disjuncts") {
  auto phi = theory::parse_formula("x <1 y0 | x = y0");
  ConstraintExpr expr;
  expr.base = make_cs(TheoryId::Dlo, 1);
  expr.base.require(true, RelationId::order1(), AtomArg::param(pt(10)), AtomArg::x(0));
  expr.parts.push_back(oracle::instantiate(phi, {pt(10)}, false));
  CHECK(oracle::dnf_consistent(expr));

  ConstraintExpr blocked;
  blocked.base = make_cs(TheoryId::Dlo, 1);
  blocked.base.require(true, RelationId::order1(), AtomArg::param(pt(10)), AtomArg::x(0));
  blocked.parts.push_back(oracle::instantiate(phi, {pt(10)}, true));
  CHECK_FALSE(oracle::dnf_consistent(blocked));
}

TEST_CASE("iff parts fork both phases") {
  auto phi = theory::parse_formula("x <1 y0 <-> x <1 y1");
  ConstraintExpr expr;
  expr.base = make_cs(TheoryId::Dlo, 1);
  expr.parts.push_back(oracle::instantiate(phi, {pt(10), pt(20)}, true));
  CHECK(oracle::dnf_consistent(expr));

  ConstraintExpr pinned;
  pinned.base = make_cs(TheoryId::Dlo, 1);
  pinned.base.require(true, RelationId::order1(), AtomArg::param(pt(10)), AtomArg::x(0));
  pinned.base.require(true, RelationId::order1(), AtomArg::x(0), AtomArg::param(pt(20)));
  pinned.parts.push_back(oracle::instantiate(phi, {pt(10), pt(20)}, true));
  CHECK_FALSE(oracle::dnf_consistent(pinned));
}

TEST_CASE("branch budget caps disjunctive fan out") {
  theory::Formula big = theory::parse_formula("x = y0");
  for (int i = 1; i < 6; ++i) {
    big = theory::Formula::disj(
        big, theory::parse_formula("x = y" + std::to_string(i)));
  }
  ConstraintExpr expr;
  expr.base = make_cs(TheoryId::Dlo, 1);
  expr.base.require(true, RelationId::order1(), AtomArg::x(0), AtomArg::param(pt(0)));
  theory::PointTuple args;
  for (std::int64_t v = 1; v <= 6; ++v) args.push_back(pt(v));
  expr.parts.push_back(oracle::instantiate(big, args, true));

  oracle::DnfStats stats;
  CHECK_FALSE(oracle::dnf_consistent(expr, oracle::kDefaultDnfBudget, &stats));
  CHECK(stats.branches_explored >= 6);
  CHECK_THROWS_AS(oracle::dnf_consistent(expr, 3), resource_error);
}

TEST_CASE("multiple parts conjoin") {
  auto lower = theory::parse_formula("y0 <1 x");
  auto upper = theory::parse_formula("x <1 y0");
  ConstraintExpr expr;
  expr.base = make_cs(TheoryId::Dlo, 1);
  expr.parts.push_back(oracle::instantiate(lower, {pt(10)}, true));
  expr.parts.push_back(oracle::instantiate(upper, {pt(30)}, true));
  CHECK(oracle::dnf_consistent(expr));
  expr.parts.push_back(oracle::instantiate(upper, {pt(10)}, true));
  CHECK_FALSE(oracle::dnf_consistent(expr));
}

TEST_CASE("instantiation validates tuple widths") {
  auto phi = theory::parse_formula("x <1 y1");
  CHECK_THROWS_AS(oracle::instantiate(phi, {pt(1)}, true), input_error);

  ConstraintExpr expr;
  expr.base = make_cs(TheoryId::Dlo, 1);
  oracle::InstFormula bad{phi, {pt(1)}, true};
  expr.parts.push_back(bad);
  CHECK_THROWS_AS(oracle::dnf_consistent(expr), input_error);

  auto wide = theory::parse_formula("x1 <1 y0");
  ConstraintExpr narrow;
  narrow.base = make_cs(TheoryId::Dlo, 1);
  narrow.parts.push_back(oracle::instantiate(wide, {pt(1)}, true));
  CHECK_THROWS_AS(oracle::dnf_consistent(narrow), input_error);
}

TEST_CASE("budget environment variable parsing") {
  unsetenv("DPKIT_BUDGET");
  CHECK_FALSE(oracle::env_budget().has_value());
  setenv("DPKIT_BUDGET", "123", 1);
  CHECK(oracle::env_budget() == std::optional<std::uint64_t>{123});
  setenv("DPKIT_BUDGET", "abc", 1);
  CHECK_THROWS_AS(oracle::env_budget(), input_error);
  setenv("DPKIT_BUDGET", "0", 1);
  CHECK_THROWS_AS(oracle::env_budget(), input_error);
  unsetenv("DPKIT_BUDGET");
}
