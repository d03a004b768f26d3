#include <doctest.h>

#include <dpkit/errors.hpp>
#include <dpkit/formula.hpp>
#include <dpkit/theory.hpp>

#include <algorithm>
#include <set>
#include <vector>

using namespace dpkit;
using theory::Point;
using theory::RelationId;
using theory::TheoryId;

TEST_CASE("theory names round trip") {
  for (TheoryId t : {TheoryId::Dlo, TheoryId::Ddlo, TheoryId::Eqtree,
                     TheoryId::EqtreeRev}) {
    CHECK(theory::theory_from_name(theory::theory_name(t)) == t);
  }
  CHECK_THROWS_AS(theory::theory_from_name("nope"), input_error);
}

TEST_CASE("relation levels and the symbol order") {
  CHECK(theory::level(RelationId::equality()) == -1);
  CHECK(theory::level(RelationId::equiv(0, 1)) == 1);
  CHECK(theory::level(RelationId::equiv(2, 3)) == 3);

  CHECK(theory::rel_below(RelationId::equiv(0, 1), RelationId::equiv(0, 2)));
  CHECK(theory::rel_below(RelationId::equiv(0, 1), RelationId::equiv(1, 2)));
  CHECK_FALSE(theory::rel_below(RelationId::equiv(0, 2), RelationId::equiv(0, 1)));
  CHECK_FALSE(theory::rel_below(RelationId::equiv(0, 2), RelationId::equiv(1, 2)));
  CHECK(theory::rel_below(RelationId::equiv(0, 2), RelationId::equiv(0, 2)));
  CHECK(theory::rel_below(RelationId::equality(), RelationId::equiv(0, 1)));
}

TEST_CASE("eq_relations enumeration and index") {
  auto rels = theory::eq_relations(4);
  REQUIRE(rels.size() == 6);
  CHECK(rels[0] == RelationId::equiv(0, 1));
  CHECK(rels[1] == RelationId::equiv(0, 2));
  CHECK(rels[2] == RelationId::equiv(1, 2));
  CHECK(rels[5] == RelationId::equiv(2, 3));
  for (int i = 0; i < static_cast<int>(rels.size()); ++i) {
    CHECK(theory::eq_relation_index(4, rels[i]) == i);
  }
  auto level3 = theory::incomparable_relations(4, 3);
  REQUIRE(level3.size() == 3);
  for (const auto& r : level3) CHECK(theory::level(r) == 3);
}

TEST_CASE("relation names") {
  CHECK(theory::relation_name(RelationId::order1()) == "<1");
  CHECK(theory::relation_name(RelationId::order2()) == "<2");
  CHECK(theory::relation_name(RelationId::equality()) == "=");
  CHECK(theory::relation_name(RelationId::equiv(1, 2)) == "E(1,2)");
}

TEST_CASE("dlo samples are increasing and valid") {
  auto s = theory::sample(TheoryId::Dlo, 6, 42);
  REQUIRE(s.points.size() == 6);
  CHECK(s.coord_count() == 1);
  for (int i = 0; i + 1 < 6; ++i) {
    CHECK(s.points[i].coords[0] < s.points[i + 1].coords[0]);
  }
  CHECK_FALSE(theory::validate(s).has_value());
}

TEST_CASE("ddlo samples carry two independent orders") {
  auto s = theory::sample(TheoryId::Ddlo, 12, 42);
  REQUIRE(s.points.size() == 12);
  CHECK(s.coord_count() == 2);
  std::set<std::int64_t> rank2;
  bool monotone2 = true;
  for (int i = 0; i < 12; ++i) {
    rank2.insert(s.points[i].coords[1]);
    if (i + 1 < 12) {
      CHECK(s.points[i].coords[0] < s.points[i + 1].coords[0]);
      if (s.points[i].coords[1] >= s.points[i + 1].coords[1]) monotone2 = false;
    }
  }
  CHECK(rank2.size() == 12);
  CHECK_FALSE(monotone2);
  CHECK_FALSE(theory::validate(s).has_value());
}

TEST_CASE("ddlo validate flags duplicate ranks") {
  auto s = theory::sample(TheoryId::Ddlo, 4, 1);
  s.points[2].coords[0] = s.points[1].coords[0];
  auto v = theory::validate(s);
  REQUIRE(v.has_value());
  CHECK_FALSE(v->message.empty());
}

TEST_CASE("equivalence samples respect nesting") {
  for (TheoryId t : {TheoryId::Eqtree, TheoryId::EqtreeRev}) {
    auto s = theory::sample(t, 16, 5, 3, 2);
    CHECK(s.coord_count() == 3);
    CHECK_FALSE(theory::validate(s).has_value());
    auto rels = theory::eq_relations(3);
    for (std::size_t i = 0; i < s.points.size(); ++i) {
      for (std::size_t j = 0; j < s.points.size(); ++j) {
        for (const auto& a : rels) {
          for (const auto& b : rels) {
            if (a == b || !theory::rel_below(a, b)) continue;
            const auto& lower = (t == TheoryId::Eqtree) ? a : b;
            const auto& upper = (t == TheoryId::Eqtree) ? b : a;
            bool at_lower = theory::eval_atom(t, 3, lower, s.points[i], s.points[j]);
            bool at_upper = theory::eval_atom(t, 3, upper, s.points[i], s.points[j]);
            if (at_lower) CHECK(at_upper);
          }
        }
      }
    }
  }
}

TEST_CASE("validate flags broken nesting") {
  auto s = theory::sample(TheoryId::Eqtree, 8, 5, 3, 2);
  Point a = s.points[0];
  Point b = s.points[0];
  b.coords[1] += 1000;  // same level-1 class, different (0,2) class
  s.points[1] = b;
  s.points[0] = a;
  auto v = theory::validate(s);
  REQUIRE(v.has_value());
  CHECK_FALSE(v->message.empty());
}

TEST_CASE("eval_atom on orders and equality") {
  Point a{{3}};
  Point b{{5}};
  CHECK(theory::eval_atom(TheoryId::Dlo, 0, RelationId::order1(), a, b));
  CHECK_FALSE(theory::eval_atom(TheoryId::Dlo, 0, RelationId::order1(), b, a));
  CHECK_FALSE(theory::eval_atom(TheoryId::Dlo, 0, RelationId::order1(), a, a));
  CHECK(theory::eval_atom(TheoryId::Dlo, 0, RelationId::equality(), a, a));
  CHECK_FALSE(theory::eval_atom(TheoryId::Dlo, 0, RelationId::equality(), a, b));

  Point c{{1, 9}};
  Point d{{2, 4}};
  CHECK(theory::eval_atom(TheoryId::Ddlo, 0, RelationId::order1(), c, d));
  CHECK_FALSE(theory::eval_atom(TheoryId::Ddlo, 0, RelationId::order2(), c, d));
}

TEST_CASE("theory_relations lists the atomic vocabulary") {
  CHECK(theory::theory_relations(TheoryId::Dlo, 0).size() == 1);
  CHECK(theory::theory_relations(TheoryId::Ddlo, 0).size() == 2);
  CHECK(theory::theory_relations(TheoryId::Eqtree, 4).size() == 6);
}

TEST_CASE("sample json round trip") {
  auto s = theory::sample(TheoryId::Eqtree, 10, 9, 3, 3);
  auto back = theory::load_sample_json(theory::save_sample_json(s));
  CHECK(back.theory == s.theory);
  CHECK(back.params.size == s.params.size);
  CHECK(back.params.level_count == s.params.level_count);
  REQUIRE(back.points.size() == s.points.size());
  for (std::size_t i = 0; i < s.points.size(); ++i) {
    CHECK(back.points[i] == s.points[i]);
  }
}

TEST_CASE("malformed sample json is rejected") {
  CHECK_THROWS_AS(theory::load_sample_json("{"), io_error);
  CHECK_THROWS_AS(theory::load_sample_json("{\"theory\":\"dlo\"}"), io_error);
}

TEST_CASE("formula parse and print round trip") {
  for (const char* text :
       {"x <1 y0", "x <2 y0", "x = y0", "x E(1,2) y0", "y0 <1 y1",
        "(x <1 y0 & x <2 y1) | !(x = y2)", "x <1 y0 <-> x <1 y1"}) {
    theory::Formula f = theory::parse_formula(text);
    theory::Formula again = theory::parse_formula(theory::print_formula(f));
    CHECK(theory::print_formula(f) == theory::print_formula(again));
  }
}

TEST_CASE("parse errors are reported") {
  CHECK_THROWS_AS(theory::parse_formula(""), input_error);
  CHECK_THROWS_AS(theory::parse_formula("x <1"), input_error);
  CHECK_THROWS_AS(theory::parse_formula("x ? y0"), input_error);
  CHECK_THROWS_AS(theory::parse_formula("(x <1 y0"), input_error);
}

TEST_CASE("parse tracks arities") {
  theory::Formula f = theory::parse_formula("x0 <1 y2 & x1 = y0");
  CHECK(f.x_arity == 2);
  CHECK(f.y_arity == 3);
}

TEST_CASE("eval agrees with hand evaluation") {
  auto interval = theory::parse_formula("y0 <1 x & x <1 y1");
  Point lo{{10}};
  Point hi{{20}};
  Point in{{15}};
  Point out{{25}};
  CHECK(theory::eval(interval, TheoryId::Dlo, 0, {in}, {lo, hi}));
  CHECK_FALSE(theory::eval(interval, TheoryId::Dlo, 0, {out}, {lo, hi}));

  auto equiv = theory::parse_formula("x E(0,2) y0 & !(x E(0,1) y0)");
  auto s = theory::sample(TheoryId::Eqtree, 16, 3, 3, 2);
  bool found_true = false;
  bool found_false = false;
  for (const auto& p : s.points) {
    if (theory::eval(equiv, TheoryId::Eqtree, 3, {p}, {s.points[0]})) {
      found_true = true;
    } else {
      found_false = true;
    }
  }
  CHECK(found_true);
  CHECK(found_false);
}

TEST_CASE("iff evaluation") {
  auto f = theory::parse_formula("x <1 y0 <-> x <1 y1");
  Point a{{5}};
  Point b{{10}};
  Point below{{1}};
  Point between{{7}};
  CHECK(theory::eval(f, TheoryId::Dlo, 0, {below}, {a, b}));
  CHECK_FALSE(theory::eval(f, TheoryId::Dlo, 0, {between}, {a, b}));
}

TEST_CASE("eval checks argument widths") {
  auto f = theory::parse_formula("x <1 y1");
  Point p{{1}};
  CHECK_THROWS_AS(theory::eval(f, TheoryId::Dlo, 0, {p}, {p}), input_error);
}

TEST_CASE("collect_relations finds every atom relation") {
  auto f = theory::parse_formula("(x <1 y0 & x E(0,2) y1) | x = y0");
  std::vector<RelationId> rels;
  theory::collect_relations(f, rels);
  CHECK(std::count(rels.begin(), rels.end(), RelationId::order1()) >= 1);
  CHECK(std::count(rels.begin(), rels.end(), RelationId::equiv(0, 2)) >= 1);
  CHECK(std::count(rels.begin(), rels.end(), RelationId::equality()) >= 1);
}
