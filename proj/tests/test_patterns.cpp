#include <doctest.h>

#include <dpkit/errors.hpp>
#include <dpkit/indisc.hpp>
#include <dpkit/patterns.hpp>
#include <dpkit/theory.hpp>

#include <set>
#include <string>
#include <vector>

using namespace dpkit;
using patterns::PatternSpec;
using patterns::PatternUnit;
using theory::TheoryId;

TEST_CASE("double order witness verifies at depth two") {
  PatternSpec spec = patterns::canonical_ddlo_pattern(5);
  CHECK(spec.depth() == 2);
  auto verdict = patterns::verify(spec);
  CHECK(verdict.verified);
  CHECK(verdict.mutual_ok);
  CHECK(verdict.depth == 2);
  CHECK(verdict.eta_checked == 25);
  CHECK(verdict.failures.empty());
}

TEST_CASE("gamma builds one positive and the rest negative") {
  PatternSpec spec = patterns::canonical_ddlo_pattern(3);
  auto expr = patterns::gamma(spec, {1, 2});
  REQUIRE(expr.parts.size() == 6);
  int positives = 0;
  for (const auto& part : expr.parts) {
    if (part.positive) ++positives;
  }
  CHECK(positives == 2);
  CHECK(expr.parts[0].positive);
  CHECK(expr.parts[1].positive);
  CHECK(oracle::dnf_consistent(expr));
}

TEST_CASE("gamma rejects out of range columns") {
  PatternSpec spec = patterns::canonical_ddlo_pattern(3);
  CHECK_THROWS_AS(patterns::gamma(spec, {0}), input_error);
  CHECK_THROWS_AS(patterns::gamma(spec, {0, 3}), input_error);
}

TEST_CASE("tree witness verifies and its point breaks every row") {
  for (int n = 1; n <= 4; ++n) {
    auto witness = patterns::canonical_eqtree_pattern(n, 4);
    CHECK(witness.spec.depth() == n);
    auto verdict = patterns::verify(witness.spec);
    CHECK(verdict.verified);

    std::vector<indisc::Sequence> rows;
    for (int r = 0; r < n; ++r) rows.push_back(patterns::row_sequence(witness.spec, r));
    auto broken =
        indisc::broken_count(rows, patterns::base_points(witness.spec),
                             witness.c, witness.spec.formulas, 2);
    CHECK(broken.broken == n);
  }
}

TEST_CASE("duplicated unit rows fail verification") {
  auto lib = patterns::pattern_library(TheoryId::Dlo, 1, 0);
  REQUIRE(!lib.empty());
  PatternUnit interval = lib[0];
  PatternSpec spec = patterns::assemble(TheoryId::Dlo, 0, {interval, interval}, 4);
  auto verdict = patterns::verify(spec);
  CHECK_FALSE(verdict.verified);
  CHECK_FALSE(verdict.failures.empty());
}

TEST_CASE("library composition per theory") {
  auto dlo = patterns::pattern_library(TheoryId::Dlo, 1, 0);
  CHECK(dlo.size() == 3);
  auto ddlo = patterns::pattern_library(TheoryId::Ddlo, 1, 0);
  CHECK(ddlo.size() == 5);
  auto tree = patterns::pattern_library(TheoryId::Eqtree, 1, 3);
  CHECK(tree.size() == 4);
  auto wide = patterns::pattern_library(TheoryId::Dlo, 2, 0);
  CHECK(wide.size() == 6);

  std::set<std::string> names;
  for (const auto& u : ddlo) names.insert(u.name());
  CHECK(names.size() == ddlo.size());
}

TEST_CASE("depth search finds the known depths") {
  patterns::SearchConfig cfg;
  cfg.row_length = 4;
  cfg.max_depth = 3;

  cfg.theory = TheoryId::Dlo;
  auto dlo = patterns::depth_search(cfg);
  CHECK(dlo.depth == 1);
  CHECK(dlo.verdict.verified);
  CHECK(dlo.combos_tried > 0);

  cfg.theory = TheoryId::Ddlo;
  auto ddlo = patterns::depth_search(cfg);
  CHECK(ddlo.depth == 2);
  CHECK(ddlo.best.depth() == 2);

  cfg.theory = TheoryId::Eqtree;
  cfg.level_count = 3;
  auto tree = patterns::depth_search(cfg);
  CHECK(tree.depth == 2);

  cfg.theory = TheoryId::EqtreeRev;
  auto rev = patterns::depth_search(cfg);
  CHECK(rev.depth == 2);
}

TEST_CASE("eta budget is enforced") {
  PatternSpec spec = patterns::canonical_ddlo_pattern(5);
  patterns::VerifyOptions opts;
  opts.eta_budget = 10;
  CHECK_THROWS_AS(patterns::verify(spec, opts), resource_error);
}

TEST_CASE("row and formula arity must agree") {
  PatternSpec spec = patterns::canonical_ddlo_pattern(3);
  spec.formulas[0] = theory::parse_formula("y0 <1 x & x <1 y2");
  CHECK_THROWS_AS(patterns::verify(spec), input_error);
}

TEST_CASE("pattern json round trip") {
  PatternSpec spec = patterns::canonical_ddlo_pattern(4);
  std::string text = patterns::save_pattern_json(spec);
  PatternSpec back = patterns::load_pattern_json(text);
  CHECK(back.depth() == spec.depth());
  CHECK(back.x_arity == spec.x_arity);
  CHECK(back.sample.points.size() == spec.sample.points.size());
  REQUIRE(back.formulas.size() == spec.formulas.size());
  for (std::size_t i = 0; i < spec.formulas.size(); ++i) {
    CHECK(theory::print_formula(back.formulas[i]) ==
          theory::print_formula(spec.formulas[i]));
  }
  auto verdict = patterns::verify(back);
  CHECK(verdict.verified);
}

TEST_CASE("pattern json rejects malformed input") {
  CHECK_THROWS_AS(patterns::load_pattern_json("not json"), io_error);
  CHECK_THROWS_AS(patterns::load_pattern_json("{\"rows\": 3}"), io_error);
}

TEST_CASE("assembled tree rows separate at their own relation") {
  auto lib = patterns::pattern_library(TheoryId::Eqtree, 1, 3);
  std::vector<PatternUnit> classes;
  for (const auto& u : lib) {
    if (u.kind == PatternUnit::Kind::ClassSingles &&
        theory::level(u.rel) == 2) {
      classes.push_back(u);
    }
  }
  REQUIRE(classes.size() == 2);
  PatternSpec spec = patterns::assemble(TheoryId::Eqtree, 3, classes, 3);
  auto verdict = patterns::verify(spec);
  CHECK(verdict.verified);
  CHECK(verdict.depth == 2);
}

TEST_CASE("unit names and formulas are consistent") {
  for (TheoryId th : {TheoryId::Dlo, TheoryId::Ddlo}) {
    for (const auto& u : patterns::pattern_library(th, 2, 0)) {
      CHECK_FALSE(u.name().empty());
      auto f = u.formula();
      CHECK(f.y_arity >= 1);
    }
  }
}
