#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dpkit/formula.hpp"
#include "dpkit/indisc.hpp"
#include "dpkit/oracle.hpp"
#include "dpkit/theory.hpp"

namespace dpkit::patterns {

// One row of a pattern: tuples named by point indices of the host sample.
struct PatternRow {
  int width = 1;
  std::vector<std::vector<int>> tuples;

  int length() const { return static_cast<int>(tuples.size()); }
};

// A candidate randomness pattern: rows of tuples inside one host sample,
// one formula per row, an optional base parameter set and an optional
// partial type constraining the realization variables.
struct PatternSpec {
  theory::TheorySample sample;
  int x_arity = 1;
  std::vector<PatternRow> rows;
  std::vector<theory::Formula> formulas;
  std::vector<int> base;  // point indices
  oracle::ConstraintSet partial_type;

  int depth() const { return static_cast<int>(rows.size()); }
};

indisc::Sequence row_sequence(const PatternSpec& spec, int row);
theory::PointTuple base_points(const PatternSpec& spec);

// The constraint set Gamma_eta: the partial type, row alpha's formula
// asserted at column eta[alpha] and denied at every other column.
oracle::ConstraintExpr gamma(const PatternSpec& spec,
                             const std::vector<int>& eta);

struct VerifyOptions {
  int max_arity = 3;
  std::uint64_t eta_budget = 1'000'000;
  std::uint64_t dnf_budget = oracle::kDefaultDnfBudget;
  bool stop_at_first_failure = false;
};

// Defaults with DPKIT_BUDGET applied to both budgets when set.
VerifyOptions default_verify_options();

struct PatternVerdict {
  bool verified = false;
  int depth = 0;
  bool mutual_ok = false;
  int mutual_offender = -1;
  std::vector<std::vector<int>> failures;  // eta vectors found inconsistent
  std::uint64_t eta_checked = 0;
};

// Checks mutual indiscernibility of the rows over the base, formula/row
// arity agreement, and consistency of every Gamma_eta in row-major order.
PatternVerdict verify(const PatternSpec& spec,
                      const VerifyOptions& opts = default_verify_options());

// ---- Shipped pattern building blocks ----

struct PatternUnit {
  enum class Kind { OrderPairs, EqSingles, CutSingles, ClassSingles };
  Kind kind = Kind::EqSingles;
  int var = 0;
  int order = 1;                      // OrderPairs, CutSingles
  theory::RelationId rel;             // ClassSingles

  std::string name() const;
  theory::Formula formula() const;
};

// Candidate units for one theory: interval, equality and cut rows for the
// orders, one class row per equivalence relation plus equality rows for the
// tree theories; everything duplicated per realization variable.
std::vector<PatternUnit> pattern_library(theory::TheoryId theory, int x_arity,
                                         int level_count);

// Builds a synthetic host sample realizing the chosen units as mutually
// indiscernible rows: disjoint rank bands for the orders, class layouts
// shared above and separated at each unit's own relation for the trees.
// The seed only jitters order ranks; it never changes verification results.
PatternSpec assemble(theory::TheoryId theory, int level_count,
                     const std::vector<PatternUnit>& units, int row_length,
                     std::uint64_t seed = 0);

struct SearchConfig {
  theory::TheoryId theory = theory::TheoryId::Dlo;
  int level_count = 2;
  int x_arity = 1;
  int max_depth = 4;
  int row_length = 4;
  int max_arity = 3;
  std::uint64_t eta_budget = 1'000'000;
  std::uint64_t dnf_budget = oracle::kDefaultDnfBudget;
  std::uint64_t seed = 1;
};

struct SearchResult {
  int depth = 0;
  PatternSpec best;
  PatternVerdict verdict;
  std::uint64_t combos_tried = 0;
};

// Largest depth at which some multiset of library units verifies, trying
// depths from max_depth downward, repetition-free combinations first.
SearchResult depth_search(const SearchConfig& cfg);

// The double-order witness: one interval row per order, depth 2.
PatternSpec canonical_ddlo_pattern(int row_length, std::uint64_t seed = 0);

// The depth-n tree witness at level count n+1: one class row per relation
// at the top level, plus the point c equivalent to each row's first element
// at that row's relation. Adding c to the base breaks every row.
struct TreeWitness {
  PatternSpec spec;
  theory::Point c;
};
TreeWitness canonical_eqtree_pattern(int n, int row_length);

std::string save_pattern_json(const PatternSpec& spec);
PatternSpec load_pattern_json(const std::string& text);

}  // namespace dpkit::patterns
