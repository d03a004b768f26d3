#pragma once

#include <optional>
#include <vector>

#include "dpkit/formula.hpp"
#include "dpkit/theory.hpp"

namespace dpkit::indisc {

// A sequence of same-width point tuples read in a fixed theory. Tuples come
// from (but need not belong to) a host sample; the theory and level count
// travel with the sequence so atoms can be evaluated without extra context.
struct Sequence {
  theory::TheoryId theory = theory::TheoryId::Dlo;
  int level_count = 2;
  int width = 1;
  std::vector<theory::PointTuple> tuples;

  int length() const { return static_cast<int>(tuples.size()); }
};

// Builds a sequence of width-w tuples from point indices of the sample.
Sequence make_sequence(const theory::TheorySample& sample,
                       const std::vector<std::vector<int>>& index_tuples,
                       int width);

// Width-1 convenience form.
Sequence make_singletons(const theory::TheorySample& sample,
                         const std::vector<int>& indices);

// A concrete reason two increasing index tuples disagree: one atom, stated
// over parameter slots y0.. that flatten the compared tuples followed by the
// base points.
struct Witness {
  theory::Formula atom;
  std::vector<int> first;   // positions in the sequence
  std::vector<int> second;
};

struct Report {
  bool ok = true;
  int arity_checked = 0;
  std::optional<Witness> witness;
};

// Checks that all increasing tuples of each arity k <= max_arity have equal
// atomic type over the base points, using the relations mentioned in delta
// (plus equality); an empty delta means every relation of the theory. On
// failure the witness is the lexicographically first disagreement: smallest
// arity, then smallest comparison tuple, then first atom in scan order.
Report check(const Sequence& seq, const theory::PointTuple& base,
             const std::vector<theory::Formula>& delta, int max_arity);

struct MutualReport {
  bool ok = true;
  int offender = -1;  // first row that fails, -1 when ok
  std::vector<Report> rows;
};

// Each row must be indiscernible over the base together with every other
// row's points. Arity is clamped to each row's length.
MutualReport mutual_check(const std::vector<Sequence>& rows,
                          const theory::PointTuple& base,
                          const std::vector<theory::Formula>& delta,
                          int max_arity);

struct BrokenReport {
  int broken = 0;
  std::vector<Report> rows;
};

// How many rows stop being indiscernible once the point c joins the base.
// Requires the rows to be mutually indiscernible without c (contract_error).
BrokenReport broken_count(const std::vector<Sequence>& rows,
                          const theory::PointTuple& base,
                          const theory::Point& c,
                          const std::vector<theory::Formula>& delta,
                          int max_arity);

}  // namespace dpkit::indisc
