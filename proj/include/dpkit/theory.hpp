#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace dpkit::theory {

enum class TheoryId { Dlo, Ddlo, Eqtree, EqtreeRev };

std::string theory_name(TheoryId t);
TheoryId theory_from_name(const std::string& name);

// Relation symbols. Orders and equality are shared; Equiv names one of the
// nested equivalence relations, identified by a pair (m, n) with m < n.
// The pair's second component is its level; relations of lower level refine
// relations of higher level in the forward theory, and the reversed theory
// flips that direction. Equality behaves as the unique relation of level -1.
struct RelationId {
  enum class Kind { Order1, Order2, Equality, Equiv };
  Kind kind = Kind::Equality;
  int m = -1;
  int n = -1;

  static RelationId order1() { return {Kind::Order1, -1, -1}; }
  static RelationId order2() { return {Kind::Order2, -1, -1}; }
  static RelationId equality() { return {Kind::Equality, -1, -1}; }
  static RelationId equiv(int m, int n) { return {Kind::Equiv, m, n}; }

  bool operator==(const RelationId& o) const {
    return kind == o.kind && m == o.m && n == o.n;
  }
  bool operator!=(const RelationId& o) const { return !(*this == o); }
};

// Level of an equivalence-family relation; equality sits at level -1.
int level(const RelationId& r);

// The partial order on relation symbols: s below t iff level(s) < level(t),
// plus reflexivity. Symbols of equal level are incomparable unless equal.
bool rel_below(const RelationId& s, const RelationId& t);

std::string relation_name(const RelationId& r);

// All equivalence relations for truncation level L, ordered by (level, m).
std::vector<RelationId> eq_relations(int level_count);

// Index of an equivalence relation within eq_relations(level_count).
int eq_relation_index(int level_count, const RelationId& r);

// The n pairwise incomparable relations (0,n) ... (n-1,n) at level n.
// Requires 1 <= n < level_count.
std::vector<RelationId> incomparable_relations(int level_count, int n);

// One element of a finite model. Coordinates depend on the theory:
//   Dlo:    {rank}
//   Ddlo:   {rank1, rank2}
//   Eqtree: one class id per equivalence relation, in eq_relations order
struct Point {
  std::vector<std::int64_t> coords;

  bool operator==(const Point& o) const { return coords == o.coords; }
  bool operator!=(const Point& o) const { return coords != o.coords; }
};

using PointTuple = std::vector<Point>;

struct SampleParams {
  int size = 0;
  int level_count = 0;  // equivalence theories only
  int branching = 0;    // equivalence theories only
  std::uint64_t seed = 0;
};

struct TheorySample {
  TheoryId theory = TheoryId::Dlo;
  SampleParams params;
  std::vector<Point> points;

  int coord_count() const;
};

// Deterministic model generator. DLO: ranks 0..size-1. DDLO: rank1 in order,
// rank2 a seed-derived permutation. Equivalence theories: layered refinement,
// each relation at a level splitting every cell inherited from the levels it
// must respect into min(branching, cell) classes.
TheorySample sample(TheoryId theory, int size, std::uint64_t seed,
                    int level_count = 0, int branching = 0);

struct Violation {
  std::string message;
  int point_a = -1;
  int point_b = -1;
  RelationId rel_a;
  RelationId rel_b;
};

// Model invariants: distinct order ranks, class nesting in the variant's
// direction, coordinate width. Returns the first violation found.
std::optional<Violation> validate(const TheorySample& sample);

// Truth of one atomic relation between two points of the sample's theory.
bool eval_atom(TheoryId theory, int level_count, const RelationId& rel,
               const Point& lhs, const Point& rhs);

// Relations a formula over this theory may use (excluding equality).
std::vector<RelationId> theory_relations(TheoryId theory, int level_count);

std::string save_sample_json(const TheorySample& s);
TheorySample load_sample_json(const std::string& text);

}  // namespace dpkit::theory
