#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "dpkit/formula.hpp"
#include "dpkit/theory.hpp"

namespace dpkit::oracle {

// One side of an atomic constraint: a free variable x_i or a concrete point.
struct AtomArg {
  bool is_var = false;
  int var = 0;
  theory::Point point;

  static AtomArg x(int index) {
    AtomArg a;
    a.is_var = true;
    a.var = index;
    return a;
  }
  static AtomArg param(theory::Point p) {
    AtomArg a;
    a.point = std::move(p);
    return a;
  }
};

struct SignedAtom {
  bool positive = true;
  theory::RelationId rel;
  AtomArg lhs, rhs;
};

// A conjunction of signed atoms over x0..x_{arity-1} and concrete parameters,
// interpreted in the named theory. level_count matters only for the
// equivalence-tree theories.
struct ConstraintSet {
  theory::TheoryId theory = theory::TheoryId::Dlo;
  int level_count = 2;
  int x_arity = 1;
  std::vector<SignedAtom> atoms;

  void require(bool positive, theory::RelationId rel, AtomArg lhs, AtomArg rhs) {
    atoms.push_back(SignedAtom{positive, rel, std::move(lhs), std::move(rhs)});
  }
};

// Decides whether some choice of x-points in a model of the theory satisfies
// every atom. Complete for the four shipped theories: the solver enumerates,
// for each variable, identification with a mentioned parameter or a fresh
// element, and solves order constraints by interval and cycle analysis and
// equivalence constraints by congruence closure per relation.
bool consistent(const ConstraintSet& cs);

// A formula with its parameter tuple plugged in, asserted or denied.
struct InstFormula {
  theory::Formula formula;
  theory::PointTuple args;
  bool positive = true;
};

InstFormula instantiate(theory::Formula formula, theory::PointTuple args,
                        bool positive);

// Conjunction of a base constraint set with instantiated formula literals.
struct ConstraintExpr {
  ConstraintSet base;
  std::vector<InstFormula> parts;
};

inline constexpr std::uint64_t kDefaultDnfBudget = 4096;

struct DnfStats {
  std::uint64_t branches_explored = 0;
};

// Satisfiability of the conjunction. Formulas are expanded lazily into signed
// atom branches (disjunctions, negated conjunctions and both phases of <->
// fork); each completed part re-runs the atom solver so dead prefixes are
// abandoned early. branch_budget caps the number of branch alternatives
// explored; exceeding it raises resource_error.
bool dnf_consistent(const ConstraintExpr& expr,
                    std::uint64_t branch_budget = kDefaultDnfBudget,
                    DnfStats* stats = nullptr);

// Value of DPKIT_BUDGET if set and a valid positive integer.
std::optional<std::uint64_t> env_budget();

}  // namespace dpkit::oracle
