#pragma once

#include <string>
#include <vector>

#include "dpkit/theory.hpp"

namespace dpkit::theory {

// A variable slot of a formula: either one of the free variables x0, x1, ...
// or one of the parameter slots y0, y1, ...
struct VarRef {
  bool is_x = false;
  int index = 0;

  bool operator==(const VarRef& o) const { return is_x == o.is_x && index == o.index; }
};

// Boolean combination of atoms R(u, v) where u, v are variable slots. The
// declared arities bound the slot indices actually used; a formula knows how
// wide its x tuple and y tuple are so instantiation can check arguments.
struct Formula {
  enum class Op { Atom, Not, And, Or, Iff };

  Op op = Op::Atom;
  RelationId rel;  // Atom only
  VarRef lhs, rhs;  // Atom only
  std::vector<Formula> kids;

  int x_arity = 0;
  int y_arity = 0;

  static Formula atom(RelationId rel, VarRef lhs, VarRef rhs);
  static Formula negate(Formula f);
  static Formula conj(Formula a, Formula b);
  static Formula disj(Formula a, Formula b);
  static Formula iff(Formula a, Formula b);
};

// Text syntax used by the CLI and the pattern spec files:
//   atoms        x<1 y0    x<2 y0    x=y0    x E(1,2) y0    y0<1 y1
//   connectives  !f   f & g   f | g   f <-> g   parentheses
// "x" and "y" abbreviate x0 and y0; "<" abbreviates "<1".
Formula parse_formula(const std::string& text);
std::string print_formula(const Formula& f);

// Truth of f at (x_args, y_args) in a model of the given theory.
bool eval(const Formula& f, TheoryId theory, int level_count,
          const PointTuple& x_args, const PointTuple& y_args);

// All relations appearing in f.
void collect_relations(const Formula& f, std::vector<RelationId>& out);

}  // namespace dpkit::theory
