#include "dpkit/formula.hpp"

#include <algorithm>
#include <cctype>

#include "dpkit/errors.hpp"

namespace dpkit::theory {

namespace {
int merge_arity(const Formula& f, bool x) {
  return x ? f.x_arity : f.y_arity;
}
}  // namespace

Formula Formula::atom(RelationId rel, VarRef lhs, VarRef rhs) {
  Formula f;
  f.op = Op::Atom;
  f.rel = rel;
  f.lhs = lhs;
  f.rhs = rhs;
  if (lhs.is_x) f.x_arity = lhs.index + 1; else f.y_arity = lhs.index + 1;
  if (rhs.is_x) f.x_arity = std::max(f.x_arity, rhs.index + 1);
  else f.y_arity = std::max(f.y_arity, rhs.index + 1);
  return f;
}

Formula Formula::negate(Formula inner) {
  Formula f;
  f.op = Op::Not;
  f.x_arity = inner.x_arity;
  f.y_arity = inner.y_arity;
  f.kids.push_back(std::move(inner));
  return f;
}

static Formula binary(Formula::Op op, Formula a, Formula b) {
  Formula f;
  f.op = op;
  f.x_arity = std::max(merge_arity(a, true), merge_arity(b, true));
  f.y_arity = std::max(merge_arity(a, false), merge_arity(b, false));
  f.kids.push_back(std::move(a));
  f.kids.push_back(std::move(b));
  return f;
}

Formula Formula::conj(Formula a, Formula b) { return binary(Op::And, std::move(a), std::move(b)); }
Formula Formula::disj(Formula a, Formula b) { return binary(Op::Or, std::move(a), std::move(b)); }
Formula Formula::iff(Formula a, Formula b) { return binary(Op::Iff, std::move(a), std::move(b)); }

namespace {

struct Parser {
  const std::string& text;
  std::size_t pos = 0;

  explicit Parser(const std::string& t) : text(t) {}

  void skip_ws() {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  }

  bool eat(const std::string& tok) {
    skip_ws();
    if (text.compare(pos, tok.size(), tok) == 0) {
      pos += tok.size();
      return true;
    }
    return false;
  }

  char peek() {
    skip_ws();
    return pos < text.size() ? text[pos] : '\0';
  }

  [[noreturn]] void fail(const std::string& why) {
    throw input_error("formula parse failure at offset " + std::to_string(pos) + ": " + why);
  }

  int parse_int() {
    skip_ws();
    std::size_t start = pos;
    while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
    if (pos == start) fail("expected a number");
    return std::stoi(text.substr(start, pos - start));
  }

  VarRef parse_var() {
    skip_ws();
    if (pos >= text.size()) fail("expected a variable");
    char c = text[pos];
    if (c != 'x' && c != 'y') fail("expected x or y variable");
    ++pos;
    VarRef v;
    v.is_x = c == 'x';
    v.index = 0;
    if (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
      std::size_t start = pos;
      while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
      v.index = std::stoi(text.substr(start, pos - start));
    }
    return v;
  }

  RelationId parse_relation() {
    skip_ws();
    if (eat("<->")) fail("unexpected <-> where a relation was expected");
    if (eat("<1")) return RelationId::order1();
    if (eat("<2")) return RelationId::order2();
    if (eat("<")) return RelationId::order1();
    if (eat("=")) return RelationId::equality();
    if (eat("E(")) {
      int m = parse_int();
      if (!eat(",")) fail("expected , in E(m,n)");
      int n = parse_int();
      if (!eat(")")) fail("expected ) in E(m,n)");
      if (m < 0 || n <= m) fail("E(m,n) needs 0 <= m < n");
      return RelationId::equiv(m, n);
    }
    fail("expected a relation symbol");
  }

  Formula parse_atom_or_group() {
    skip_ws();
    if (eat("!")) return Formula::negate(parse_atom_or_group());
    if (eat("(")) {
      Formula f = parse_iff();
      if (!eat(")")) fail("expected )");
      return f;
    }
    VarRef lhs = parse_var();
    RelationId rel = parse_relation();
    VarRef rhs = parse_var();
    return Formula::atom(rel, lhs, rhs);
  }

  Formula parse_and() {
    Formula f = parse_atom_or_group();
    while (true) {
      skip_ws();
      if (peek() == '&' && eat("&")) f = Formula::conj(std::move(f), parse_atom_or_group());
      else return f;
    }
  }

  Formula parse_or() {
    Formula f = parse_and();
    while (true) {
      skip_ws();
      // Do not eat the | of a future token; there is none besides |.
      if (peek() == '|' && eat("|")) f = Formula::disj(std::move(f), parse_and());
      else return f;
    }
  }

  Formula parse_iff() {
    Formula f = parse_or();
    while (eat("<->")) f = Formula::iff(std::move(f), parse_or());
    return f;
  }
};

std::string var_text(const VarRef& v) {
  return (v.is_x ? "x" : "y") + std::to_string(v.index);
}

void print_rec(const Formula& f, std::string& out) {
  switch (f.op) {
    case Formula::Op::Atom:
      out += var_text(f.lhs);
      if (f.rel.kind == RelationId::Kind::Equiv) {
        out += " " + relation_name(f.rel) + " ";
      } else if (f.rel.kind == RelationId::Kind::Equality) {
        out += "=";
      } else {
        out += relation_name(f.rel) + " ";
      }
      out += var_text(f.rhs);
      return;
    case Formula::Op::Not:
      out += "!";
      if (f.kids[0].op == Formula::Op::Atom) print_rec(f.kids[0], out);
      else {
        out += "(";
        print_rec(f.kids[0], out);
        out += ")";
      }
      return;
    case Formula::Op::And:
    case Formula::Op::Or:
    case Formula::Op::Iff: {
      const char* sep = f.op == Formula::Op::And ? " & " : f.op == Formula::Op::Or ? " | " : " <-> ";
      out += "(";
      print_rec(f.kids[0], out);
      out += sep;
      print_rec(f.kids[1], out);
      out += ")";
      return;
    }
  }
}

}  // namespace

Formula parse_formula(const std::string& text) {
  Parser p(text);
  Formula f = p.parse_iff();
  p.skip_ws();
  if (p.pos != text.size()) p.fail("trailing input");
  return f;
}

std::string print_formula(const Formula& f) {
  std::string out;
  print_rec(f, out);
  return out;
}

bool eval(const Formula& f, TheoryId theory, int level_count,
          const PointTuple& x_args, const PointTuple& y_args) {
  switch (f.op) {
    case Formula::Op::Atom: {
      auto pick = [&](const VarRef& v) -> const Point& {
        const auto& tuple = v.is_x ? x_args : y_args;
        if (v.index < 0 || static_cast<std::size_t>(v.index) >= tuple.size())
          throw input_error("formula argument tuple too short for slot " + var_text(v));
        return tuple[static_cast<std::size_t>(v.index)];
      };
      return eval_atom(theory, level_count, f.rel, pick(f.lhs), pick(f.rhs));
    }
    case Formula::Op::Not:
      return !eval(f.kids[0], theory, level_count, x_args, y_args);
    case Formula::Op::And:
      return eval(f.kids[0], theory, level_count, x_args, y_args) &&
             eval(f.kids[1], theory, level_count, x_args, y_args);
    case Formula::Op::Or:
      return eval(f.kids[0], theory, level_count, x_args, y_args) ||
             eval(f.kids[1], theory, level_count, x_args, y_args);
    case Formula::Op::Iff:
      return eval(f.kids[0], theory, level_count, x_args, y_args) ==
             eval(f.kids[1], theory, level_count, x_args, y_args);
  }
  return false;
}

void collect_relations(const Formula& f, std::vector<RelationId>& out) {
  if (f.op == Formula::Op::Atom) {
    if (std::find(out.begin(), out.end(), f.rel) == out.end()) out.push_back(f.rel);
    return;
  }
  for (const auto& k : f.kids) collect_relations(k, out);
}

}  // namespace dpkit::theory
