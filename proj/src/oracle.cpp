#include "dpkit/oracle.hpp"

#include <algorithm>
#include <cstdlib>
#include <limits>
#include <string>
#include <utility>

#include "dpkit/errors.hpp"

namespace dpkit::oracle {
namespace {

using theory::Point;
using theory::RelationId;
using theory::TheoryId;

bool order_theory(TheoryId t) {
  return t == TheoryId::Dlo || t == TheoryId::Ddlo;
}

int expected_width(TheoryId t, int level_count) {
  switch (t) {
    case TheoryId::Dlo:
      return 1;
    case TheoryId::Ddlo:
      return 2;
    default:
      return static_cast<int>(theory::eq_relations(level_count).size());
  }
}

void check_atom(const ConstraintSet& cs, const SignedAtom& a, int width) {
  switch (a.rel.kind) {
    case RelationId::Kind::Equality:
      break;
    case RelationId::Kind::Order1:
      if (!order_theory(cs.theory))
        throw input_error("order atom in an equivalence theory");
      break;
    case RelationId::Kind::Order2:
      if (cs.theory != TheoryId::Ddlo)
        throw input_error("<2 atom outside the double order theory");
      break;
    case RelationId::Kind::Equiv:
      if (order_theory(cs.theory))
        throw input_error("equivalence atom in an order theory");
      theory::eq_relation_index(cs.level_count, a.rel);
      break;
  }
  for (const AtomArg* side : {&a.lhs, &a.rhs}) {
    if (side->is_var) {
      if (side->var < 0 || side->var >= cs.x_arity)
        throw input_error("constraint variable index out of range");
    } else if (static_cast<int>(side->point.coords.size()) != width) {
      throw input_error("constraint parameter has wrong width");
    }
  }
}

// Entity ids during a pattern check: 0..P-1 name the deduplicated parameters,
// P..P+x_arity-1 name fresh elements.
struct Prepared {
  const ConstraintSet* cs = nullptr;
  std::vector<Point> params;
  // Atom sides resolved to: var index (>= 0) or ~param index (< 0).
  struct Side {
    int var = -1;
    int param = -1;
    bool is_var() const { return var >= 0; }
  };
  struct RAtom {
    bool positive;
    RelationId rel;
    Side lhs, rhs;
  };
  std::vector<RAtom> atoms;
  bool coupled = false;  // some atom mentions two distinct variables
};

int intern_param(std::vector<Point>& params, const Point& p) {
  for (std::size_t i = 0; i < params.size(); ++i)
    if (params[i] == p) return static_cast<int>(i);
  params.push_back(p);
  return static_cast<int>(params.size()) - 1;
}

Prepared prepare(const ConstraintSet& cs) {
  Prepared pre;
  pre.cs = &cs;
  const int width = expected_width(cs.theory, cs.level_count);
  for (const SignedAtom& a : cs.atoms) {
    check_atom(cs, a, width);
    Prepared::RAtom r;
    r.positive = a.positive;
    r.rel = a.rel;
    for (auto [src, dst] :
         {std::pair{&a.lhs, &r.lhs}, std::pair{&a.rhs, &r.rhs}}) {
      if (src->is_var)
        dst->var = src->var;
      else
        dst->param = intern_param(pre.params, src->point);
    }
    if (r.lhs.is_var() && r.rhs.is_var() && r.lhs.var != r.rhs.var)
      pre.coupled = true;
    pre.atoms.push_back(std::move(r));
  }
  return pre;
}

bool eval_const(const Prepared& pre, const Prepared::RAtom& a, int lp, int rp) {
  bool v = theory::eval_atom(pre.cs->theory, pre.cs->level_count, a.rel,
                             pre.params[static_cast<std::size_t>(lp)],
                             pre.params[static_cast<std::size_t>(rp)]);
  return v == a.positive;
}

int order_index(const RelationId& rel) {
  return rel.kind == RelationId::Kind::Order2 ? 1 : 0;
}

constexpr std::int64_t kNegInf = std::numeric_limits<std::int64_t>::min();
constexpr std::int64_t kPosInf = std::numeric_limits<std::int64_t>::max();

// Open rank interval; in a dense order (lo, hi) is inhabited iff lo < hi.
struct Interval {
  std::int64_t lo = kNegInf;
  std::int64_t hi = kPosInf;
  bool ok() const { return lo < hi; }
};

// Closure direction for the equivalence families: in the forward theory a
// positive s-atom implies the same atom at every coarser (higher) relation,
// in the reversed theory at every finer (lower) one.
bool closes_to(TheoryId t, const RelationId& s, const RelationId& target) {
  if (t == TheoryId::EqtreeRev) return theory::rel_below(target, s);
  return theory::rel_below(s, target);
}

bool data_equiv(const Prepared& pre, int pa, int pb, const RelationId& rel) {
  return theory::eval_atom(pre.cs->theory, pre.cs->level_count, rel,
                           pre.params[static_cast<std::size_t>(pa)],
                           pre.params[static_cast<std::size_t>(pb)]);
}

// Single-variable feasibility with the variable a fresh element (distinct
// from every mentioned parameter). Atoms must touch no other variable.
bool fresh_feasible(const Prepared& pre, int var) {
  const TheoryId th = pre.cs->theory;
  if (order_theory(th)) {
    Interval iv[2];
    for (const auto& a : pre.atoms) {
      bool l = a.lhs.is_var(), r = a.rhs.is_var();
      if (!l && !r) continue;
      if (a.rel.kind == RelationId::Kind::Equality) {
        if (l && r) {
          if (!a.positive) return false;  // x = x denied
          continue;
        }
        if (a.positive) return false;  // fresh element equals no parameter
        continue;
      }
      int o = order_index(a.rel);
      if (l && r) {
        if (a.positive) return false;  // x < x
        continue;
      }
      std::int64_t rank = pre.params[static_cast<std::size_t>(l ? a.rhs.param
                                                                : a.lhs.param)]
                              .coords[static_cast<std::size_t>(o)];
      bool var_on_left = l;
      bool upper = (var_on_left == a.positive);
      if (upper)
        iv[o].hi = std::min(iv[o].hi, rank);
      else
        iv[o].lo = std::max(iv[o].lo, rank);
    }
    (void)var;
    return iv[0].ok() && iv[1].ok();
  }
  // Equivalence tree: gather signed class requirements, close positives
  // across the relation order, then look for clashes.
  std::vector<std::pair<RelationId, int>> pos, neg;
  for (const auto& a : pre.atoms) {
    bool l = a.lhs.is_var(), r = a.rhs.is_var();
    if (!l && !r) continue;
    if (a.rel.kind == RelationId::Kind::Equality) {
      if (l && r) {
        if (!a.positive) return false;
        continue;
      }
      if (a.positive) return false;
      continue;
    }
    if (l && r) {
      if (!a.positive) return false;  // x E x denied
      continue;
    }
    int p = l ? a.rhs.param : a.lhs.param;
    (a.positive ? pos : neg).emplace_back(a.rel, p);
  }
  for (const RelationId& t : theory::eq_relations(pre.cs->level_count)) {
    int anchor = -1;
    for (const auto& [s, p] : pos) {
      if (!closes_to(th, s, t)) continue;
      if (anchor < 0)
        anchor = p;
      else if (!data_equiv(pre, anchor, p, t))
        return false;
    }
    if (anchor < 0) continue;
    for (const auto& [s, p] : neg)
      if (s == t && data_equiv(pre, anchor, p, t)) return false;
  }
  return true;
}

// Single-variable feasibility with the variable pinned to parameter pin.
bool pinned_feasible(const Prepared& pre, int pin) {
  for (const auto& a : pre.atoms) {
    bool l = a.lhs.is_var(), r = a.rhs.is_var();
    if (!l && !r) continue;
    int lp = l ? pin : a.lhs.param;
    int rp = r ? pin : a.rhs.param;
    if (!eval_const(pre, a, lp, rp)) return false;
  }
  return true;
}

// ---- Joint assignment checking (atoms may couple variables) ----

// assignment[v]: >= 0 pins variable v to that parameter; < 0 marks fresh
// slot ~assignment[v].
struct OrderGraph {
  int slots;
  std::vector<Interval> iv[2];
  std::vector<std::vector<int>> succ[2];
  std::vector<int> indeg[2];

  explicit OrderGraph(int n) : slots(n) {
    for (int o = 0; o < 2; ++o) {
      iv[o].assign(static_cast<std::size_t>(n), Interval{});
      succ[o].assign(static_cast<std::size_t>(n), {});
      indeg[o].assign(static_cast<std::size_t>(n), 0);
    }
  }
  void edge(int o, int u, int v) {
    succ[o][static_cast<std::size_t>(u)].push_back(v);
    ++indeg[o][static_cast<std::size_t>(v)];
  }
  bool solve() {
    for (int o = 0; o < 2; ++o) {
      std::vector<int> ready;
      std::vector<int> deg = indeg[o];
      for (int v = 0; v < slots; ++v)
        if (deg[static_cast<std::size_t>(v)] == 0) ready.push_back(v);
      int seen = 0;
      while (!ready.empty()) {
        int u = ready.back();
        ready.pop_back();
        ++seen;
        auto& ui = iv[o][static_cast<std::size_t>(u)];
        if (!ui.ok()) return false;
        for (int v : succ[o][static_cast<std::size_t>(u)]) {
          auto& vi = iv[o][static_cast<std::size_t>(v)];
          vi.lo = std::max(vi.lo, ui.lo);
          if (--deg[static_cast<std::size_t>(v)] == 0) ready.push_back(v);
        }
      }
      if (seen != slots) return false;  // strict cycle
      for (int v = 0; v < slots; ++v)
        if (!iv[o][static_cast<std::size_t>(v)].ok()) return false;
    }
    return true;
  }
};

struct UnionFind {
  std::vector<int> up;
  explicit UnionFind(int n) : up(static_cast<std::size_t>(n)) {
    for (int i = 0; i < n; ++i) up[static_cast<std::size_t>(i)] = i;
  }
  int find(int a) {
    while (up[static_cast<std::size_t>(a)] != a) {
      up[static_cast<std::size_t>(a)] =
          up[static_cast<std::size_t>(up[static_cast<std::size_t>(a)])];
      a = up[static_cast<std::size_t>(a)];
    }
    return a;
  }
  void join(int a, int b) { up[static_cast<std::size_t>(find(a))] = find(b); }
};

bool assignment_feasible(const Prepared& pre, const std::vector<int>& assign,
                         int slot_count) {
  const TheoryId th = pre.cs->theory;
  const int P = static_cast<int>(pre.params.size());
  // Resolve a side to parameter id (>= 0) or fresh slot id encoded as P+slot.
  auto resolve = [&](const Prepared::Side& s) {
    if (!s.is_var()) return s.param;
    int a = assign[static_cast<std::size_t>(s.var)];
    return a >= 0 ? a : P + ~a;
  };
  auto is_param = [&](int e) { return e < P; };

  if (order_theory(th)) {
    OrderGraph g(slot_count);
    for (const auto& a : pre.atoms) {
      int le = resolve(a.lhs), re = resolve(a.rhs);
      if (is_param(le) && is_param(re)) {
        if (!eval_const(pre, a, le, re)) return false;
        continue;
      }
      if (a.rel.kind == RelationId::Kind::Equality) {
        if (le == re) {
          if (!a.positive) return false;
        } else if (a.positive) {
          return false;  // distinct slots, or slot vs parameter
        }
        continue;
      }
      int o = order_index(a.rel);
      if (le == re) {
        if (a.positive) return false;
        continue;
      }
      if (!is_param(le) && !is_param(re)) {
        int u = le - P, v = re - P;
        if (a.positive)
          g.edge(o, u, v);
        else
          g.edge(o, v, u);
        continue;
      }
      bool var_on_left = !is_param(le);
      int slot = (var_on_left ? le : re) - P;
      std::int64_t rank =
          pre.params[static_cast<std::size_t>(var_on_left ? re : le)]
              .coords[static_cast<std::size_t>(o)];
      auto& iv = g.iv[o][static_cast<std::size_t>(slot)];
      if (var_on_left == a.positive)
        iv.hi = std::min(iv.hi, rank);
      else
        iv.lo = std::max(iv.lo, rank);
    }
    return g.solve();
  }

  // Equivalence tree joint check: congruence closure per relation over
  // parameters and fresh slots together.
  for (const auto& a : pre.atoms) {
    int le = resolve(a.lhs), re = resolve(a.rhs);
    if (is_param(le) && is_param(re)) {
      if (!eval_const(pre, a, le, re)) return false;
    } else if (a.rel.kind == RelationId::Kind::Equality) {
      if (le == re) {
        if (!a.positive) return false;
      } else if (a.positive) {
        return false;
      }
    }
  }
  for (const RelationId& t : theory::eq_relations(pre.cs->level_count)) {
    UnionFind uf(P + slot_count);
    for (int i = 1; i < P; ++i)
      for (int j = 0; j < i; ++j)
        if (data_equiv(pre, i, j, t)) uf.join(i, j);
    for (const auto& a : pre.atoms) {
      if (a.rel.kind != RelationId::Kind::Equiv || !a.positive) continue;
      if (!closes_to(th, a.rel, t)) continue;
      int le = resolve(a.lhs), re = resolve(a.rhs);
      if (is_param(le) && is_param(re)) continue;
      uf.join(le, re);
    }
    std::vector<int> rep(static_cast<std::size_t>(P + slot_count), -1);
    for (int i = 0; i < P; ++i) {
      int r = uf.find(i);
      int& seen = rep[static_cast<std::size_t>(r)];
      if (seen >= 0 && !data_equiv(pre, seen, i, t)) return false;
      if (seen < 0) seen = i;
    }
    for (const auto& a : pre.atoms) {
      if (a.rel.kind != RelationId::Kind::Equiv || a.positive) continue;
      if (a.rel != t) continue;
      int le = resolve(a.lhs), re = resolve(a.rhs);
      if (is_param(le) && is_param(re)) continue;
      if (uf.find(le) == uf.find(re)) return false;
    }
  }
  return true;
}

bool joint_search(const Prepared& pre, std::vector<int>& assign, int var,
                  int slots_used) {
  const int k = pre.cs->x_arity;
  if (var == k) return assignment_feasible(pre, assign, slots_used);
  // Fresh slot first (new, then sharing an existing slot), then each pin.
  for (int s = slots_used; s >= 0; --s) {
    int grow = (s == slots_used) ? 1 : 0;
    assign[static_cast<std::size_t>(var)] = ~s;
    if (joint_search(pre, assign, var + 1, slots_used + grow)) return true;
  }
  for (int p = 0; p < static_cast<int>(pre.params.size()); ++p) {
    assign[static_cast<std::size_t>(var)] = p;
    if (joint_search(pre, assign, var + 1, slots_used)) return true;
  }
  return false;
}

// Restriction of a prepared set to the atoms touching one variable.
Prepared restrict_to_var(const Prepared& pre, int var) {
  Prepared sub;
  sub.cs = pre.cs;
  sub.params = pre.params;
  for (const auto& a : pre.atoms)
    if ((a.lhs.is_var() && a.lhs.var == var) ||
        (a.rhs.is_var() && a.rhs.var == var))
      sub.atoms.push_back(a);
  return sub;
}

}  // namespace

bool consistent(const ConstraintSet& cs) {
  if (cs.x_arity < 0) throw input_error("negative arity");
  if (!order_theory(cs.theory) && cs.level_count < 1)
    throw input_error("level count must be at least 1");
  Prepared pre = prepare(cs);

  for (const auto& a : pre.atoms)
    if (!a.lhs.is_var() && !a.rhs.is_var())
      if (!eval_const(pre, a, a.lhs.param, a.rhs.param)) return false;

  if (!pre.coupled) {
    for (int v = 0; v < cs.x_arity; ++v) {
      Prepared sub = restrict_to_var(pre, v);
      if (sub.atoms.empty()) continue;
      if (fresh_feasible(sub, v)) continue;
      bool ok = false;
      for (int p = 0; p < static_cast<int>(sub.params.size()) && !ok; ++p)
        ok = pinned_feasible(sub, p);
      if (!ok) return false;
    }
    return true;
  }

  std::vector<int> assign(static_cast<std::size_t>(cs.x_arity), 0);
  return joint_search(pre, assign, 0, 0);
}

InstFormula instantiate(theory::Formula formula, theory::PointTuple args,
                        bool positive) {
  if (static_cast<int>(args.size()) < formula.y_arity)
    throw input_error("instantiation tuple shorter than the formula's parameter arity");
  return InstFormula{std::move(formula), std::move(args), positive};
}

namespace {

struct DnfSearch {
  const ConstraintExpr* expr;
  ConstraintSet work;
  std::uint64_t budget;
  std::uint64_t used = 0;

  void spend() {
    if (++used > budget)
      throw resource_error(
          "branch budget exhausted after " + std::to_string(budget) +
          " alternatives; raise the budget or simplify the formulas");
  }

  AtomArg side(const theory::VarRef& v, const theory::PointTuple& args) {
    if (v.is_x) return AtomArg::x(v.index);
    if (v.index >= static_cast<int>(args.size()))
      throw input_error("formula parameter slot has no argument");
    return AtomArg::param(args[static_cast<std::size_t>(v.index)]);
  }

  using Todo = std::vector<std::pair<const theory::Formula*, bool>>;

  bool part_done(int part) {
    if (!consistent(work)) return false;
    return next_part(part + 1);
  }

  bool next_part(int part) {
    if (part == static_cast<int>(expr->parts.size())) return true;
    const InstFormula& f = expr->parts[static_cast<std::size_t>(part)];
    Todo todo{{&f.formula, f.positive}};
    return expand(part, todo);
  }

  bool expand(int part, Todo& todo) {
    if (todo.empty()) return part_done(part);
    auto [f, sign] = todo.back();
    todo.pop_back();
    bool found = step(part, todo, *f, sign);
    todo.emplace_back(f, sign);
    return found;
  }

  bool step(int part, Todo& todo, const theory::Formula& f, bool sign) {
    using Op = theory::Formula::Op;
    const auto& args = expr->parts[static_cast<std::size_t>(part)].args;
    switch (f.op) {
      case Op::Atom: {
        work.require(sign, f.rel, side(f.lhs, args), side(f.rhs, args));
        bool found = expand(part, todo);
        work.atoms.pop_back();
        return found;
      }
      case Op::Not: {
        todo.emplace_back(&f.kids[0], !sign);
        bool found = expand(part, todo);
        todo.pop_back();
        return found;
      }
      case Op::And:
      case Op::Or: {
        bool conjunctive = (f.op == Op::And) == sign;
        if (conjunctive) {
          todo.emplace_back(&f.kids[0], sign);
          todo.emplace_back(&f.kids[1], sign);
          bool found = expand(part, todo);
          todo.pop_back();
          todo.pop_back();
          return found;
        }
        for (const theory::Formula& kid : f.kids) {
          spend();
          todo.emplace_back(&kid, sign);
          bool found = expand(part, todo);
          todo.pop_back();
          if (found) return true;
        }
        return false;
      }
      case Op::Iff: {
        for (bool left : {true, false}) {
          spend();
          todo.emplace_back(&f.kids[0], left);
          todo.emplace_back(&f.kids[1], sign == left);
          bool found = expand(part, todo);
          todo.pop_back();
          todo.pop_back();
          if (found) return true;
        }
        return false;
      }
    }
    throw contract_error("unhandled formula node");
  }
};

}  // namespace

bool dnf_consistent(const ConstraintExpr& expr, std::uint64_t branch_budget,
                    DnfStats* stats) {
  for (const InstFormula& part : expr.parts) {
    if (part.formula.x_arity > expr.base.x_arity)
      throw input_error("formula uses more x variables than the constraint declares");
    if (part.formula.y_arity > static_cast<int>(part.args.size()))
      throw input_error("instantiation tuple shorter than the formula's parameter arity");
  }
  if (!consistent(expr.base)) return false;
  DnfSearch search{&expr, expr.base, branch_budget};
  bool found = search.next_part(0);
  if (stats) stats->branches_explored = search.used;
  return found;
}

std::optional<std::uint64_t> env_budget() {
  const char* raw = std::getenv("DPKIT_BUDGET");
  if (!raw || !*raw) return std::nullopt;
  char* end = nullptr;
  unsigned long long v = std::strtoull(raw, &end, 10);
  if (end == raw || *end != '\0' || v == 0)
    throw input_error("DPKIT_BUDGET must be a positive integer");
  return static_cast<std::uint64_t>(v);
}

}  // namespace dpkit::oracle
