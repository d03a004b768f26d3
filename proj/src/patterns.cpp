#include "dpkit/patterns.hpp"

#include <algorithm>
#include <string>
#include <utility>

#include <nlohmann/json.hpp>

#include "dpkit/errors.hpp"
#include "dpkit/rng.hpp"

namespace dpkit::patterns {
namespace {

using theory::Formula;
using theory::Point;
using theory::RelationId;
using theory::TheoryId;
using theory::VarRef;

bool order_theory(TheoryId t) {
  return t == TheoryId::Dlo || t == TheoryId::Ddlo;
}

RelationId order_rel(int order) {
  return order == 2 ? RelationId::order2() : RelationId::order1();
}

VarRef xv(int i) { return VarRef{true, i}; }
VarRef yv(int i) { return VarRef{false, i}; }

// Synthetic host model shared by the canonical constructions and the depth
// search. Order rows live in disjoint rank bands per order; tree rows share
// one class at every relation the unit's own relation closes into, keep one
// class per row at the other relations of the same level, and split at the
// unit's own relation and everything on the fine side.
struct Builder {
  TheoryId th;
  int level_count;
  int row_length;
  dpkit::Rng rng;
  theory::TheorySample sample;
  std::vector<PatternRow> rows;
  std::vector<Formula> formulas;
  std::vector<RelationId> rels;
  std::vector<std::int64_t> next_id;
  std::vector<std::int64_t> global_id;
  std::int64_t next_band[2] = {0, 0};

  Builder(TheoryId t, int L, int len, std::uint64_t seed)
      : th(t), level_count(L), row_length(len), rng(seed) {
    if (len < 2) throw input_error("row length must be at least 2");
    sample.theory = t;
    sample.params.level_count = order_theory(t) ? 0 : L;
    sample.params.seed = seed;
    if (!order_theory(t)) {
      rels = theory::eq_relations(L);
      next_id.assign(rels.size(), 0);
      global_id.assign(rels.size(), -1);
    }
  }

  int width() const {
    if (th == TheoryId::Dlo) return 1;
    if (th == TheoryId::Ddlo) return 2;
    return static_cast<int>(rels.size());
  }

  int add_point(std::vector<std::int64_t> coords) {
    sample.points.push_back(Point{std::move(coords)});
    return static_cast<int>(sample.points.size()) - 1;
  }

  // Reserves a fresh rank band for one row in the given order.
  std::int64_t band(int order) {
    std::int64_t base = next_band[order] +
                        static_cast<std::int64_t>(rng.below(512));
    next_band[order] = base + 4 * row_length + 1024;
    return base;
  }

  std::int64_t fresh_id(int rel_index) {
    return next_id[static_cast<std::size_t>(rel_index)]++;
  }

  std::int64_t shared_global(int rel_index) {
    auto& id = global_id[static_cast<std::size_t>(rel_index)];
    if (id < 0) id = fresh_id(rel_index);
    return id;
  }

  // True when a positive atom at `own` forces the same atom at `other`.
  bool closes_into(const RelationId& own, const RelationId& other) const {
    if (th == TheoryId::EqtreeRev) return theory::rel_below(other, own);
    return theory::rel_below(own, other);
  }

  void add_order_unit(const PatternUnit& u) {
    int points_per_tuple = u.kind == PatternUnit::Kind::OrderPairs ? 2 : 1;
    std::int64_t base[2];
    int orders = th == TheoryId::Ddlo ? 2 : 1;
    for (int o = 0; o < orders; ++o) base[o] = band(o);
    PatternRow row;
    row.width = points_per_tuple;
    for (int t = 0; t < row_length; ++t) {
      std::vector<int> tuple;
      for (int s = 0; s < points_per_tuple; ++s) {
        std::vector<std::int64_t> coords;
        for (int o = 0; o < orders; ++o)
          coords.push_back(base[o] + 2 * t + s);
        tuple.push_back(add_point(std::move(coords)));
      }
      row.tuples.push_back(std::move(tuple));
    }
    rows.push_back(std::move(row));
    formulas.push_back(u.formula());
  }

  void add_tree_unit(const PatternUnit& u) {
    const int R = static_cast<int>(rels.size());
    std::vector<std::int64_t> row_shared(static_cast<std::size_t>(R), -1);
    PatternRow row;
    row.width = 1;
    for (int t = 0; t < row_length; ++t) {
      std::vector<std::int64_t> coords(static_cast<std::size_t>(R), 0);
      for (int r = 0; r < R; ++r) {
        const RelationId& rel = rels[static_cast<std::size_t>(r)];
        if (u.kind == PatternUnit::Kind::ClassSingles && rel == u.rel) {
          coords[static_cast<std::size_t>(r)] = fresh_id(r);
        } else if (u.kind == PatternUnit::Kind::ClassSingles &&
                   closes_into(u.rel, rel)) {
          coords[static_cast<std::size_t>(r)] = shared_global(r);
        } else if (u.kind == PatternUnit::Kind::ClassSingles &&
                   theory::level(rel) == theory::level(u.rel)) {
          auto& id = row_shared[static_cast<std::size_t>(r)];
          if (id < 0) id = fresh_id(r);
          coords[static_cast<std::size_t>(r)] = id;
        } else {
          coords[static_cast<std::size_t>(r)] = fresh_id(r);
        }
      }
      row.tuples.push_back({add_point(std::move(coords))});
    }
    rows.push_back(std::move(row));
    formulas.push_back(u.formula());
  }

  void add_unit(const PatternUnit& u) {
    if (order_theory(th)) {
      if (u.kind == PatternUnit::Kind::ClassSingles)
        throw input_error("class row in an order theory");
      add_order_unit(u);
    } else {
      if (u.kind == PatternUnit::Kind::OrderPairs ||
          u.kind == PatternUnit::Kind::CutSingles)
        throw input_error("order row in an equivalence theory");
      add_tree_unit(u);
    }
  }

  PatternSpec finish(int x_arity) {
    sample.params.size = static_cast<int>(sample.points.size());
    if (auto bad = theory::validate(sample))
      throw contract_error("assembled sample violates model invariants: " +
                           bad->message);
    PatternSpec spec;
    spec.sample = std::move(sample);
    spec.x_arity = x_arity;
    spec.rows = std::move(rows);
    spec.formulas = std::move(formulas);
    spec.partial_type.theory = th;
    spec.partial_type.level_count = level_count;
    spec.partial_type.x_arity = x_arity;
    return spec;
  }
};

std::vector<int> row_lengths(const PatternSpec& spec) {
  std::vector<int> lens;
  for (const auto& r : spec.rows) lens.push_back(r.length());
  return lens;
}

void validate_spec(const PatternSpec& spec) {
  if (spec.rows.size() != spec.formulas.size())
    throw input_error("row and formula counts differ");
  if (spec.x_arity < 1) throw input_error("x arity must be positive");
  const int npoints = static_cast<int>(spec.sample.points.size());
  for (std::size_t a = 0; a < spec.rows.size(); ++a) {
    const PatternRow& row = spec.rows[a];
    if (row.length() < 1) throw input_error("empty pattern row");
    for (const auto& tup : row.tuples) {
      if (static_cast<int>(tup.size()) != row.width)
        throw input_error("tuple width mismatch in a pattern row");
      for (int i : tup)
        if (i < 0 || i >= npoints)
          throw input_error("pattern tuple index out of range");
    }
    const Formula& f = spec.formulas[a];
    if (f.y_arity > row.width)
      throw input_error("formula of row " + std::to_string(a) +
                        " uses more parameter slots than the row width");
    if (f.x_arity > spec.x_arity)
      throw input_error("formula of row " + std::to_string(a) +
                        " uses more x variables than the pattern declares");
  }
  for (int i : spec.base)
    if (i < 0 || i >= npoints)
      throw input_error("base point index out of range");
}

}  // namespace

indisc::Sequence row_sequence(const PatternSpec& spec, int row) {
  if (row < 0 || row >= spec.depth())
    throw input_error("row index out of range");
  const PatternRow& r = spec.rows[static_cast<std::size_t>(row)];
  return indisc::make_sequence(spec.sample, r.tuples, r.width);
}

theory::PointTuple base_points(const PatternSpec& spec) {
  theory::PointTuple base;
  for (int i : spec.base)
    base.push_back(spec.sample.points[static_cast<std::size_t>(i)]);
  return base;
}

oracle::ConstraintExpr gamma(const PatternSpec& spec,
                             const std::vector<int>& eta) {
  validate_spec(spec);
  if (static_cast<int>(eta.size()) != spec.depth())
    throw input_error("eta length must equal the pattern depth");
  oracle::ConstraintExpr expr;
  expr.base = spec.partial_type;
  expr.base.theory = spec.sample.theory;
  expr.base.level_count = std::max(1, spec.sample.params.level_count);
  expr.base.x_arity = spec.x_arity;
  auto tuple_points = [&](int row, int col) {
    theory::PointTuple tup;
    for (int i : spec.rows[static_cast<std::size_t>(row)]
                     .tuples[static_cast<std::size_t>(col)])
      tup.push_back(spec.sample.points[static_cast<std::size_t>(i)]);
    return tup;
  };
  for (int a = 0; a < spec.depth(); ++a) {
    int pick = eta[static_cast<std::size_t>(a)];
    if (pick < 0 || pick >= spec.rows[static_cast<std::size_t>(a)].length())
      throw input_error("eta entry out of range");
    expr.parts.push_back(oracle::instantiate(
        spec.formulas[static_cast<std::size_t>(a)], tuple_points(a, pick), true));
  }
  for (int a = 0; a < spec.depth(); ++a) {
    int pick = eta[static_cast<std::size_t>(a)];
    for (int i = 0; i < spec.rows[static_cast<std::size_t>(a)].length(); ++i) {
      if (i == pick) continue;
      expr.parts.push_back(oracle::instantiate(
          spec.formulas[static_cast<std::size_t>(a)], tuple_points(a, i), false));
    }
  }
  return expr;
}

VerifyOptions default_verify_options() {
  VerifyOptions opts;
  if (auto b = oracle::env_budget()) {
    opts.eta_budget = *b;
    opts.dnf_budget = *b;
  }
  return opts;
}

PatternVerdict verify(const PatternSpec& spec, const VerifyOptions& opts) {
  validate_spec(spec);
  PatternVerdict verdict;
  verdict.depth = spec.depth();

  std::vector<indisc::Sequence> seqs;
  for (int a = 0; a < spec.depth(); ++a) seqs.push_back(row_sequence(spec, a));
  auto mutual = indisc::mutual_check(seqs, base_points(spec), spec.formulas,
                                     opts.max_arity);
  verdict.mutual_ok = mutual.ok;
  verdict.mutual_offender = mutual.offender;
  if (!mutual.ok) return verdict;

  const auto lens = row_lengths(spec);
  std::uint64_t total = 1;
  for (int len : lens) {
    total *= static_cast<std::uint64_t>(len);
    if (total > opts.eta_budget)
      throw resource_error("eta space exceeds the budget of " +
                           std::to_string(opts.eta_budget));
  }

  std::vector<int> eta(lens.size(), 0);
  for (std::uint64_t step = 0; step < total; ++step) {
    ++verdict.eta_checked;
    if (!oracle::dnf_consistent(gamma(spec, eta), opts.dnf_budget)) {
      verdict.failures.push_back(eta);
      if (opts.stop_at_first_failure) break;
    }
    for (int a = static_cast<int>(lens.size()) - 1; a >= 0; --a) {
      if (++eta[static_cast<std::size_t>(a)] <
          lens[static_cast<std::size_t>(a)])
        break;
      eta[static_cast<std::size_t>(a)] = 0;
    }
  }
  verdict.verified = verdict.failures.empty();
  return verdict;
}

std::string PatternUnit::name() const {
  switch (kind) {
    case Kind::OrderPairs:
      return "pair<" + std::to_string(order) + ">@x" + std::to_string(var);
    case Kind::EqSingles:
      return "eq@x" + std::to_string(var);
    case Kind::CutSingles:
      return "cut<" + std::to_string(order) + ">@x" + std::to_string(var);
    case Kind::ClassSingles:
      return "class" + theory::relation_name(rel).substr(1) + "@x" +
             std::to_string(var);
  }
  return "?";
}

theory::Formula PatternUnit::formula() const {
  switch (kind) {
    case Kind::OrderPairs:
      return Formula::conj(Formula::atom(order_rel(order), yv(0), xv(var)),
                           Formula::atom(order_rel(order), xv(var), yv(1)));
    case Kind::EqSingles:
      return Formula::atom(RelationId::equality(), xv(var), yv(0));
    case Kind::CutSingles:
      return Formula::atom(order_rel(order), xv(var), yv(0));
    case Kind::ClassSingles:
      return Formula::atom(rel, xv(var), yv(0));
  }
  throw contract_error("unhandled unit kind");
}

std::vector<PatternUnit> pattern_library(TheoryId theory, int x_arity,
                                         int level_count) {
  if (x_arity < 1) throw input_error("x arity must be positive");
  std::vector<PatternUnit> units;
  for (int v = 0; v < x_arity; ++v) {
    if (order_theory(theory)) {
      int orders = theory == TheoryId::Ddlo ? 2 : 1;
      for (int o = 1; o <= orders; ++o)
        units.push_back({PatternUnit::Kind::OrderPairs, v, o, {}});
      units.push_back({PatternUnit::Kind::EqSingles, v, 1, {}});
      for (int o = 1; o <= orders; ++o)
        units.push_back({PatternUnit::Kind::CutSingles, v, o, {}});
    } else {
      for (const RelationId& r : theory::eq_relations(level_count))
        units.push_back({PatternUnit::Kind::ClassSingles, v, 1, r});
      units.push_back({PatternUnit::Kind::EqSingles, v, 1, {}});
    }
  }
  return units;
}

PatternSpec assemble(TheoryId theory, int level_count,
                     const std::vector<PatternUnit>& units, int row_length,
                     std::uint64_t seed) {
  Builder b(theory, level_count, row_length, seed);
  int x_arity = 1;
  for (const PatternUnit& u : units) x_arity = std::max(x_arity, u.var + 1);
  for (const PatternUnit& u : units) b.add_unit(u);
  return b.finish(x_arity);
}

SearchResult depth_search(const SearchConfig& cfg) {
  auto units = pattern_library(cfg.theory, cfg.x_arity, cfg.level_count);
  const int U = static_cast<int>(units.size());
  SearchResult result;

  VerifyOptions quick;
  quick.max_arity = cfg.max_arity;
  quick.eta_budget = cfg.eta_budget;
  quick.dnf_budget = cfg.dnf_budget;
  quick.stop_at_first_failure = true;
  VerifyOptions full = quick;
  full.stop_at_first_failure = false;

  auto try_combo = [&](const std::vector<int>& combo) -> bool {
    std::vector<PatternUnit> chosen;
    for (int i : combo) chosen.push_back(units[static_cast<std::size_t>(i)]);
    PatternSpec spec =
        assemble(cfg.theory, cfg.level_count, chosen, cfg.row_length, cfg.seed);
    ++result.combos_tried;
    if (!verify(spec, quick).verified) return false;
    result.verdict = verify(spec, full);
    result.best = std::move(spec);
    result.depth = static_cast<int>(combo.size());
    return result.verdict.verified;
  };

  // Strictly increasing index vectors of size d: the repetition-free
  // combinations, tried first at every depth.
  auto sweep_strict = [&](int d) -> bool {
    if (d > U) return false;
    std::vector<int> c(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) c[static_cast<std::size_t>(i)] = i;
    while (true) {
      if (try_combo(c)) return true;
      int i = d - 1;
      while (i >= 0 && c[static_cast<std::size_t>(i)] == U - (d - i)) --i;
      if (i < 0) return false;
      ++c[static_cast<std::size_t>(i)];
      for (int j = i + 1; j < d; ++j)
        c[static_cast<std::size_t>(j)] = c[static_cast<std::size_t>(j - 1)] + 1;
    }
  };

  // Non-decreasing index vectors with at least one repeated unit.
  auto sweep_repeats = [&](int d) -> bool {
    std::vector<int> c(static_cast<std::size_t>(d), 0);
    while (true) {
      bool repeat = false;
      for (int i = 1; i < d; ++i)
        repeat |= c[static_cast<std::size_t>(i)] ==
                  c[static_cast<std::size_t>(i - 1)];
      if (repeat && try_combo(c)) return true;
      int i = d - 1;
      while (i >= 0 && c[static_cast<std::size_t>(i)] == U - 1) --i;
      if (i < 0) return false;
      int v = ++c[static_cast<std::size_t>(i)];
      for (int j = i + 1; j < d; ++j) c[static_cast<std::size_t>(j)] = v;
    }
  };

  for (int d = cfg.max_depth; d >= 1; --d) {
    if (sweep_strict(d)) return result;
    if (sweep_repeats(d)) return result;
  }
  result.depth = 0;
  result.best.sample.theory = cfg.theory;
  result.best.sample.params.level_count =
      order_theory(cfg.theory) ? 0 : cfg.level_count;
  result.best.x_arity = cfg.x_arity;
  result.best.partial_type.theory = cfg.theory;
  result.best.partial_type.level_count = cfg.level_count;
  result.best.partial_type.x_arity = cfg.x_arity;
  result.verdict = verify(result.best, full);
  return result;
}

PatternSpec canonical_ddlo_pattern(int row_length, std::uint64_t seed) {
  std::vector<PatternUnit> units{{PatternUnit::Kind::OrderPairs, 0, 1, {}},
                                 {PatternUnit::Kind::OrderPairs, 0, 2, {}}};
  return assemble(TheoryId::Ddlo, 2, units, row_length, seed);
}

TreeWitness canonical_eqtree_pattern(int n, int row_length) {
  if (n < 1) throw input_error("depth must be at least 1");
  const int L = n + 1;
  Builder b(TheoryId::Eqtree, L, row_length, 0);
  for (const RelationId& r : theory::incomparable_relations(L, n))
    b.add_unit({PatternUnit::Kind::ClassSingles, 0, 1, r});
  // c agrees with each row's first element at that row's own relation and
  // is fresh everywhere else.
  const auto rels = theory::eq_relations(L);
  std::vector<std::int64_t> coords(rels.size(), 0);
  for (std::size_t r = 0; r < rels.size(); ++r) {
    int row = -1;
    if (theory::level(rels[r]) == n) row = rels[r].m;
    if (row >= 0) {
      int first = b.rows[static_cast<std::size_t>(row)].tuples[0][0];
      coords[r] = b.sample.points[static_cast<std::size_t>(first)].coords[r];
    } else {
      coords[r] = b.fresh_id(static_cast<int>(r));
    }
  }
  TreeWitness out;
  out.c = Point{std::move(coords)};
  out.spec = b.finish(1);
  return out;
}

namespace {

RelationId relation_from_name(const std::string& name) {
  if (name == "=") return RelationId::equality();
  if (name == "<1" || name == "<") return RelationId::order1();
  if (name == "<2") return RelationId::order2();
  if (name.size() >= 6 && name[0] == 'E' && name[1] == '(') {
    auto comma = name.find(',');
    auto close = name.find(')');
    if (comma != std::string::npos && close == name.size() - 1) {
      try {
        int m = std::stoi(name.substr(2, comma - 2));
        int n = std::stoi(name.substr(comma + 1, close - comma - 1));
        return RelationId::equiv(m, n);
      } catch (const std::exception&) {
      }
    }
  }
  throw io_error("unknown relation name: " + name);
}

nlohmann::json arg_to_json(const oracle::AtomArg& a) {
  if (a.is_var) return nlohmann::json{{"x", a.var}};
  return nlohmann::json{{"point", a.point.coords}};
}

oracle::AtomArg arg_from_json(const nlohmann::json& j) {
  if (j.contains("x")) return oracle::AtomArg::x(j.at("x").get<int>());
  theory::Point p;
  p.coords = j.at("point").get<std::vector<std::int64_t>>();
  return oracle::AtomArg::param(std::move(p));
}

}  // namespace

std::string save_pattern_json(const PatternSpec& spec) {
  nlohmann::json j;
  j["sample"] = nlohmann::json::parse(theory::save_sample_json(spec.sample));
  j["x_arity"] = spec.x_arity;
  j["rows"] = nlohmann::json::array();
  for (const PatternRow& row : spec.rows) {
    nlohmann::json r;
    r["width"] = row.width;
    r["tuples"] = row.tuples;
    j["rows"].push_back(std::move(r));
  }
  j["formulas"] = nlohmann::json::array();
  for (const Formula& f : spec.formulas)
    j["formulas"].push_back(theory::print_formula(f));
  j["base"] = spec.base;
  nlohmann::json atoms = nlohmann::json::array();
  for (const oracle::SignedAtom& a : spec.partial_type.atoms) {
    atoms.push_back(nlohmann::json{{"positive", a.positive},
                                   {"rel", theory::relation_name(a.rel)},
                                   {"lhs", arg_to_json(a.lhs)},
                                   {"rhs", arg_to_json(a.rhs)}});
  }
  j["partial_type"] = nlohmann::json{{"atoms", std::move(atoms)}};
  return j.dump(2) + "\n";
}

PatternSpec load_pattern_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw io_error(std::string("pattern file is not valid JSON: ") + e.what());
  }
  PatternSpec spec;
  try {
    spec.sample = theory::load_sample_json(j.at("sample").dump());
    spec.x_arity = j.at("x_arity").get<int>();
    for (const auto& r : j.at("rows")) {
      PatternRow row;
      row.width = r.at("width").get<int>();
      row.tuples = r.at("tuples").get<std::vector<std::vector<int>>>();
      spec.rows.push_back(std::move(row));
    }
    for (const auto& f : j.at("formulas"))
      spec.formulas.push_back(theory::parse_formula(f.get<std::string>()));
    spec.base = j.value("base", std::vector<int>{});
    spec.partial_type.theory = spec.sample.theory;
    spec.partial_type.level_count = std::max(1, spec.sample.params.level_count);
    spec.partial_type.x_arity = spec.x_arity;
    if (j.contains("partial_type")) {
      for (const auto& a : j.at("partial_type").at("atoms")) {
        spec.partial_type.require(
            a.at("positive").get<bool>(),
            relation_from_name(a.at("rel").get<std::string>()),
            arg_from_json(a.at("lhs")), arg_from_json(a.at("rhs")));
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw io_error(std::string("pattern file is malformed: ") + e.what());
  }
  validate_spec(spec);
  return spec;
}

}  // namespace dpkit::patterns
