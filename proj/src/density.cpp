#include "dpkit/density.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <set>
#include <sstream>

#include "dpkit/errors.hpp"

namespace dpkit::density {

namespace {

using theory::Formula;
using theory::Point;
using theory::PointTuple;
using theory::RelationId;
using theory::TheoryId;

bool closes_into(TheoryId th, const RelationId& from, const RelationId& to) {
  if (th == TheoryId::EqtreeRev) return theory::rel_below(to, from);
  return theory::rel_below(from, to);
}

// One evaluated occurrence of a delta formula at a parameter tuple.
struct Instance {
  int formula = 0;
  PointTuple args;
};

std::vector<Instance> expand_instances(const std::vector<Formula>& delta,
                                       const std::vector<PointTuple>& tuples) {
  std::vector<Instance> out;
  for (int f = 0; f < static_cast<int>(delta.size()); ++f) {
    int w = delta[static_cast<std::size_t>(f)].y_arity;
    if (w == 0) {
      out.push_back({f, {}});
      continue;
    }
    std::vector<int> odo(static_cast<std::size_t>(w), 0);
    int n = static_cast<int>(tuples.size());
    if (n == 0) continue;
    for (;;) {
      PointTuple args;
      for (int slot : odo) {
        const PointTuple& t = tuples[static_cast<std::size_t>(slot)];
        args.insert(args.end(), t.begin(), t.end());
      }
      out.push_back({f, std::move(args)});
      int pos = w - 1;
      while (pos >= 0 && odo[static_cast<std::size_t>(pos)] == n - 1) {
        odo[static_cast<std::size_t>(pos)] = 0;
        --pos;
      }
      if (pos < 0) break;
      ++odo[static_cast<std::size_t>(pos)];
    }
  }
  return out;
}

std::uint64_t count_general(TheoryId th, int level_count, int x_arity,
                            const std::vector<Formula>& delta,
                            const std::vector<Instance>& instances,
                            std::uint64_t dnf_budget,
                            std::uint64_t node_budget) {
  oracle::ConstraintExpr expr;
  expr.base.theory = th;
  expr.base.level_count = level_count;
  expr.base.x_arity = x_arity;

  std::uint64_t count = 0;
  std::uint64_t nodes = 0;
  std::vector<bool> signs;

  auto spend = [&]() {
    if (++nodes > node_budget) {
      throw resource_error("type count search exceeded node budget of " +
                           std::to_string(node_budget));
    }
  };

  // Depth-first over sign vectors, pruning any prefix the oracle rejects.
  auto rec = [&](auto&& self, std::size_t at) -> void {
    spend();
    if (!oracle::dnf_consistent(expr, dnf_budget)) return;
    if (at == instances.size()) {
      ++count;
      return;
    }
    const Instance& ins = instances[at];
    for (bool sign : {true, false}) {
      expr.parts.push_back(oracle::instantiate(
          delta[static_cast<std::size_t>(ins.formula)], ins.args, sign));
      self(self, at + 1);
      expr.parts.pop_back();
    }
  };
  rec(rec, 0);
  return count;
}

// Deltas made of one atom linking x0 to y0 get a direct solver.
struct AtomicItem {
  RelationId rel;
  bool x_left = true;
};

std::optional<std::vector<AtomicItem>> atomic_form(
    const std::vector<Formula>& delta) {
  std::vector<AtomicItem> items;
  for (const Formula& f : delta) {
    if (f.op != Formula::Op::Atom || f.x_arity > 1 || f.y_arity > 1) {
      return std::nullopt;
    }
    const theory::VarRef& l = f.lhs;
    const theory::VarRef& r = f.rhs;
    bool xy = l.is_x && l.index == 0 && !r.is_x && r.index == 0;
    bool yx = !l.is_x && l.index == 0 && r.is_x && r.index == 0;
    if (!xy && !yx) return std::nullopt;
    items.push_back({f.rel, xy});
  }
  return items;
}

// State for a single fresh variable walked across the parameters in order.
// Orders keep an open interval per order index; equivalence relations keep
// the parameter forced to share the class, plus parameters excluded from it.
class FreshState {
 public:
  FreshState(TheoryId th, int level_count, const std::vector<Point>& params)
      : th_(th), level_count_(level_count), params_(params) {
    if (th == TheoryId::Dlo || th == TheoryId::Ddlo) {
      orders_ = th == TheoryId::Ddlo ? 2 : 1;
    } else {
      rels_ = theory::eq_relations(level_count);
      forced_.assign(rels_.size(), -1);
      negatives_.assign(rels_.size(), {});
    }
    lo_.assign(static_cast<std::size_t>(orders_),
               std::numeric_limits<std::int64_t>::min());
    hi_.assign(static_cast<std::size_t>(orders_),
               std::numeric_limits<std::int64_t>::max());
  }

  struct Mark {
    std::size_t log_size = 0;
  };
  Mark mark() const { return {log_.size()}; }

  void rewind(Mark m) {
    while (log_.size() > m.log_size) {
      const Entry& e = log_.back();
      switch (e.kind) {
        case Entry::Lo: lo_[e.slot] = e.prev; break;
        case Entry::Hi: hi_[e.slot] = e.prev; break;
        case Entry::Forced: forced_[e.slot] = static_cast<int>(e.prev); break;
        case Entry::Negative: negatives_[e.slot].pop_back(); break;
      }
      log_.pop_back();
    }
  }

  // Applies one signed atom about params_[param]; false means the fresh
  // variable cannot satisfy it, with no state change.
  bool apply(const AtomicItem& item, int param, bool sign) {
    const Point& p = params_[static_cast<std::size_t>(param)];
    if (item.rel.kind == RelationId::Kind::Equality) {
      return !sign;  // fresh means distinct from every parameter
    }
    if (item.rel.kind == RelationId::Kind::Order1 ||
        item.rel.kind == RelationId::Kind::Order2) {
      int o = item.rel.kind == RelationId::Kind::Order2 ? 1 : 0;
      if (o >= orders_) {
        throw input_error("order relation not present in theory " +
                          theory::theory_name(th_));
      }
      std::int64_t r = p.coords[static_cast<std::size_t>(o)];
      bool upper = item.x_left == sign;  // x below r, or r below x
      std::size_t slot = static_cast<std::size_t>(o);
      if (upper) {
        if (r <= lo_[slot]) return false;
        if (r < hi_[slot]) {
          log_.push_back({Entry::Hi, slot, hi_[slot]});
          hi_[slot] = r;
        }
      } else {
        if (r >= hi_[slot]) return false;
        if (r > lo_[slot]) {
          log_.push_back({Entry::Lo, slot, lo_[slot]});
          lo_[slot] = r;
        }
      }
      return true;
    }
    // Equivalence atom. Positive membership closes upward through the
    // grading; negative applies at the named relation only.
    if (sign) {
      for (std::size_t t = 0; t < rels_.size(); ++t) {
        if (!closes_into(th_, item.rel, rels_[t])) continue;
        if (!force(t, param)) return false;
      }
      return true;
    }
    std::size_t s = rel_index(item.rel);
    if (forced_[s] >= 0 && equiv(s, forced_[s], param)) return false;
    log_.push_back({Entry::Negative, s, 0});
    negatives_[s].push_back(param);
    return true;
  }

 private:
  struct Entry {
    enum Kind { Lo, Hi, Forced, Negative } kind;
    std::size_t slot;
    std::int64_t prev;
  };

  std::size_t rel_index(const RelationId& rel) const {
    for (std::size_t t = 0; t < rels_.size(); ++t) {
      if (rels_[t] == rel) return t;
    }
    throw input_error("relation " + theory::relation_name(rel) +
                      " not present at this level count");
  }

  bool equiv(std::size_t t, int a, int b) const {
    return theory::eval_atom(th_, level_count_, rels_[t],
                             params_[static_cast<std::size_t>(a)],
                             params_[static_cast<std::size_t>(b)]);
  }

  bool force(std::size_t t, int param) {
    if (forced_[t] >= 0) return equiv(t, forced_[t], param);
    for (int b : negatives_[t]) {
      if (equiv(t, param, b)) return false;
    }
    log_.push_back({Entry::Forced, t, static_cast<std::int64_t>(forced_[t])});
    forced_[t] = param;
    return true;
  }

  TheoryId th_;
  int level_count_ = 2;
  const std::vector<Point>& params_;
  int orders_ = 0;
  std::vector<std::int64_t> lo_, hi_;
  std::vector<RelationId> rels_;
  std::vector<int> forced_;
  std::vector<std::vector<int>> negatives_;
  std::vector<Entry> log_;
};

std::uint64_t count_atomic(TheoryId th, int level_count,
                           const std::vector<AtomicItem>& items,
                           const std::vector<Point>& params,
                           std::uint64_t node_budget) {
  int n = static_cast<int>(params.size());
  int k = static_cast<int>(items.size());
  FreshState state(th, level_count, params);
  std::uint64_t fresh = 0;
  std::uint64_t nodes = 0;

  auto spend = [&]() {
    if (++nodes > node_budget) {
      throw resource_error("type count search exceeded node budget of " +
                           std::to_string(node_budget));
    }
  };

  // Enumerates realizable sign vectors for a variable distinct from every
  // parameter, one parameter at a time.
  auto rec = [&](auto&& self, int param) -> void {
    spend();
    if (param == n) {
      ++fresh;
      return;
    }
    auto combo = [&](auto&& inner, int item) -> void {
      if (item == k) {
        self(self, param + 1);
        return;
      }
      for (bool sign : {true, false}) {
        FreshState::Mark m = state.mark();
        if (state.apply(items[static_cast<std::size_t>(item)], param, sign)) {
          inner(inner, item + 1);
        }
        state.rewind(m);
      }
    };
    combo(combo, 0);
  };
  rec(rec, 0);

  // Vectors realized by the parameters themselves, kept only when no fresh
  // point realizes them and deduplicated among each other.
  std::set<std::vector<bool>> pinned;
  for (int p = 0; p < n; ++p) {
    std::vector<bool> vec;
    vec.reserve(static_cast<std::size_t>(n * k));
    for (int j = 0; j < n; ++j) {
      for (const AtomicItem& item : items) {
        const Point& x = params[static_cast<std::size_t>(p)];
        const Point& y = params[static_cast<std::size_t>(j)];
        bool v = item.x_left
                     ? theory::eval_atom(th, level_count, item.rel, x, y)
                     : theory::eval_atom(th, level_count, item.rel, y, x);
        vec.push_back(v);
      }
    }
    FreshState walk(th, level_count, params);
    bool fresh_too = true;
    std::size_t at = 0;
    for (int j = 0; j < n && fresh_too; ++j) {
      for (int i = 0; i < k && fresh_too; ++i) {
        fresh_too = walk.apply(items[static_cast<std::size_t>(i)], j,
                               vec[at]);
        ++at;
      }
    }
    if (!fresh_too) pinned.insert(std::move(vec));
  }
  return fresh + pinned.size();
}

std::string csv_field(const std::string& raw) {
  bool quote = raw.find_first_of(",\"\n") != std::string::npos;
  if (!quote) return raw;
  std::string out = "\"";
  for (char c : raw) {
    if (c == '"') out += "\"\"";
    out += c;
  }
  out += "\"";
  return out;
}

std::string delta_label_of(const std::vector<Formula>& delta) {
  std::string label;
  for (std::size_t i = 0; i < delta.size(); ++i) {
    if (i) label += "|";
    label += theory::print_formula(delta[i]);
  }
  return label;
}

}  // namespace

std::uint64_t count_types(const theory::TheorySample& sample, int n,
                          const std::vector<Formula>& delta,
                          std::uint64_t dnf_budget,
                          std::uint64_t node_budget) {
  if (n < 0 || n > static_cast<int>(sample.points.size())) {
    throw input_error("prefix size " + std::to_string(n) +
                      " outside sample of " +
                      std::to_string(sample.points.size()));
  }
  if (delta.empty()) throw input_error("empty delta");
  std::vector<Point> params(sample.points.begin(),
                            sample.points.begin() + n);

  if (auto items = atomic_form(delta)) {
    return count_atomic(sample.theory, sample.params.level_count, *items,
                        params, node_budget);
  }

  int x_arity = 1;
  for (const Formula& f : delta) x_arity = std::max(x_arity, f.x_arity);
  std::vector<PointTuple> singles;
  singles.reserve(params.size());
  for (const Point& p : params) singles.push_back({p});
  return count_general(sample.theory, sample.params.level_count, x_arity,
                       delta, expand_instances(delta, singles), dnf_budget,
                       node_budget);
}

std::uint64_t count_types_pool(
    const theory::TheorySample& sample, int n,
    const std::vector<Formula>& delta,
    const std::vector<PointTuple>& candidates) {
  if (n < 0 || n > static_cast<int>(sample.points.size())) {
    throw input_error("prefix size " + std::to_string(n) +
                      " outside sample of " +
                      std::to_string(sample.points.size()));
  }
  if (delta.empty()) throw input_error("empty delta");
  std::vector<PointTuple> singles;
  for (int i = 0; i < n; ++i) {
    singles.push_back({sample.points[static_cast<std::size_t>(i)]});
  }
  std::vector<Instance> instances = expand_instances(delta, singles);
  std::set<std::vector<bool>> seen;
  for (const PointTuple& x : candidates) {
    std::vector<bool> vec;
    vec.reserve(instances.size());
    for (const Instance& ins : instances) {
      vec.push_back(theory::eval(delta[static_cast<std::size_t>(ins.formula)],
                                 sample.theory, sample.params.level_count, x,
                                 ins.args));
    }
    seen.insert(std::move(vec));
  }
  return seen.size();
}

CountTable count_table(const theory::TheorySample& sample,
                       const std::vector<Formula>& delta,
                       const std::vector<int>& sizes,
                       std::uint64_t dnf_budget, std::uint64_t node_budget) {
  CountTable table;
  table.theory = sample.theory;
  table.delta_label = delta_label_of(delta);
  table.seed = sample.params.seed;
  for (int n : sizes) {
    table.sizes.push_back(n);
    table.counts.push_back(
        count_types(sample, n, delta, dnf_budget, node_budget));
  }
  return table;
}

CountTable density_over_sequence(const indisc::Sequence& seq,
                                 const std::vector<Formula>& delta,
                                 const std::vector<int>& sizes,
                                 int indisc_arity,
                                 std::uint64_t dnf_budget) {
  if (delta.empty()) throw input_error("empty delta");
  indisc::Report rep = indisc::check(seq, {}, delta, indisc_arity);
  if (!rep.ok) {
    std::string msg = "sequence is not indiscernible at arity " +
                      std::to_string(indisc_arity);
    if (rep.witness) {
      msg += ": " + theory::print_formula(rep.witness->atom) +
             " separates tuples";
    }
    throw contract_error(msg);
  }
  int x_arity = 1;
  for (const Formula& f : delta) x_arity = std::max(x_arity, f.x_arity);

  CountTable table;
  table.theory = seq.theory;
  table.delta_label = delta_label_of(delta);
  for (int n : sizes) {
    if (n < 0 || n > static_cast<int>(seq.tuples.size())) {
      throw input_error("prefix size " + std::to_string(n) +
                        " outside sequence of " +
                        std::to_string(seq.tuples.size()));
    }
    std::vector<PointTuple> prefix(seq.tuples.begin(),
                                   seq.tuples.begin() + n);
    table.sizes.push_back(n);
    table.counts.push_back(count_general(
        seq.theory, seq.level_count, x_arity, delta,
        expand_instances(delta, prefix), dnf_budget, 100'000'000));
  }
  return table;
}

ExponentFit fit_exponent(const std::vector<int>& sizes,
                         const std::vector<std::uint64_t>& counts,
                         int drop_below) {
  if (sizes.size() != counts.size()) {
    throw input_error("sizes and counts differ in length");
  }
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (sizes[i] < drop_below) continue;
    if (counts[i] == 0) {
      throw input_error("zero count at size " + std::to_string(sizes[i]));
    }
    xs.push_back(std::log(static_cast<double>(sizes[i])));
    ys.push_back(std::log(static_cast<double>(counts[i])));
  }
  if (xs.size() < 3) {
    throw input_error("need at least 3 sizes of " +
                      std::to_string(drop_below) + " or more, have " +
                      std::to_string(xs.size()));
  }
  double n = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  double denom = n * sxx - sx * sx;
  if (denom == 0) throw input_error("all sizes equal, slope undefined");
  ExponentFit fit;
  fit.slope = (n * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / n;
  double ss = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double r = ys[i] - (fit.slope * xs[i] + fit.intercept);
    ss += r * r;
  }
  fit.residual_rms = std::sqrt(ss / n);
  fit.points_used = static_cast<int>(xs.size());
  return fit;
}

std::string table_csv(const CountTable& table) {
  std::ostringstream out;
  out << "theory,delta,n,count,trials,seed\n";
  for (std::size_t i = 0; i < table.sizes.size(); ++i) {
    out << theory::theory_name(table.theory) << ","
        << csv_field(table.delta_label) << "," << table.sizes[i] << ","
        << table.counts[i] << "," << table.trials << "," << table.seed
        << "\n";
  }
  return out.str();
}

}  // namespace dpkit::density
