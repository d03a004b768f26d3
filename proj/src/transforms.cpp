#include "dpkit/transforms.hpp"

#include <algorithm>
#include <string>
#include <utility>

#include "dpkit/errors.hpp"

namespace dpkit::transforms {
namespace {

using theory::Formula;
using theory::PointTuple;

PointTuple column_points(const theory::TheorySample& host,
                         const std::vector<int>& indices) {
  PointTuple tup;
  for (int i : indices) {
    if (i < 0 || i >= static_cast<int>(host.points.size()))
      throw input_error("column index out of range");
    tup.push_back(host.points[static_cast<std::size_t>(i)]);
  }
  return tup;
}

int sample_level(const theory::TheorySample& host) {
  return std::max(1, host.params.level_count);
}

}  // namespace

int alternation_count(const std::vector<bool>& trace) {
  int flips = 0;
  for (std::size_t i = 1; i < trace.size(); ++i)
    if (trace[i] != trace[i - 1]) ++flips;
  return flips;
}

SwitchReport switch_report(const std::vector<bool>& trace) {
  SwitchReport r;
  for (std::size_t i = 1; i < trace.size(); ++i)
    if (trace[i] != trace[i - 1])
      r.switch_indices.push_back(static_cast<int>(i) - 1);
  r.count = static_cast<int>(r.switch_indices.size());
  return r;
}

theory::Formula shift_params(const theory::Formula& f, int offset) {
  switch (f.op) {
    case Formula::Op::Atom: {
      auto shift = [&](theory::VarRef v) {
        if (!v.is_x) v.index += offset;
        return v;
      };
      return Formula::atom(f.rel, shift(f.lhs), shift(f.rhs));
    }
    case Formula::Op::Not:
      return Formula::negate(shift_params(f.kids[0], offset));
    case Formula::Op::And:
      return Formula::conj(shift_params(f.kids[0], offset),
                           shift_params(f.kids[1], offset));
    case Formula::Op::Or:
      return Formula::disj(shift_params(f.kids[0], offset),
                           shift_params(f.kids[1], offset));
    case Formula::Op::Iff:
      return Formula::iff(shift_params(f.kids[0], offset),
                          shift_params(f.kids[1], offset));
  }
  throw contract_error("unhandled formula node");
}

AltSearchResult alternation_search_pool(
    const theory::Formula& phi, const indisc::Sequence& seq,
    const std::vector<PointTuple>& candidates) {
  AltSearchResult out;
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    std::vector<bool> trace;
    trace.reserve(seq.tuples.size());
    for (const PointTuple& tup : seq.tuples)
      trace.push_back(theory::eval(phi, seq.theory, seq.level_count,
                                   candidates[c], tup));
    int alt = alternation_count(trace);
    if (alt > out.max_alternations) {
      out.max_alternations = alt;
      out.best_trace = std::move(trace);
      out.best_candidate = static_cast<int>(c);
    }
  }
  return out;
}

namespace {

struct OracleAltSearch {
  const theory::Formula* phi;
  const indisc::Sequence* seq;
  std::uint64_t dnf_budget;
  oracle::ConstraintExpr prefix;
  std::vector<bool> signs;
  AltSearchResult result;

  void dfs(int pos, int alt) {
    ++result.nodes;
    const int n = seq->length();
    if (!oracle::dnf_consistent(prefix, dnf_budget)) return;
    if (pos == n) {
      if (alt > result.max_alternations) {
        result.max_alternations = alt;
        result.best_trace = signs;
      }
      return;
    }
    // Even flipping at every remaining boundary cannot beat the best.
    if (alt + (n - pos) <= result.max_alternations) return;
    bool prefer_flip = pos > 0 ? !signs.back() : true;
    for (bool value : {prefer_flip, !prefer_flip}) {
      int next_alt = alt + (pos > 0 && value != signs.back() ? 1 : 0);
      signs.push_back(value);
      prefix.parts.push_back(oracle::instantiate(
          *phi, seq->tuples[static_cast<std::size_t>(pos)], value));
      dfs(pos + 1, next_alt);
      prefix.parts.pop_back();
      signs.pop_back();
    }
  }
};

}  // namespace

AltSearchResult alternation_search(const theory::Formula& phi,
                                   const indisc::Sequence& seq,
                                   std::uint64_t dnf_budget) {
  OracleAltSearch search;
  search.phi = &phi;
  search.seq = &seq;
  search.dnf_budget = dnf_budget;
  search.prefix.base.theory = seq.theory;
  search.prefix.base.level_count = std::max(1, seq.level_count);
  search.prefix.base.x_arity = std::max(1, phi.x_arity);
  search.dfs(0, 0);
  return search.result;
}

Interleaved pattern_to_interleaved(const patterns::PatternSpec& spec,
                                   std::uint64_t dnf_budget) {
  const int k = spec.depth();
  if (k < 1) throw input_error("pattern has no rows");
  const int n = spec.rows[0].length();
  for (const patterns::PatternRow& row : spec.rows)
    if (row.length() != n)
      throw input_error("rows must share one length to interleave");
  if (n < k) throw input_error("rows shorter than the pattern depth");

  Interleaved out;
  out.k = k;
  int offset = 0;
  for (int a = 0; a < k; ++a) {
    theory::Formula part = shift_params(spec.formulas[static_cast<std::size_t>(a)], offset);
    out.psi = a == 0 ? std::move(part) : Formula::disj(std::move(out.psi), std::move(part));
    offset += spec.rows[static_cast<std::size_t>(a)].width;
  }
  out.column_width = offset;
  for (int j = 0; j < n; ++j) {
    std::vector<int> col;
    for (const patterns::PatternRow& row : spec.rows)
      for (int i : row.tuples[static_cast<std::size_t>(j)]) col.push_back(i);
    out.columns.push_back(std::move(col));
  }

  // Every way of choosing k of the n columns must be realizable as the
  // exact positive set of psi.
  std::vector<int> pick(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) pick[static_cast<std::size_t>(i)] = i;
  out.all_subsets_definable = true;
  while (true) {
    oracle::ConstraintExpr expr;
    expr.base = spec.partial_type;
    expr.base.theory = spec.sample.theory;
    expr.base.level_count = sample_level(spec.sample);
    expr.base.x_arity = spec.x_arity;
    for (int j = 0; j < n; ++j) {
      bool inside = std::find(pick.begin(), pick.end(), j) != pick.end();
      expr.parts.push_back(oracle::instantiate(
          out.psi, column_points(spec.sample, out.columns[static_cast<std::size_t>(j)]),
          inside));
    }
    if (!oracle::dnf_consistent(expr, dnf_budget)) {
      out.all_subsets_definable = false;
      break;
    }
    out.subsets_checked.push_back(pick);
    int i = k - 1;
    while (i >= 0 && pick[static_cast<std::size_t>(i)] == n - (k - i)) --i;
    if (i < 0) break;
    ++pick[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < k; ++j)
      pick[static_cast<std::size_t>(j)] = pick[static_cast<std::size_t>(j - 1)] + 1;
  }
  return out;
}

SegmentPattern alternation_to_pattern(const theory::TheorySample& host,
                                      const theory::Formula& phi,
                                      const std::vector<std::vector<int>>& columns,
                                      int column_width,
                                      const std::vector<bool>& trace, int k,
                                      const patterns::VerifyOptions& opts) {
  if (k < 1) throw input_error("target depth must be at least 1");
  if (trace.size() != columns.size())
    throw input_error("trace and column counts differ");
  SwitchReport flips = switch_report(trace);
  if (flips.count < 2 * k)
    throw input_error("trace has " + std::to_string(flips.count) +
                      " alternations, need " + std::to_string(2 * k));

  patterns::PatternSpec spec;
  spec.sample = host;
  spec.x_arity = std::max(1, phi.x_arity);
  spec.partial_type.theory = host.theory;
  spec.partial_type.level_count = sample_level(host);
  spec.partial_type.x_arity = spec.x_arity;
  for (int a = 0; a < k; ++a) {
    int lo = flips.switch_indices[static_cast<std::size_t>(2 * a)];
    int hi = flips.switch_indices[static_cast<std::size_t>(2 * a + 1)];
    patterns::PatternRow row;
    row.width = column_width;
    for (int j = lo; j <= hi; ++j)
      row.tuples.push_back(columns[static_cast<std::size_t>(j)]);
    spec.rows.push_back(std::move(row));
    // Inside the segment the trace flips away from its surrounding value;
    // normalize so the bump is the formula's positive side.
    bool ambient = trace[static_cast<std::size_t>(lo)];
    spec.formulas.push_back(ambient ? Formula::negate(phi) : phi);
  }

  SegmentPattern out;
  out.spec = std::move(spec);
  out.verdict = patterns::verify(out.spec, opts);
  if (!out.verdict.verified)
    throw contract_error(
        "segment pattern failed verification at depth " + std::to_string(k));
  return out;
}

SwitchConstruction switchpoints_to_alternation(
    const theory::Formula& phi, int column_width,
    const std::vector<std::vector<int>>& columns,
    const std::vector<std::vector<bool>>& traces,
    std::optional<int> k_target) {
  if (k_target && *k_target < 1)
    throw input_error("switch target must be at least 1");
  SwitchConstruction out;
  // Stations: maximal constant runs of length >= 2, as (first, last) pairs.
  auto stations_of = [](const std::vector<bool>& t) {
    std::vector<std::pair<int, int>> st;
    std::size_t i = 0;
    while (i < t.size()) {
      std::size_t j = i;
      while (j + 1 < t.size() && t[j + 1] == t[i]) ++j;
      if (j > i) st.emplace_back(static_cast<int>(i), static_cast<int>(j));
      i = j + 1;
    }
    return st;
  };

  int best = -1, best_usable = 0;
  for (std::size_t c = 0; c < traces.size(); ++c) {
    if (traces[c].size() != columns.size())
      throw input_error("trace length does not match the column count");
    int usable = std::max(0, static_cast<int>(stations_of(traces[c]).size()) - 1);
    if (usable > best_usable) {
      best_usable = usable;
      best = static_cast<int>(c);
    }
  }
  int k = k_target ? std::min(*k_target, best_usable) : best_usable;
  if (best < 0 || k < 1 || (k_target && best_usable < *k_target)) return out;

  const std::vector<bool>& t = traces[static_cast<std::size_t>(best)];
  auto st = stations_of(t);
  out.found = true;
  out.candidate = best;
  out.k = k;
  out.report = switch_report(t);
  out.pair_width = 2 * column_width;
  out.psi2 = Formula::iff(shift_params(phi, 0),
                          shift_params(phi, column_width));

  auto add_pair = [&](int a, int b) {
    std::vector<int> pair = columns[static_cast<std::size_t>(a)];
    for (int i : columns[static_cast<std::size_t>(b)]) pair.push_back(i);
    out.pairs.push_back(std::move(pair));
    out.trace2.push_back(t[static_cast<std::size_t>(a)] ==
                         t[static_cast<std::size_t>(b)]);
  };

  add_pair(st[0].first, st[0].first + 1);
  for (int i = 1; i <= k; ++i) {
    int prev_last = st[static_cast<std::size_t>(i - 1)].second;
    add_pair(prev_last, prev_last + 1);
    add_pair(st[static_cast<std::size_t>(i)].first,
             st[static_cast<std::size_t>(i)].first + 1);
  }
  out.alternations = alternation_count(out.trace2);
  return out;
}

}  // namespace dpkit::transforms
