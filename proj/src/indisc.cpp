#include "dpkit/indisc.hpp"

#include <algorithm>
#include <string>

#include "dpkit/errors.hpp"

namespace dpkit::indisc {
namespace {

using theory::Point;
using theory::PointTuple;
using theory::RelationId;

std::vector<RelationId> compare_relations(const Sequence& seq,
                                          const std::vector<theory::Formula>& delta) {
  std::vector<RelationId> rels{RelationId::equality()};
  if (delta.empty()) {
    for (const RelationId& r : theory::theory_relations(seq.theory, seq.level_count))
      rels.push_back(r);
    return rels;
  }
  std::vector<RelationId> mentioned;
  for (const theory::Formula& f : delta) theory::collect_relations(f, mentioned);
  for (const RelationId& r : mentioned)
    if (std::find(rels.begin(), rels.end(), r) == rels.end()) rels.push_back(r);
  return rels;
}

// Flattened point slots for one compared tuple: the k chosen tuples of the
// sequence in position order, then the base points.
std::vector<const Point*> slots_for(const Sequence& seq, const PointTuple& base,
                                    const std::vector<int>& positions) {
  std::vector<const Point*> slots;
  slots.reserve(positions.size() * static_cast<std::size_t>(seq.width) + base.size());
  for (int pos : positions)
    for (const Point& p : seq.tuples[static_cast<std::size_t>(pos)])
      slots.push_back(&p);
  for (const Point& p : base) slots.push_back(&p);
  return slots;
}

// First atom on which the two slot vectors disagree, in scan order:
// relations as listed, then slot pairs lexicographically.
std::optional<theory::Formula> first_disagreement(
    const Sequence& seq, const std::vector<RelationId>& rels,
    const std::vector<const Point*>& a, const std::vector<const Point*>& b) {
  const int n = static_cast<int>(a.size());
  for (const RelationId& rel : rels) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        bool va = theory::eval_atom(seq.theory, seq.level_count, rel,
                                    *a[static_cast<std::size_t>(i)],
                                    *a[static_cast<std::size_t>(j)]);
        bool vb = theory::eval_atom(seq.theory, seq.level_count, rel,
                                    *b[static_cast<std::size_t>(i)],
                                    *b[static_cast<std::size_t>(j)]);
        if (va != vb)
          return theory::Formula::atom(rel, theory::VarRef{false, i},
                                       theory::VarRef{false, j});
      }
    }
  }
  return std::nullopt;
}

// Advances an increasing position tuple; returns false after the last one.
bool next_combination(std::vector<int>& idx, int n) {
  int k = static_cast<int>(idx.size());
  for (int i = k - 1; i >= 0; --i) {
    if (idx[static_cast<std::size_t>(i)] < n - (k - i)) {
      ++idx[static_cast<std::size_t>(i)];
      for (int j = i + 1; j < k; ++j)
        idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
      return true;
    }
  }
  return false;
}

}  // namespace

Sequence make_sequence(const theory::TheorySample& sample,
                       const std::vector<std::vector<int>>& index_tuples,
                       int width) {
  if (width < 1) throw input_error("tuple width must be positive");
  Sequence seq;
  seq.theory = sample.theory;
  seq.level_count = sample.params.level_count;
  seq.width = width;
  for (const auto& tup : index_tuples) {
    if (static_cast<int>(tup.size()) != width)
      throw input_error("index tuple width mismatch");
    PointTuple points;
    for (int i : tup) {
      if (i < 0 || i >= static_cast<int>(sample.points.size()))
        throw input_error("point index out of range: " + std::to_string(i));
      points.push_back(sample.points[static_cast<std::size_t>(i)]);
    }
    seq.tuples.push_back(std::move(points));
  }
  return seq;
}

Sequence make_singletons(const theory::TheorySample& sample,
                         const std::vector<int>& indices) {
  std::vector<std::vector<int>> tuples;
  for (int i : indices) tuples.push_back({i});
  return make_sequence(sample, tuples, 1);
}

Report check(const Sequence& seq, const PointTuple& base,
             const std::vector<theory::Formula>& delta, int max_arity) {
  if (max_arity < 1) throw input_error("arity must be at least 1");
  Report report;
  const int n = seq.length();
  const auto rels = compare_relations(seq, delta);
  for (int k = 1; k <= std::min(max_arity, n); ++k) {
    report.arity_checked = k;
    std::vector<int> ref(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) ref[static_cast<std::size_t>(i)] = i;
    const auto ref_slots = slots_for(seq, base, ref);
    std::vector<int> idx = ref;
    while (next_combination(idx, n)) {
      auto slots = slots_for(seq, base, idx);
      if (auto atom = first_disagreement(seq, rels, ref_slots, slots)) {
        report.ok = false;
        report.witness = Witness{std::move(*atom), ref, idx};
        return report;
      }
    }
  }
  return report;
}

MutualReport mutual_check(const std::vector<Sequence>& rows,
                          const PointTuple& base,
                          const std::vector<theory::Formula>& delta,
                          int max_arity) {
  MutualReport out;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    PointTuple extended = base;
    for (std::size_t s = 0; s < rows.size(); ++s) {
      if (s == r) continue;
      for (const PointTuple& tup : rows[s].tuples)
        extended.insert(extended.end(), tup.begin(), tup.end());
    }
    int arity = std::max(1, std::min(max_arity, rows[r].length()));
    out.rows.push_back(check(rows[r], extended, delta, arity));
    if (!out.rows.back().ok && out.ok) {
      out.ok = false;
      out.offender = static_cast<int>(r);
    }
  }
  return out;
}

BrokenReport broken_count(const std::vector<Sequence>& rows,
                          const PointTuple& base, const theory::Point& c,
                          const std::vector<theory::Formula>& delta,
                          int max_arity) {
  MutualReport before = mutual_check(rows, base, delta, max_arity);
  if (!before.ok)
    throw contract_error("rows are not mutually indiscernible to begin with; row " +
                         std::to_string(before.offender) + " fails");
  BrokenReport out;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    PointTuple extended = base;
    extended.push_back(c);
    for (std::size_t s = 0; s < rows.size(); ++s) {
      if (s == r) continue;
      for (const PointTuple& tup : rows[s].tuples)
        extended.insert(extended.end(), tup.begin(), tup.end());
    }
    int arity = std::max(1, std::min(max_arity, rows[r].length()));
    out.rows.push_back(check(rows[r], extended, delta, arity));
    if (!out.rows.back().ok) ++out.broken;
  }
  return out;
}

}  // namespace dpkit::indisc
