#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "dpkit/formula.hpp"
#include "dpkit/indisc.hpp"
#include "dpkit/oracle.hpp"
#include "dpkit/patterns.hpp"
#include "dpkit/theory.hpp"

namespace dpkit::transforms {

// Number of adjacent truth-value flips along a trace.
int alternation_count(const std::vector<bool>& trace);

struct SwitchReport {
  std::vector<int> switch_indices;  // i with trace[i] != trace[i+1]
  int count = 0;
};

SwitchReport switch_report(const std::vector<bool>& trace);

// Copy of f with every parameter slot shifted up by offset.
theory::Formula shift_params(const theory::Formula& f, int offset);

struct AltSearchResult {
  int max_alternations = -1;
  std::vector<bool> best_trace;
  int best_candidate = -1;       // pool mode only
  std::uint64_t nodes = 0;       // oracle mode: search tree size
};

// Largest alternation count of phi(c, -) along the sequence over the given
// candidate x tuples.
AltSearchResult alternation_search_pool(
    const theory::Formula& phi, const indisc::Sequence& seq,
    const std::vector<theory::PointTuple>& candidates);

// Largest alternation count over all realizable sign vectors, decided by the
// consistency oracle instead of a candidate pool.
AltSearchResult alternation_search(
    const theory::Formula& phi, const indisc::Sequence& seq,
    std::uint64_t dnf_budget = oracle::kDefaultDnfBudget);

// ---- Pattern -> single sequence with a disjunction formula ----

struct Interleaved {
  theory::Formula psi;                      // OR of the rows' formulas
  int column_width = 0;
  std::vector<std::vector<int>> columns;    // index tuples into the sample
  int k = 0;
  std::vector<std::vector<int>> subsets_checked;
  bool all_subsets_definable = false;
};

// Fuses a verified pattern with equal-length rows into one column sequence
// and one formula, then checks that every k-subset of columns is cut out by
// some realization: psi asserted on the subset, denied off it.
Interleaved pattern_to_interleaved(const patterns::PatternSpec& spec,
                                   std::uint64_t dnf_budget =
                                       oracle::kDefaultDnfBudget);

struct SegmentPattern {
  patterns::PatternSpec spec;
  patterns::PatternVerdict verdict;
};

// Builds a depth-k pattern from a trace with at least 2k alternations along
// a column sequence: each pair of consecutive flips becomes one row, with
// the formula negated where the surrounding trace value is true. The result
// is verified; failure to verify raises contract_error.
SegmentPattern alternation_to_pattern(const theory::TheorySample& host,
                                      const theory::Formula& phi,
                                      const std::vector<std::vector<int>>& columns,
                                      int column_width,
                                      const std::vector<bool>& trace, int k,
                                      const patterns::VerifyOptions& opts =
                                          patterns::default_verify_options());

// ---- Switch points -> doubled sequence with 2k alternations ----

struct SwitchConstruction {
  bool found = false;
  int candidate = -1;
  int k = 0;
  SwitchReport report;                     // chosen candidate's raw switches
  theory::Formula psi2;                    // phi(x, left) <-> phi(x, right)
  int pair_width = 0;
  std::vector<std::vector<int>> pairs;     // index tuples into the sample
  std::vector<bool> trace2;
  int alternations = 0;                    // exactly 2k when found
};

// Picks the candidate trace with the most usable switch points (stations =
// runs of length >= 2; usable switches = stations - 1), then forms 2k+1
// column pairs alternating same-station and straddling picks, so the paired
// formula alternates exactly 2k times. Isolated one-position runs between
// stations are skipped, never counted twice. If k_target is given and no
// candidate reaches it, found stays false (absence, not an error).
SwitchConstruction switchpoints_to_alternation(
    const theory::Formula& phi, int column_width,
    const std::vector<std::vector<int>>& columns,
    const std::vector<std::vector<bool>>& traces,
    std::optional<int> k_target = std::nullopt);

}  // namespace dpkit::transforms
