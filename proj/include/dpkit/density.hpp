#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dpkit/formula.hpp"
#include "dpkit/indisc.hpp"
#include "dpkit/oracle.hpp"
#include "dpkit/theory.hpp"

namespace dpkit::density {

// Number of complete sign assignments to the instances of the delta
// formulas over the first n sample points that the theory admits. Formulas
// with parameter arity w contribute one instance per ordered w-tuple.
// Single-atom deltas over one variable run on an incremental solver; the
// general shape falls back to the DNF oracle. node_budget caps the search
// tree (resource_error).
std::uint64_t count_types(const theory::TheorySample& sample, int n,
                          const std::vector<theory::Formula>& delta,
                          std::uint64_t dnf_budget = oracle::kDefaultDnfBudget,
                          std::uint64_t node_budget = 100'000'000);

// Lower bound on the same count: distinct sign vectors realized by the
// candidate x tuples.
std::uint64_t count_types_pool(
    const theory::TheorySample& sample, int n,
    const std::vector<theory::Formula>& delta,
    const std::vector<theory::PointTuple>& candidates);

struct CountTable {
  theory::TheoryId theory = theory::TheoryId::Dlo;
  std::string delta_label;
  std::vector<int> sizes;
  std::vector<std::uint64_t> counts;
  int trials = 1;
  std::uint64_t seed = 0;
};

CountTable count_table(const theory::TheorySample& sample,
                       const std::vector<theory::Formula>& delta,
                       const std::vector<int>& sizes,
                       std::uint64_t dnf_budget = oracle::kDefaultDnfBudget,
                       std::uint64_t node_budget = 100'000'000);

// Type counts along prefixes of a sequence, instances being the formulas at
// each tuple. The sequence must be indiscernible at the given arity for the
// counts to mean anything; that precondition is checked (contract_error).
CountTable density_over_sequence(const indisc::Sequence& seq,
                                 const std::vector<theory::Formula>& delta,
                                 const std::vector<int>& sizes,
                                 int indisc_arity = 2,
                                 std::uint64_t dnf_budget =
                                     oracle::kDefaultDnfBudget);

struct ExponentFit {
  double slope = 0.0;
  double intercept = 0.0;   // natural log of the leading constant
  double residual_rms = 0.0;
  int points_used = 0;
};

// Least-squares line through (ln n, ln count), ignoring sizes below
// drop_below. Needs at least three surviving points (input_error).
ExponentFit fit_exponent(const std::vector<int>& sizes,
                         const std::vector<std::uint64_t>& counts,
                         int drop_below = 8);

// One row per size: theory,delta,n,count,trials,seed.
std::string table_csv(const CountTable& table);

}  // namespace dpkit::density
