#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace dpkit::setfam {

// A finite family of subsets of {0, ..., ground_size-1}. Each member is a
// packed bit vector; bit i of member k tells whether ground element i belongs
// to set k. Members may repeat; labels are optional bookkeeping.
class SetFamily {
 public:
  SetFamily() = default;
  explicit SetFamily(int ground_size) : ground_(ground_size) {}

  int ground_size() const { return ground_; }
  int member_count() const { return static_cast<int>(labels_.size()); }

  // Bits are given as a 0/1 string, character i = ground element i.
  void add_member_bits(const std::string& bits, std::string label = "");
  void add_member(const std::vector<bool>& bits, std::string label = "");

  bool contains(int member, int element) const;
  std::string member_bits(int member) const;
  const std::vector<std::string>& labels() const { return labels_; }

  bool same_incidence(const SetFamily& other) const;

 private:
  int ground_ = 0;
  int words_per_member_ = 0;
  std::vector<std::uint64_t> storage_;
  std::vector<std::string> labels_;

  friend SetFamily trace(const SetFamily&, const std::vector<int>&);
  friend SetFamily dual(const SetFamily&);
  friend int vc_dimension(const SetFamily&);
  friend struct TraceCounter;
};

// Restriction of every member to the listed ground elements (in the given
// order). Indices must be in range and pairwise distinct.
SetFamily trace(const SetFamily& fam, const std::vector<int>& subset);

// Transposed incidence: the output's ground set indexes the input's members
// and vice versa. dual(dual(F)) reproduces F's incidence (labels drop).
SetFamily dual(const SetFamily& fam);

// Largest d such that some d-element subset of the ground set carries all
// 2^d traces. Empty family: -1. Non-empty: at least 0.
int vc_dimension(const SetFamily& fam);

struct ShatterValue {
  int m = 0;
  std::uint64_t distinct_traces = 0;
  bool exact = true;
};

// Maximum number of distinct traces over m-element subsets. With a budget,
// that many random subsets are sampled instead of enumerating (exact=false).
ShatterValue shatter_function(const SetFamily& fam, int m,
                              std::optional<std::uint64_t> budget = std::nullopt,
                              std::uint64_t seed = 0);

// sum_{i=0}^{min(d,n)} C(n, i), exact in 64 bits for n <= 62.
std::uint64_t sauer_bound(int n, int d);

// Nested prefix family {0..i} for i < ground; the standard VC-dimension-1
// test fixture.
SetFamily half_intervals(int ground);

SetFamily load_family_json(const std::string& text);
std::string save_family_json(const SetFamily& fam);

}  // namespace dpkit::setfam
