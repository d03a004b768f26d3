#include "dpkit/setfam.hpp"

#include <algorithm>
#include <bit>
#include <unordered_set>

#include <json.hpp>

#include "dpkit/errors.hpp"
#include "dpkit/rng.hpp"

namespace dpkit::setfam {

namespace {
int words_for(int bits) { return (bits + 63) / 64; }
}  // namespace

void SetFamily::add_member_bits(const std::string& bits, std::string label) {
  if (static_cast<int>(bits.size()) != ground_)
    throw input_error("member bit string length " + std::to_string(bits.size()) +
                      " does not match ground size " + std::to_string(ground_));
  std::vector<bool> v(bits.size());
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] != '0' && bits[i] != '1')
      throw input_error("member bit strings must contain only 0 and 1");
    v[i] = bits[i] == '1';
  }
  add_member(v, std::move(label));
}

void SetFamily::add_member(const std::vector<bool>& bits, std::string label) {
  if (static_cast<int>(bits.size()) != ground_)
    throw input_error("member size does not match ground size");
  words_per_member_ = words_for(ground_);
  std::size_t base = storage_.size();
  storage_.resize(base + static_cast<std::size_t>(words_per_member_), 0);
  for (int i = 0; i < ground_; ++i)
    if (bits[static_cast<std::size_t>(i)])
      storage_[base + static_cast<std::size_t>(i / 64)] |= (std::uint64_t{1} << (i % 64));
  labels_.push_back(std::move(label));
}

bool SetFamily::contains(int member, int element) const {
  if (member < 0 || member >= member_count() || element < 0 || element >= ground_)
    throw input_error("member/element index out of range");
  std::size_t base = static_cast<std::size_t>(member) * static_cast<std::size_t>(words_per_member_);
  return (storage_[base + static_cast<std::size_t>(element / 64)] >> (element % 64)) & 1u;
}

std::string SetFamily::member_bits(int member) const {
  std::string out(static_cast<std::size_t>(ground_), '0');
  for (int i = 0; i < ground_; ++i)
    if (contains(member, i)) out[static_cast<std::size_t>(i)] = '1';
  return out;
}

bool SetFamily::same_incidence(const SetFamily& other) const {
  if (ground_ != other.ground_ || member_count() != other.member_count()) return false;
  return storage_ == other.storage_;
}

SetFamily trace(const SetFamily& fam, const std::vector<int>& subset) {
  std::unordered_set<int> seen;
  for (int idx : subset) {
    if (idx < 0 || idx >= fam.ground_)
      throw input_error("trace index " + std::to_string(idx) + " out of range");
    if (!seen.insert(idx).second)
      throw input_error("trace indices must be pairwise distinct");
  }
  SetFamily out(static_cast<int>(subset.size()));
  for (int k = 0; k < fam.member_count(); ++k) {
    std::vector<bool> bits(subset.size());
    for (std::size_t j = 0; j < subset.size(); ++j) bits[j] = fam.contains(k, subset[j]);
    out.add_member(bits);
  }
  return out;
}

SetFamily dual(const SetFamily& fam) {
  SetFamily out(fam.member_count());
  for (int i = 0; i < fam.ground_; ++i) {
    std::vector<bool> bits(static_cast<std::size_t>(fam.member_count()));
    for (int k = 0; k < fam.member_count(); ++k) bits[static_cast<std::size_t>(k)] = fam.contains(k, i);
    out.add_member(bits);
  }
  return out;
}

namespace {

// Collects the distinct traces of all members on one subset (subset size is
// capped well below 64 by the callers).
struct SubsetTracer {
  const SetFamily& fam;
  explicit SubsetTracer(const SetFamily& f) : fam(f) {}

  std::uint64_t member_word(int member, const std::vector<int>& subset) const {
    std::uint64_t w = 0;
    for (std::size_t j = 0; j < subset.size(); ++j)
      if (fam.contains(member, subset[j])) w |= (std::uint64_t{1} << j);
    return w;
  }

  std::uint64_t distinct(const std::vector<int>& subset) const {
    std::unordered_set<std::uint64_t> seen;
    for (int k = 0; k < fam.member_count(); ++k) seen.insert(member_word(k, subset));
    return seen.size();
  }

  bool shatters(const std::vector<int>& subset) const {
    std::uint64_t want = std::uint64_t{1} << subset.size();
    if (static_cast<std::uint64_t>(fam.member_count()) < want) return false;
    std::vector<bool> hit(static_cast<std::size_t>(want), false);
    std::uint64_t found = 0;
    for (int k = 0; k < fam.member_count() && found < want; ++k) {
      std::uint64_t w = member_word(k, subset);
      if (!hit[static_cast<std::size_t>(w)]) {
        hit[static_cast<std::size_t>(w)] = true;
        ++found;
      }
    }
    return found == want;
  }
};

// Visits all m-element subsets of {0..n-1} until fn returns false.
template <typename Fn>
void for_each_subset(int n, int m, Fn&& fn) {
  if (m < 0 || m > n) return;
  std::vector<int> idx(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) idx[static_cast<std::size_t>(i)] = i;
  while (true) {
    if (!fn(idx)) return;
    int i = m - 1;
    while (i >= 0 && idx[static_cast<std::size_t>(i)] == n - m + i) --i;
    if (i < 0) return;
    ++idx[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < m; ++j)
      idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
  }
}

}  // namespace

int vc_dimension(const SetFamily& fam) {
  if (fam.member_count() == 0) return -1;
  SubsetTracer tracer(fam);
  int best = 0;  // the empty subset is always shattered by a non-empty family
  for (int m = 1; m <= fam.ground_size(); ++m) {
    if ((std::uint64_t{1} << m) > static_cast<std::uint64_t>(fam.member_count())) break;
    bool any = false;
    for_each_subset(fam.ground_size(), m, [&](const std::vector<int>& subset) {
      if (tracer.shatters(subset)) {
        any = true;
        return false;
      }
      return true;
    });
    // Shattering is downward closed, so the first empty level ends the search.
    if (!any) break;
    best = m;
  }
  return best;
}

ShatterValue shatter_function(const SetFamily& fam, int m,
                              std::optional<std::uint64_t> budget, std::uint64_t seed) {
  if (m < 0 || m > fam.ground_size())
    throw input_error("shatter_function: m out of range");
  SubsetTracer tracer(fam);
  ShatterValue out;
  out.m = m;
  if (m == 0) {
    out.distinct_traces = fam.member_count() > 0 ? 1 : 0;
    return out;
  }
  if (!budget) {
    for_each_subset(fam.ground_size(), m, [&](const std::vector<int>& subset) {
      out.distinct_traces = std::max(out.distinct_traces, tracer.distinct(subset));
      return true;
    });
    return out;
  }
  out.exact = false;
  Rng rng(seed);
  std::vector<int> all(static_cast<std::size_t>(fam.ground_size()));
  for (int i = 0; i < fam.ground_size(); ++i) all[static_cast<std::size_t>(i)] = i;
  for (std::uint64_t t = 0; t < *budget; ++t) {
    // Partial Fisher-Yates: the first m entries become the sampled subset.
    for (int i = 0; i < m; ++i) {
      int j = i + static_cast<int>(rng.below(static_cast<std::uint64_t>(fam.ground_size() - i)));
      std::swap(all[static_cast<std::size_t>(i)], all[static_cast<std::size_t>(j)]);
    }
    std::vector<int> subset(all.begin(), all.begin() + m);
    std::sort(subset.begin(), subset.end());
    out.distinct_traces = std::max(out.distinct_traces, tracer.distinct(subset));
  }
  return out;
}

std::uint64_t sauer_bound(int n, int d) {
  if (n < 0 || d < 0) throw input_error("sauer_bound: arguments must be non-negative");
  if (n > 62) throw input_error("sauer_bound: n above 62 overflows 64-bit arithmetic");
  std::uint64_t total = 0;
  std::uint64_t binom = 1;  // C(n, 0)
  int top = std::min(d, n);
  for (int i = 0; i <= top; ++i) {
    total += binom;
    binom = binom * static_cast<std::uint64_t>(n - i) / static_cast<std::uint64_t>(i + 1);
  }
  return total;
}

SetFamily half_intervals(int ground) {
  SetFamily fam(ground);
  for (int i = 0; i < ground; ++i) {
    std::vector<bool> bits(static_cast<std::size_t>(ground), false);
    for (int j = 0; j <= i; ++j) bits[static_cast<std::size_t>(j)] = true;
    fam.add_member(bits, "le" + std::to_string(i));
  }
  return fam;
}

SetFamily load_family_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw io_error(std::string("family JSON parse failure: ") + e.what());
  }
  if (!j.contains("ground") || !j.contains("sets"))
    throw io_error("family JSON needs \"ground\" and \"sets\"");
  SetFamily fam(j.at("ground").get<int>());
  std::vector<std::string> labels;
  if (j.contains("labels")) labels = j.at("labels").get<std::vector<std::string>>();
  const auto& sets = j.at("sets");
  if (!labels.empty() && labels.size() != sets.size())
    throw io_error("family JSON labels do not match member count");
  std::size_t k = 0;
  for (const auto& s : sets) {
    try {
      fam.add_member_bits(s.get<std::string>(), labels.empty() ? "" : labels[k]);
    } catch (const input_error& e) {
      throw io_error(std::string("family JSON member rejected: ") + e.what());
    }
    ++k;
  }
  return fam;
}

std::string save_family_json(const SetFamily& fam) {
  nlohmann::json j;
  j["ground"] = fam.ground_size();
  auto sets = nlohmann::json::array();
  for (int k = 0; k < fam.member_count(); ++k) sets.push_back(fam.member_bits(k));
  j["sets"] = std::move(sets);
  bool any_label = false;
  for (const auto& l : fam.labels()) any_label = any_label || !l.empty();
  if (any_label) j["labels"] = fam.labels();
  return j.dump(2) + "\n";
}

}  // namespace dpkit::setfam
