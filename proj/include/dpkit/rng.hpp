#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace dpkit {

// Thin wrapper around std::mt19937_64 with hand-rolled bounded draws and
// shuffling. std::shuffle and the distribution classes are not pinned down
// by the standard, so anything that must reproduce byte-for-byte from a seed
// goes through this instead.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next() { return eng_(); }

  // Uniform draw in [0, bound). Modulo bias is irrelevant at desk scale.
  std::uint64_t below(std::uint64_t bound) { return bound ? eng_() % bound : 0; }

  int range(int lo, int hi) {  // inclusive ends
    return lo + static_cast<int>(below(static_cast<std::uint64_t>(hi - lo + 1)));
  }

  bool coin() { return (eng_() & 1u) != 0; }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace dpkit
