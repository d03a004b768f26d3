#include <doctest.h>

#include <dpkit/rng.hpp>
#include <dpkit/setfam.hpp>

#include <algorithm>
#include <cstdint>
#include <vector>

using namespace dpkit;
using setfam::SetFamily;

namespace {

SetFamily random_family(Rng& rng, int max_ground, int max_members) {
  int ground = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_ground)));
  int members = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_members)));
  SetFamily fam(ground);
  for (int k = 0; k < members; ++k) {
    std::vector<bool> bits(ground);
    for (int i = 0; i < ground; ++i) bits[i] = rng.coin();
    fam.add_member(bits);
  }
  return fam;
}

}  // namespace

TEST_CASE("half_intervals basics") {
  SetFamily fam = setfam::half_intervals(5);
  CHECK(fam.ground_size() == 5);
  CHECK(fam.member_count() == 5);
  CHECK(fam.contains(2, 0));
  CHECK(fam.contains(2, 2));
  CHECK_FALSE(fam.contains(2, 3));
  CHECK(fam.member_bits(0) == "10000");
  CHECK(fam.member_bits(4) == "11111");
}

TEST_CASE("vc dimension of nested prefixes is 1") {
  for (int n : {2, 5, 9}) {
    CHECK(setfam::vc_dimension(setfam::half_intervals(n)) == 1);
  }
}

TEST_CASE("vc dimension edge cases") {
  SetFamily empty(4);
  CHECK(setfam::vc_dimension(empty) == -1);

  SetFamily single(3);
  single.add_member_bits("101");
  CHECK(setfam::vc_dimension(single) == 0);

  SetFamily full(4);
  for (int mask = 0; mask < 16; ++mask) {
    std::vector<bool> bits(4);
    for (int i = 0; i < 4; ++i) bits[i] = (mask >> i) & 1;
    full.add_member(bits);
  }
  CHECK(setfam::vc_dimension(full) == 4);
}

TEST_CASE("hand built family with vc 2") {
  SetFamily fam(4);
  fam.add_member_bits("0000");
  fam.add_member_bits("1000");
  fam.add_member_bits("1100");
  fam.add_member_bits("1110");
  fam.add_member_bits("1111");
  fam.add_member_bits("0110");
  CHECK(setfam::vc_dimension(fam) == 2);
}

TEST_CASE("shatter function exact values") {
  SetFamily chain = setfam::half_intervals(6);
  CHECK(setfam::shatter_function(chain, 0).distinct_traces == 1);
  CHECK(setfam::shatter_function(chain, 1).distinct_traces == 2);
  CHECK(setfam::shatter_function(chain, 3).distinct_traces == 4);
  CHECK(setfam::shatter_function(chain, 6).distinct_traces == 6);

  SetFamily full(4);
  for (int mask = 0; mask < 16; ++mask) {
    std::vector<bool> bits(4);
    for (int i = 0; i < 4; ++i) bits[i] = (mask >> i) & 1;
    full.add_member(bits);
  }
  for (int m = 0; m <= 4; ++m) {
    CHECK(setfam::shatter_function(full, m).distinct_traces ==
          (std::uint64_t{1} << m));
  }
}

TEST_CASE("sampled shatter never exceeds exact") {
  Rng rng(7);
  for (int t = 0; t < 20; ++t) {
    SetFamily fam = random_family(rng, 9, 30);
    for (int m = 1; m <= std::min(4, fam.ground_size()); ++m) {
      auto exact = setfam::shatter_function(fam, m);
      auto sampled = setfam::shatter_function(fam, m, 16, 99 + t);
      CHECK(exact.exact);
      CHECK(sampled.distinct_traces <= exact.distinct_traces);
    }
  }
}

TEST_CASE("sauer bound closed form") {
  CHECK(setfam::sauer_bound(5, 0) == 1);
  CHECK(setfam::sauer_bound(5, 1) == 6);
  CHECK(setfam::sauer_bound(5, 2) == 16);
  CHECK(setfam::sauer_bound(5, 5) == 32);
  CHECK(setfam::sauer_bound(3, 7) == 8);
  CHECK(setfam::sauer_bound(62, 1) == 63);
  CHECK(setfam::sauer_bound(10, 3) == 1 + 10 + 45 + 120);
}

TEST_CASE("shatter values respect the binomial sum bound") {
  Rng rng(11);
  for (int t = 0; t < 60; ++t) {
    SetFamily fam = random_family(rng, 10, 40);
    int d = setfam::vc_dimension(fam);
    for (int m = 0; m <= fam.ground_size(); ++m) {
      auto value = setfam::shatter_function(fam, m);
      CHECK(value.distinct_traces <= setfam::sauer_bound(m, d));
    }
  }
}

TEST_CASE("trace restricts incidence") {
  SetFamily fam = setfam::half_intervals(6);
  SetFamily restricted = setfam::trace(fam, {1, 3});
  CHECK(restricted.ground_size() == 2);
  CHECK(restricted.member_count() == 6);
  CHECK(restricted.member_bits(0) == "00");
  CHECK(restricted.member_bits(2) == "10");
  CHECK(restricted.member_bits(5) == "11");
}

TEST_CASE("dual transposes incidence") {
  SetFamily fam(3);
  fam.add_member_bits("110");
  fam.add_member_bits("011");
  SetFamily d = setfam::dual(fam);
  CHECK(d.ground_size() == 2);
  CHECK(d.member_count() == 3);
  CHECK(d.member_bits(0) == "10");
  CHECK(d.member_bits(1) == "11");
  CHECK(d.member_bits(2) == "01");
}

TEST_CASE("double dual reproduces incidence") {
  Rng rng(23);
  for (int t = 0; t < 50; ++t) {
    SetFamily fam = random_family(rng, 9, 25);
    SetFamily dd = setfam::dual(setfam::dual(fam));
    CHECK(fam.same_incidence(dd));
    CHECK(setfam::vc_dimension(fam) == setfam::vc_dimension(dd));
  }
}

TEST_CASE("dual of a chain still has vc 1") {
  CHECK(setfam::vc_dimension(setfam::dual(setfam::half_intervals(7))) == 1);
}

TEST_CASE("wide ground sets cross word boundaries") {
  SetFamily fam(70);
  std::vector<bool> bits(70, false);
  bits[0] = bits[63] = bits[64] = bits[69] = true;
  fam.add_member(bits);
  CHECK(fam.contains(0, 63));
  CHECK(fam.contains(0, 64));
  CHECK_FALSE(fam.contains(0, 62));
  SetFamily restricted = setfam::trace(fam, {62, 63, 64, 69});
  CHECK(restricted.member_bits(0) == "0111");
}

TEST_CASE("json round trip keeps incidence and labels") {
  SetFamily fam(4);
  fam.add_member_bits("1010", "left");
  fam.add_member_bits("0101", "right");
  SetFamily back = setfam::load_family_json(setfam::save_family_json(fam));
  CHECK(fam.same_incidence(back));
  REQUIRE(back.labels().size() == 2);
  CHECK(back.labels()[0] == "left");
  CHECK(back.labels()[1] == "right");
}

TEST_CASE("same_incidence is order sensitive in members but not labels") {
  SetFamily a(2);
  a.add_member_bits("10", "x");
  a.add_member_bits("01", "y");
  SetFamily b(2);
  b.add_member_bits("10", "other");
  b.add_member_bits("01", "name");
  SetFamily c(2);
  c.add_member_bits("01");
  c.add_member_bits("10");
  CHECK(a.same_incidence(b));
  CHECK_FALSE(a.same_incidence(c));
}
