#include <doctest.h>

#include <cmath>
#include <set>

#include "cew/rng.hpp"

using namespace cew;

// Published Philox4x32-10 known-answer vectors.
TEST_CASE("philox known answers") {
  using A4 = std::array<std::uint32_t, 4>;
  using A2 = std::array<std::uint32_t, 2>;
  CHECK(philox4x32_10(A4{0, 0, 0, 0}, A2{0, 0}) ==
        A4{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
  CHECK(philox4x32_10(A4{0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                      A2{0xffffffffu, 0xffffffffu}) ==
        A4{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
  CHECK(philox4x32_10(A4{0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                      A2{0xa4093822u, 0x299f31d0u}) ==
        A4{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("streams are reproducible and separated by every key component") {
  auto first = [](Rng r) { return r(); };
  const auto base = first(Rng(5, 1, 2, Purpose::policy));
  CHECK(first(Rng(5, 1, 2, Purpose::policy)) == base);
  std::set<std::uint64_t> seen{base};
  seen.insert(first(Rng(6, 1, 2, Purpose::policy)));
  seen.insert(first(Rng(5, 2, 2, Purpose::policy)));
  seen.insert(first(Rng(5, 1, 3, Purpose::policy)));
  seen.insert(first(Rng(5, 1, 2, Purpose::arm)));
  seen.insert(first(Rng(5, 1, 2, Purpose::policy, 1)));
  seen.insert(first(Rng(5, 1, 2, Purpose::policy).split(4)));
  CHECK(seen.size() == 7);
}

TEST_CASE("uniform stays in the open unit interval with the right moments") {
  Rng rng(11);
  const long n = 200000;
  double s = 0.0, s2 = 0.0;
  for (long i = 0; i < n; ++i) {
    const double u = rng.uniform();
    REQUIRE(u > 0.0);
    REQUIRE(u < 1.0);
    s += u;
    s2 += u * u;
  }
  const double se = std::sqrt(1.0 / 12.0 / n);
  CHECK(std::abs(s / n - 0.5) < 4.0 * se);
  CHECK(std::abs(s2 / n - 1.0 / 3.0) < 4.0 * std::sqrt(4.0 / 45.0 / n));
}

TEST_CASE("normal draws have unit variance") {
  Rng rng(12);
  const long n = 100000;
  double s = 0.0, s2 = 0.0;
  for (long i = 0; i < n; ++i) {
    const double z = rng.normal();
    s += z;
    s2 += z * z;
  }
  CHECK(std::abs(s / n) < 4.0 / std::sqrt(n));
  CHECK(std::abs(s2 / n - 1.0) < 4.0 * std::sqrt(2.0 / n));
}

TEST_CASE("below covers the range uniformly") {
  Rng rng(13);
  std::array<long, 5> counts{};
  const long n = 50000;
  for (long i = 0; i < n; ++i) {
    const auto k = rng.below(5);
    REQUIRE(k < 5);
    ++counts[k];
  }
  for (long c : counts) CHECK(std::abs(c - n / 5.0) < 4.0 * std::sqrt(n * 0.2 * 0.8));
}
