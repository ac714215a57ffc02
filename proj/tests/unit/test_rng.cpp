#include <doctest.h>

#include <set>

#include "virevo/rng.hpp"

using namespace virevo;

TEST_CASE("substream seeds differ by label and replica") {
  std::set<std::uint64_t> seeds;
  for (const char* label : {"holding", "choice", "fitness", "kill-coin", "victim"}) {
    for (std::uint64_t replica = 0; replica < 100; ++replica) {
      seeds.insert(derive_seed(42, label, replica));
    }
  }
  CHECK(seeds.size() == 500);
  CHECK(derive_seed(1, "holding", 0) != derive_seed(2, "holding", 0));
}

TEST_CASE("stream output is a function of the seed") {
  Stream a(7, "x", 3), b(7, "x", 3);
  for (int i = 0; i < 1000; ++i) CHECK(a.bits() == b.bits());
}

TEST_CASE("uniform draws stay inside the open interval") {
  Stream s(1, "u", 0);
  for (int i = 0; i < 100000; ++i) {
    const double u = s.uniform_open();
    REQUIRE(u > 0.0);
    REQUIRE(u < 1.0);
    const double v = s.uniform_positive();
    REQUIRE(v > 0.0);
    REQUIRE(v <= 1.0);
  }
}

TEST_CASE("below is uniform on its range") {
  Stream s(3, "below", 0);
  constexpr int n = 7;
  constexpr int draws = 70000;
  int counts[n] = {};
  for (int i = 0; i < draws; ++i) {
    const auto k = s.below(n);
    REQUIRE(k < n);
    ++counts[k];
  }
  // Each count is Binomial(70000, 1/7): sd ≈ 92.6.
  for (int c : counts) CHECK(std::abs(c - draws / n) < 4 * 93);
}
