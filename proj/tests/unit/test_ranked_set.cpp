#include <doctest.h>

#include <iterator>
#include <set>

#include "virevo/ranked_set.hpp"
#include "virevo/rng.hpp"

using namespace virevo;

TEST_CASE("ranked set matches an ordered reference under random operations") {
  RankedSet<double, std::less<double>> set;
  std::multiset<double> ref;
  Stream rng(11, "ranked-set", 0);
  for (int step = 0; step < 60000; ++step) {
    const bool grow = ref.size() < 2 || rng.uniform_open() < (step < 30000 ? 0.7 : 0.3);
    if (grow) {
      const double x = rng.uniform_open();
      const std::size_t rank = set.insert(x);
      ref.insert(x);
      REQUIRE(set.at_rank(rank) == x);
    } else {
      const auto k = static_cast<std::size_t>(rng.below(ref.size()));
      const double removed = set.erase_rank(k);
      auto it = std::next(ref.begin(), static_cast<std::ptrdiff_t>(k));
      REQUIRE(removed == *it);
      ref.erase(it);
    }
    REQUIRE(set.size() == ref.size());
    if (!ref.empty()) {
      REQUIRE(set.min() == *ref.begin());
      REQUIRE(set.max() == *ref.rbegin());
    }
  }
  CHECK(set.to_vector() == std::vector<double>(ref.begin(), ref.end()));
  std::size_t k = 0;
  for (double x : set) CHECK(x == set.at_rank(k++));
}

TEST_CASE("ranked set min and max removal") {
  RankedSet<int, std::less<int>> set;
  for (int i : {5, 1, 9, 3}) set.insert(i);
  CHECK(set.erase_min() == 1);
  CHECK(set.erase_max() == 9);
  CHECK(set.to_vector() == std::vector<int>{3, 5});
}
