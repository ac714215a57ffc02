#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "tolerances.hpp"
#include "virevo/count_process.hpp"
#include "virevo/coupling.hpp"

using namespace virevo;

namespace {
using Set = OrderedFitnessSet;
}

TEST_CASE("order relation") {
  const Set a({0.2, 0.5}), b({0.3, 0.7}), c({0.2, 0.8});
  CHECK(precedes(a, a));
  CHECK(precedes(a, b));
  CHECK_FALSE(precedes(c, b));
  CHECK_THROWS_AS(precedes(a, Set({0.1})), UsageError);
  CHECK_THROWS_AS(Set({0.2, 0.2}), UsageError);
  CHECK_THROWS_AS(Set({1.0}), UsageError);
}

TEST_CASE("common insertion") {
  const auto [a, b] = insert_common(Set({0.2, 0.5}), Set({0.3, 0.7}), 0.4);
  CHECK(a.values() == std::vector<double>{0.2, 0.4, 0.5});
  CHECK(b.values() == std::vector<double>{0.3, 0.4, 0.7});
  CHECK(precedes(a, b));

  const auto [x, y] = insert_common(Set({0.1, 0.6}), Set({0.1, 0.6}), 0.9);
  CHECK(x == y);

  CHECK_THROWS_AS(insert_common(Set({0.2, 0.5}), Set({0.3, 0.7}), 0.7), UsageError);
  CHECK_THROWS_AS(insert_common(Set({0.3, 0.7}), Set({0.2, 0.5}), 0.4), UsageError);
}

TEST_CASE("coupled deletion") {
  const auto [a, b] = delete_coupled(Set({0.2, 0.5}), Set({0.3, 0.7}), DeleteRule::min_vs_rank(1));
  CHECK(a.values() == std::vector<double>{0.2});
  CHECK(b.values() == std::vector<double>{0.7});
  CHECK(precedes(a, b));

  for (std::size_t j = 1; j <= 3; ++j) {
    const auto [x, y] =
        delete_coupled(Set({0.1, 0.4, 0.8}), Set({0.1, 0.4, 0.8}), DeleteRule::random_rank(j));
    CHECK(x == y);
    CHECK(x.size() == 2);
  }
  const auto [p, q] =
      delete_coupled(Set({0.1, 0.4, 0.8}), Set({0.2, 0.5, 0.9}), DeleteRule::random_rank(1));
  CHECK(p.max() == 0.4);
  CHECK(q.max() == 0.5);

  CHECK_THROWS_AS(delete_coupled(Set({0.2}), Set({0.3}), DeleteRule::random_rank(1)), UsageError);
  CHECK_THROWS_AS(delete_coupled(Set({0.2, 0.5}), Set({0.3, 0.7}), DeleteRule::random_rank(3)),
                  UsageError);
}

TEST_CASE("lemma holds on every small configuration") {
  const auto e = enumerate_lemma(4, 8);
  CHECK(e.insert_cases > 1000);
  CHECK(e.delete_cases > 1000);
  CHECK(e.violations == 0);
}

TEST_CASE("lemma holds on random configurations") {
  const auto r = randomized_lemma(100000, 16, 5);
  CHECK(r.insert_cases > 90000);
  CHECK(r.violations == 0);
}

TEST_CASE("coupled trajectories") {
  const ModelParams params{2.0, 0.5};
  for (std::uint64_t replica = 0; replica < 20; ++replica) {
    CoupledOptions opt;
    opt.record_trace = true;
    const auto run = coupled_simulate(params, 4.0, 3, replica, opt);
    CHECK(run.violations == 0);
    for (const auto& p : run.trace) REQUIRE(p.max_fr >= p.max_f1);
    CHECK(run.dominance_gap_min == 0.0);

    CoupledOptions same;
    same.force_eps_one = true;
    const auto mirrored = coupled_simulate(params, 4.0, 3, replica, same);
    CHECK(mirrored.identical);
    CHECK(mirrored.max_f1 == mirrored.max_fr);
  }
}

TEST_CASE("coupled marginals match the direct simulators") {
  const ModelParams params{1.5, 0.5};
  constexpr std::size_t n = 2000;
  std::vector<double> f1, fr, direct1, directr;
  for (std::size_t i = 0; i < n; ++i) {
    const auto run = coupled_simulate(params, 3.0, 61, i);
    f1.push_back(run.max_f1);
    fr.push_back(run.max_fr);
    RandomKillingSimulator one(params.lambda, 62, i);
    one.run_until(3.0);
    direct1.push_back(one.phi());
    Simulator gen(params, 63, i);
    gen.run_until(3.0);
    directr.push_back(gen.state().fittest().fitness);
  }
  const double crit = ks_two_sample_critical(n, n);
  CHECK(ks_two_sample(EmpiricalDistribution(f1), EmpiricalDistribution(direct1)) <= crit);
  CHECK(ks_two_sample(EmpiricalDistribution(fr), EmpiricalDistribution(directr)) <= crit);
}

TEST_CASE("conditional law of the maximum") {
  Stream rng(8, "cond", 0);
  std::vector<std::uint64_t> xs;
  std::vector<double> phi;
  for (int i = 0; i < 3000; ++i) {
    const std::uint64_t k = 1 + rng.below(3);
    double m = 0.0;
    for (std::uint64_t j = 0; j < k; ++j) m = std::max(m, rng.uniform_open());
    xs.push_back(k);
    phi.push_back(m);
  }
  xs.push_back(9);
  phi.push_back(0.5);
  const auto report = conditional_max_law(xs, phi);
  CHECK(report.tested.size() == 3);
  CHECK(report.tested[0].k == 1);
  REQUIRE(report.skipped.size() == 1);
  CHECK(report.skipped[0].first == 9);
  CHECK(report.pass);

  // Max of two uniforms is not uniform.
  std::vector<std::uint64_t> ones(xs.size(), 1);
  CHECK_FALSE(conditional_max_law(ones, phi).pass);
}

TEST_CASE("range check agrees with the full order check") {
  // Arbitrary updates, not only lemma moves, so both outcomes occur.
  Stream rng(12, "range-check", 0);
  std::size_t broken = 0;
  for (int trial = 0; trial < 20000; ++trial) {
    const std::size_t k = 1 + rng.below(8);
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < k; ++i) xs.push_back(rng.uniform_open());
    std::sort(xs.begin(), xs.end());
    for (double x : xs) ys.push_back(x + (1.0 - x) * rng.uniform_open() * 0.5);
    Set a(xs), b(ys);
    if (!precedes(a, b)) continue;
    std::size_t lo = 0, hi = 0;
    if (rng.bernoulli(0.5)) {
      const double u = rng.uniform_open(), w = rng.uniform_open();
      if (a.contains(u) || b.contains(w)) continue;
      const std::size_t ia = a.insert(u), ib = b.insert(w);
      lo = std::min(ia, ib);
      hi = std::max(ia, ib) + 1;
    } else {
      if (k < 2) continue;
      const std::size_t ja = 1 + rng.below(k), jb = 1 + rng.below(k);
      const std::size_t ia = k - ja, ib = k - jb;
      a.erase_largest(ja);
      b.erase_largest(jb);
      lo = std::min(ia, ib);
      hi = std::max(ia, ib);
    }
    const bool full = precedes(a, b);
    broken += full ? 0 : 1;
    REQUIRE(full == precedes_between(a, b, lo, hi));
  }
  CHECK(broken > 100);
}
