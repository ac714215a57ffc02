#include <doctest.h>

#include <cmath>
#include <vector>

#include "virevo/engine.hpp"
#include "virevo/parallel.hpp"

using namespace virevo;

TEST_CASE("total rate") {
  CHECK(total_rate(1, ModelParams{0.5, 0.0}) == doctest::Approx(0.5));
  CHECK(total_rate(3, ModelParams{2.0, 0.0}) == doctest::Approx(9.0));
  CHECK(total_rate(2, ModelParams{1.0, 0.3}) == doctest::Approx(4.0));
}

TEST_CASE("model parameters are validated") {
  CHECK_THROWS_AS(ModelParams({0.0, 0.5}).validate(), UsageError);
  CHECK_THROWS_AS(ModelParams({1.0, -0.1}).validate(), UsageError);
  CHECK_THROWS_AS(ModelParams({1.0, 1.5}).validate(), UsageError);
  CHECK_NOTHROW(ModelParams({1.0, 1.0}).validate());
}

TEST_CASE("age of the fittest") {
  PopulationState s;
  s.reset(0.4, 0.0);
  CHECK(age_of_fittest(s) == 0.0);

  s.advance_to(3.0);
  s.add(0.9);
  s.advance_to(7.0);
  CHECK(age_of_fittest(s) == doctest::Approx(4.0));

  // Killing the champion hands the title to the next best type.
  s.remove_rank(s.count() - 1);
  CHECK(age_of_fittest(s) == doctest::Approx(7.0));
}

TEST_CASE("a single type can only give birth") {
  for (std::uint64_t replica = 0; replica < 200; ++replica) {
    Simulator sim(ModelParams{0.7, 0.5}, 5, replica);
    CHECK(sim.step().kind == EventKind::Birth);
  }
}

TEST_CASE("random killing at two types picks each with probability one half") {
  // Start many trajectories, wait for the first death at population 2.
  int first_killed = 0, deaths = 0;
  for (std::uint64_t replica = 0; replica < 8000; ++replica) {
    Simulator sim(ModelParams{1.0, 1.0}, 9, replica);
    const auto born = sim.step();
    REQUIRE(born.population_after == 2);
    const auto e = sim.step();
    if (e.kind == EventKind::Birth) continue;
    REQUIRE(e.kind == EventKind::DeathRandom);
    ++deaths;
    first_killed += e.subject_id == sim.initial_type().id ? 1 : 0;
  }
  const double p = static_cast<double>(first_killed) / deaths;
  CHECK(std::abs(p - 0.5) < 3.0 * std::sqrt(0.25 / deaths));
}

TEST_CASE("least-fit killing never lowers the maximal fitness") {
  std::vector<double> times;
  for (int k = 0; k <= 100; ++k) times.push_back(0.2 * k);
  for (std::uint64_t replica = 0; replica < 50; ++replica) {
    const auto res = simulate(ModelParams{1.2, 0.0}, 20.0, times, 3, {replica});
    for (std::size_t i = 1; i < res.observations.size(); ++i) {
      REQUIRE(res.observations[i].phi >= res.observations[i - 1].phi);
    }
    for (const auto& e : res.events) REQUIRE(e.kind != EventKind::DeathRandom);
  }
}

TEST_CASE("random killing can lower the maximal fitness") {
  bool dropped = false;
  for (std::uint64_t replica = 0; replica < 50 && !dropped; ++replica) {
    Simulator sim(ModelParams{1.0, 0.5}, 4, replica);
    double phi = sim.state().fittest().fitness;
    while (sim.next_event_time() < 30.0 && !dropped) {
      sim.step();
      dropped = sim.state().fittest().fitness < phi;
      phi = sim.state().fittest().fitness;
    }
  }
  CHECK(dropped);
}

TEST_CASE("trajectory invariants along the event log") {
  const std::vector<double> times = {0.0, 5.0, 10.0};
  for (std::uint64_t replica = 0; replica < 20; ++replica) {
    const auto res = simulate(ModelParams{0.9, 0.4}, 10.0, times, 8, {replica});
    const auto& o0 = res.observations.front();
    CHECK(o0.population == 1);
    CHECK(o0.age == 0.0);
    CHECK(o0.births == 1);
    std::uint64_t population = 1;
    double previous = 0.0;
    for (const auto& e : res.events) {
      REQUIRE(e.time > previous);
      previous = e.time;
      if (e.kind != EventKind::Birth) REQUIRE(population >= 2);
      REQUIRE(e.population_after >= 1);
      REQUIRE((e.population_after == population + 1 || e.population_after + 1 == population));
      population = e.population_after;
    }
    for (const auto& o : res.observations) {
      CHECK(o.phi > 0.0);
      CHECK(o.phi < 1.0);
      CHECK(o.age >= 0.0);
      CHECK(o.age <= o.time);
    }
  }
}

TEST_CASE("observations are right-continuous") {
  Simulator probe(ModelParams{1.0, 0.5}, 12, 0);
  probe.step();
  const double t_event = probe.state().time();
  const std::vector<double> at = {t_event};
  const auto res = simulate(ModelParams{1.0, 0.5}, t_event + 1.0, at, 12, {});
  CHECK(res.observations[0].population == 2);
}

TEST_CASE("simulate rejects bad horizons") {
  const std::vector<double> unsorted = {2.0, 1.0};
  const std::vector<double> beyond = {1.0, 3.0};
  CHECK_THROWS_AS(simulate(ModelParams{}, 0.0, {}, 1), UsageError);
  CHECK_THROWS_AS(simulate(ModelParams{}, 2.5, unsorted, 1), UsageError);
  CHECK_THROWS_AS(simulate(ModelParams{}, 2.5, beyond, 1), UsageError);
}

TEST_CASE("equal seeds give identical event logs") {
  const std::vector<double> times = {1.0, 2.0, 3.0};
  const auto a = simulate(ModelParams{1.5, 0.3}, 6.0, times, 77, {2});
  const auto b = simulate(ModelParams{1.5, 0.3}, 6.0, times, 77, {2});
  REQUIRE(a.events.size() == b.events.size());
  for (std::size_t i = 0; i < a.events.size(); ++i) {
    CHECK(a.events[i].time == b.events[i].time);
    CHECK(a.events[i].kind == b.events[i].kind);
    CHECK(a.events[i].subject_id == b.events[i].subject_id);
  }
  CHECK(a.observations == b.observations);
  const auto c = simulate(ModelParams{1.5, 0.3}, 6.0, times, 78, {2});
  CHECK(c.events.size() != a.events.size());
}

TEST_CASE("champion simulator reproduces the generic simulator at r = 0") {
  for (double lambda : {0.5, 1.0, 2.0}) {
    for (std::uint64_t replica = 0; replica < 20; ++replica) {
      Simulator full(ModelParams{lambda, 0.0}, 21, replica);
      ChampionSimulator fast(lambda, 21, replica);
      for (double t : {0.5, 1.0, 2.0, 4.0, 6.0}) {
        full.run_until(t);
        fast.run_until(t);
        REQUIRE(observe(full.state()) == fast.observation());
      }
    }
  }
}

TEST_CASE("replica results do not depend on the worker count") {
  auto one = [](std::size_t i) {
    Simulator sim(ModelParams{1.3, 0.5}, 5, i);
    sim.run_until(4.0);
    return observe(sim.state());
  };
  const auto serial = run_replicas(40, 1, one);
  const auto pooled = run_replicas(40, 4, one);
  CHECK(serial == pooled);
}

TEST_CASE("run_replicas propagates exceptions") {
  CHECK_THROWS_AS(run_replicas(10, 3,
                               [](std::size_t i) -> int {
                                 if (i == 7) throw std::runtime_error("boom");
                                 return static_cast<int>(i);
                               }),
                  std::runtime_error);
}

TEST_CASE("supercritical maximal fitness climbs toward one") {
  const std::vector<double> times = {1.0, 2.0, 4.0, 6.0};
  std::vector<double> mean(times.size(), 0.0);
  constexpr int n = 400;
  for (int replica = 0; replica < n; ++replica) {
    const auto res = simulate(ModelParams{2.0, 0.5}, 6.0, times, 31,
                              {static_cast<std::uint64_t>(replica), {}, false});
    for (std::size_t k = 0; k < times.size(); ++k) mean[k] += res.observations[k].phi / n;
  }
  for (std::size_t k = 1; k < times.size(); ++k) CHECK(mean[k] > mean[k - 1]);
  CHECK(mean.back() > 0.95);
}
