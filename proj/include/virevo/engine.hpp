#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "virevo/error.hpp"
#include "virevo/ranked_set.hpp"
#include "virevo/rng.hpp"

namespace virevo {

struct ModelParams {
  double lambda = 0.5;  // per-type birth (mutation) rate
  double r = 0.0;       // probability that a death is a random killing

  void validate() const;
};

struct TypeRecord {
  std::uint64_t id = 0;
  double fitness = 0.5;
  // Creation time. Negative only for an initial type seeded with a
  // prescribed age.
  double birth_time = 0.0;
};

struct ByFitness {
  bool operator()(const TypeRecord& a, const TypeRecord& b) const noexcept {
    return a.fitness < b.fitness || (a.fitness == b.fitness && a.id < b.id);
  }
};

enum class EventKind : std::uint8_t { Birth, DeathRandom, DeathLeastFit };

const char* to_string(EventKind kind) noexcept;

struct EventRecord {
  double time = 0.0;
  EventKind kind = EventKind::Birth;
  std::uint64_t subject_id = 0;  // created or killed type
  double subject_fitness = 0.0;
  std::uint64_t population_after = 0;
};

struct Observation {
  double time = 0.0;
  std::uint64_t population = 0;
  double phi = 0.0;
  double age = 0.0;
  std::uint64_t births = 0;  // B(t), counting the initial type

  bool operator==(const Observation&) const = default;
};

/// Living types ordered by (fitness, id), plus the clock.
class PopulationState {
 public:
  double time() const noexcept { return time_; }
  std::uint64_t count() const noexcept { return types_.size(); }
  std::uint64_t births() const noexcept { return next_id_; }

  const TypeRecord& fittest() const { return types_.max(); }
  const TypeRecord& least_fit() const { return types_.min(); }
  const TypeRecord& at_rank(std::size_t k) const { return types_.at_rank(k); }
  const RankedSet<TypeRecord, ByFitness>& types() const noexcept { return types_; }

  /// Resets to a single type created at time -age (so its age at time 0
  /// equals `age`).
  void reset(double fitness, double age);
  const TypeRecord& add(double fitness);
  TypeRecord remove_rank(std::size_t k) { return types_.erase_rank(k); }
  void advance_to(double t) noexcept { time_ = t; }

 private:
  double time_ = 0.0;
  std::uint64_t next_id_ = 0;
  RankedSet<TypeRecord, ByFitness> types_;
};

/// λ·n at n = 1 (no death allowed), n·(λ+1) otherwise.
double total_rate(std::uint64_t count, const ModelParams& params) noexcept;
inline double total_rate(const PopulationState& s, const ModelParams& p) noexcept {
  return total_rate(s.count(), p);
}

double age_of_fittest(const PopulationState& state);

Observation observe(const PopulationState& state);

/// Start of a trajectory. The initial fitness is drawn from the fitness
/// stream unless fixed here.
struct InitialCondition {
  std::optional<double> fitness;
  double age = 0.0;
};

/// The named substreams of one replica.
struct EngineStreams {
  EngineStreams(std::uint64_t master_seed, std::uint64_t replica);

  Stream holding;  // exponential holding times
  Stream choice;   // birth vs death
  Stream fitness;  // fitness of new types (including the initial one)
  Stream coin;     // Bernoulli(r) per death: random killing or least fit
  Stream victim;   // uniform rank of a randomly killed type
};

/// Exact event-driven simulator of one trajectory.
///
/// Each event draws an exponential holding time with rate total_rate,
/// then chooses birth with probability nλ/total_rate. A death first
/// flips its own Bernoulli(r) coin: heads removes a uniformly ranked
/// type, tails removes the least fit one.
class Simulator {
 public:
  Simulator(const ModelParams& params, std::uint64_t master_seed, std::uint64_t replica = 0,
            const InitialCondition& init = {});

  const PopulationState& state() const noexcept { return state_; }
  const ModelParams& params() const noexcept { return params_; }
  const TypeRecord& initial_type() const noexcept { return initial_; }

  /// Time of the next event. Drawn once and kept until step() runs.
  double next_event_time();

  /// Applies the pending event.
  EventRecord step();

  /// Steps through all events with time <= t and leaves the clock at t.
  template <class OnEvent>
  void run_until(double t, OnEvent&& on_event) {
    while (next_event_time() <= t) on_event(step());
    state_.advance_to(std::max(state_.time(), t));
  }
  void run_until(double t) {
    run_until(t, [](const EventRecord&) {});
  }

 private:
  ModelParams params_;
  EngineStreams streams_;
  PopulationState state_;
  TypeRecord initial_;
  std::optional<double> pending_;
};

struct SimulationOptions {
  std::uint64_t replica = 0;
  InitialCondition initial;
  bool record_events = true;
};

struct SimulationResult {
  TypeRecord initial;
  std::vector<Observation> observations;
  std::vector<EventRecord> events;
};

/// Runs one trajectory on [0, t_max]. Observations are right-continuous:
/// the observation at s includes every event with time <= s.
SimulationResult simulate(const ModelParams& params, double t_max,
                          std::span<const double> observation_times, std::uint64_t seed,
                          const SimulationOptions& options = {});

/// Checks t_max > 0 and 0 <= observation times <= t_max, sorted.
void validate_horizon(double t_max, std::span<const double> observation_times);

/// Exact simulator for r = 0 that keeps only the population count and the
/// champion. With least-fit killing the fittest type can only die when it
/// is the least fit, which never happens at n >= 2, so φ is the maximum
/// fitness ever created and a_t is measured from the last record.
/// Consumes the same streams in the same order as Simulator, so for equal
/// seeds both produce identical observations.
class ChampionSimulator {
 public:
  ChampionSimulator(double lambda, std::uint64_t master_seed, std::uint64_t replica = 0,
                    const InitialCondition& init = {});

  double time() const noexcept { return time_; }
  std::uint64_t count() const noexcept { return count_; }
  std::uint64_t births() const noexcept { return births_; }
  double phi() const noexcept { return champion_fitness_; }
  double age() const noexcept { return time_ - champion_birth_; }
  Observation observation() const { return {time_, count_, phi(), age(), births_}; }

  double next_event_time();
  /// Applies the pending event; returns true for a birth.
  bool step();

  template <class OnEvent>
  void run_until(double t, OnEvent&& on_event) {
    while (next_event_time() <= t) {
      const bool birth = step();
      on_event(time_, count_, birth);
    }
    time_ = std::max(time_, t);
  }
  void run_until(double t) {
    run_until(t, [](double, std::uint64_t, bool) {});
  }

 private:
  double lambda_;
  EngineStreams streams_;
  double time_ = 0.0;
  std::uint64_t count_ = 1;
  std::uint64_t births_ = 1;
  double champion_fitness_ = 0.5;
  double champion_birth_ = 0.0;
  std::optional<double> pending_;
};

}  // namespace virevo
