#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "virevo/engine.hpp"
#include "virevo/rng.hpp"

namespace virevo {

/// Linear birth-death chain on counts alone: births at rate λn, deaths at
/// rate n. With `floor_at_one` deaths are suppressed at n = 1 (the model's
/// type count); without it 0 is an absorbing trap (the amended chain,
/// a continuous-time branching process).
class CountChain {
 public:
  CountChain(double lambda, bool floor_at_one, std::uint64_t master_seed, std::uint64_t replica,
             std::uint64_t initial = 1);

  double time() const noexcept { return time_; }
  std::uint64_t count() const noexcept { return count_; }
  bool extinct() const noexcept { return count_ == 0; }

  double next_event_time();
  void step();
  void run_until(double t);

  /// Moves the clock to t by sampling the exact transition law of the
  /// branching process (no floor) instead of stepping through events.
  /// Only valid for the floored chain when the floor cannot matter; see
  /// advance_with_leaps().
  void leap_to(double t);

  /// Floored chain only: steps exactly until the count reaches
  /// `leap_threshold`, then leaps. For λ > 1 the floored chain and the
  /// branching process can only differ if the latter falls back to 1
  /// from n ≥ leap_threshold, an event of probability ≤ λ^-(threshold-1).
  void advance_with_leaps(double t, std::uint64_t leap_threshold);

 private:
  double lambda_;
  bool floor_;
  Stream holding_;
  Stream choice_;
  Stream leap_;
  double time_ = 0.0;
  std::uint64_t count_;
  std::optional<double> pending_;
};

/// Exact transition of a linear branching process (birth λ, death 1 per
/// individual) over an interval of length dt, started from m individuals.
/// Each ancestor's clan is empty with probability α and otherwise
/// geometric on {1,2,...} with ratio β; the sum over survivors is a
/// negative binomial.
std::uint64_t sample_branching_transition(std::uint64_t m, double lambda, double dt, Stream& rng);

/// Exact simulator specialised to r = 1. Every death removes a uniformly
/// chosen type, so the fitness order never steers the dynamics and types
/// can live in unordered storage; the champion is rescanned only when it
/// is killed. Same law as Simulator with r = 1, not the same path.
class RandomKillingSimulator {
 public:
  RandomKillingSimulator(double lambda, std::uint64_t master_seed, std::uint64_t replica = 0);

  double time() const noexcept { return time_; }
  std::uint64_t count() const noexcept { return types_.size(); }
  std::uint64_t births() const noexcept { return next_id_; }
  double phi() const noexcept { return types_[champion_].fitness; }
  double age() const noexcept { return time_ - types_[champion_].birth_time; }
  Observation observation() const { return {time_, count(), phi(), age(), births()}; }

  double next_event_time();
  void step();
  void run_until(double t);

 private:
  double lambda_;
  EngineStreams streams_;
  double time_ = 0.0;
  std::uint64_t next_id_ = 0;
  std::vector<TypeRecord> types_;
  std::size_t champion_ = 0;
  std::optional<double> pending_;
};

}  // namespace virevo
