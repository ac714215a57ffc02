#include "virevo/engine.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace virevo {

void ModelParams::validate() const {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw UsageError("lambda must be a positive finite number, got " + std::to_string(lambda));
  }
  if (!(r >= 0.0 && r <= 1.0)) {
    throw UsageError("r must lie in [0, 1], got " + std::to_string(r));
  }
}

const char* to_string(EventKind kind) noexcept {
  switch (kind) {
    case EventKind::Birth:
      return "birth";
    case EventKind::DeathRandom:
      return "death_random";
    case EventKind::DeathLeastFit:
      return "death_least_fit";
  }
  return "unknown";
}

void PopulationState::reset(double fitness, double age) {
  types_.clear();
  time_ = 0.0;
  next_id_ = 0;
  types_.insert(TypeRecord{next_id_++, fitness, -age});
}

const TypeRecord& PopulationState::add(double fitness) {
  const std::size_t rank = types_.insert(TypeRecord{next_id_++, fitness, time_});
  return types_.at_rank(rank);
}

double total_rate(std::uint64_t count, const ModelParams& params) noexcept {
  const auto n = static_cast<double>(count);
  if (count <= 1) return params.lambda * n;
  return n * (params.lambda + 1.0);
}

double age_of_fittest(const PopulationState& state) {
  return state.time() - state.fittest().birth_time;
}

Observation observe(const PopulationState& state) {
  return Observation{state.time(), state.count(), state.fittest().fitness, age_of_fittest(state),
                     state.births()};
}

EngineStreams::EngineStreams(std::uint64_t master_seed, std::uint64_t replica)
    : holding(master_seed, "holding", replica),
      choice(master_seed, "choice", replica),
      fitness(master_seed, "fitness", replica),
      coin(master_seed, "kill-coin", replica),
      victim(master_seed, "victim", replica) {}

Simulator::Simulator(const ModelParams& params, std::uint64_t master_seed, std::uint64_t replica,
                     const InitialCondition& init)
    : params_(params), streams_(master_seed, replica) {
  params_.validate();
  const double fitness = init.fitness ? *init.fitness : streams_.fitness.uniform_open();
  if (!(fitness > 0.0 && fitness < 1.0)) throw UsageError("initial fitness must lie in (0, 1)");
  if (!(init.age >= 0.0)) throw UsageError("initial age must be nonnegative");
  state_.reset(fitness, init.age);
  initial_ = state_.fittest();
}

double Simulator::next_event_time() {
  if (!pending_) {
    pending_ = state_.time() + streams_.holding.exponential(total_rate(state_, params_));
  }
  return *pending_;
}

EventRecord Simulator::step() {
  const double t = next_event_time();
  pending_.reset();
  state_.advance_to(t);

  const std::uint64_t n = state_.count();
  const bool birth =
      n == 1 || streams_.choice.uniform_open() < params_.lambda / (params_.lambda + 1.0);
  if (birth) {
    const TypeRecord& added = state_.add(streams_.fitness.uniform_open());
    return EventRecord{t, EventKind::Birth, added.id, added.fitness, state_.count()};
  }
  if (streams_.coin.bernoulli(params_.r)) {
    const auto rank = static_cast<std::size_t>(streams_.victim.below(n));
    const TypeRecord killed = state_.remove_rank(rank);
    return EventRecord{t, EventKind::DeathRandom, killed.id, killed.fitness, state_.count()};
  }
  const TypeRecord killed = state_.remove_rank(0);
  return EventRecord{t, EventKind::DeathLeastFit, killed.id, killed.fitness, state_.count()};
}

void validate_horizon(double t_max, std::span<const double> observation_times) {
  if (!(t_max > 0.0) || !std::isfinite(t_max)) {
    throw UsageError("t_max must be positive and finite");
  }
  if (!std::is_sorted(observation_times.begin(), observation_times.end())) {
    throw UsageError("observation times must be sorted");
  }
  if (!observation_times.empty() &&
      (observation_times.front() < 0.0 || observation_times.back() > t_max)) {
    throw UsageError("observation times must lie in [0, t_max]");
  }
}

SimulationResult simulate(const ModelParams& params, double t_max,
                          std::span<const double> observation_times, std::uint64_t seed,
                          const SimulationOptions& options) {
  validate_horizon(t_max, observation_times);
  Simulator sim(params, seed, options.replica, options.initial);

  SimulationResult out;
  out.initial = sim.initial_type();
  out.observations.reserve(observation_times.size());
  auto record = [&](const EventRecord& e) {
    if (options.record_events) out.events.push_back(e);
  };
  for (double s : observation_times) {
    sim.run_until(s, record);
    out.observations.push_back(observe(sim.state()));
  }
  sim.run_until(t_max, record);
  return out;
}

ChampionSimulator::ChampionSimulator(double lambda, std::uint64_t master_seed,
                                     std::uint64_t replica, const InitialCondition& init)
    : lambda_(lambda), streams_(master_seed, replica) {
  ModelParams{lambda, 0.0}.validate();
  champion_fitness_ = init.fitness ? *init.fitness : streams_.fitness.uniform_open();
  if (!(champion_fitness_ > 0.0 && champion_fitness_ < 1.0)) {
    throw UsageError("initial fitness must lie in (0, 1)");
  }
  champion_birth_ = -init.age;
}

double ChampionSimulator::next_event_time() {
  if (!pending_) {
    const double n = static_cast<double>(count_);
    const double rate = count_ == 1 ? lambda_ : n * (lambda_ + 1.0);
    pending_ = time_ + streams_.holding.exponential(rate);
  }
  return *pending_;
}

bool ChampionSimulator::step() {
  time_ = next_event_time();
  pending_.reset();
  const bool birth = count_ == 1 || streams_.choice.uniform_open() < lambda_ / (lambda_ + 1.0);
  if (birth) {
    ++count_;
    ++births_;
    const double f = streams_.fitness.uniform_open();
    if (f >= champion_fitness_) {  // ties resolve to the newer id, as in ByFitness
      champion_fitness_ = f;
      champion_birth_ = time_;
    }
  } else {
    --count_;
  }
  return birth;
}

}  // namespace virevo
