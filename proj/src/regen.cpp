#include "virevo/regen.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "virevo/parallel.hpp"

namespace virevo {

const char* to_string(ExcursionOutcome outcome) noexcept {
  switch (outcome) {
    case ExcursionOutcome::Up:
      return "up";
    case ExcursionOutcome::DownLeastFit:
      return "down_least_fit";
    case ExcursionOutcome::DownRandomKillsIncumbent:
      return "down_random_kills_incumbent";
    case ExcursionOutcome::DownRandomKillsNewcomer:
      return "down_random_kills_newcomer";
  }
  return "unknown";
}

ExcursionDetector::ExcursionDetector(const TypeRecord& initial)
    : incumbent_id_(initial.id), incumbent_fitness_(initial.fitness) {
  alive_.emplace(initial.id, initial.fitness);
}

std::size_t ExcursionDetector::censored() const noexcept {
  return phase_ == Phase::Higher ? 0 : 1;
}

ExcursionScan ExcursionDetector::scan() const {
  ExcursionScan out{excursions_, censored()};
  // The record pushed at the 1 -> 2 jump is unusable until η is known.
  if (phase_ == Phase::AtTwo) out.excursions.pop_back();
  return out;
}

std::optional<std::size_t> ExcursionDetector::on_event(const EventRecord& e) {
  if (e.kind == EventKind::Birth) {
    alive_.emplace(e.subject_id, e.subject_fitness);
  } else if (alive_.erase(e.subject_id) == 0) {
    throw std::logic_error("event log kills type " + std::to_string(e.subject_id) +
                           " which is not alive");
  }
  if (alive_.size() != e.population_after) {
    throw std::logic_error("event log population does not match the replayed type set");
  }

  auto close_at_one = [&](std::size_t index) {
    const auto& survivor = *alive_.begin();
    incumbent_id_ = survivor.first;
    incumbent_fitness_ = survivor.second;
    last_return_ = e.time;
    phase_ = Phase::AtOne;
    phase_start_ = e.time;
    excursions_[index].return_time = e.time;
    return std::optional<std::size_t>(index);
  };

  switch (phase_) {
    case Phase::AtOne: {
      if (e.kind != EventKind::Birth) throw std::logic_error("death at population 1");
      pending_xi_ = e.time - phase_start_;
      ExcursionRecord rec;
      rec.n = excursions_.size() + 1;
      rec.return_time_prev = last_return_;
      rec.xi = pending_xi_;
      rec.newcomer_id = e.subject_id;
      rec.newcomer_fitness = e.subject_fitness;
      rec.incumbent_id = incumbent_id_;
      rec.incumbent_fitness = incumbent_fitness_;
      // Held back until the first level-2 sojourn ends.
      excursions_.push_back(rec);
      phase_ = Phase::AtTwo;
      phase_start_ = e.time;
      return std::nullopt;
    }
    case Phase::AtTwo: {
      auto& rec = excursions_.back();
      rec.eta = e.time - phase_start_;
      if (e.kind == EventKind::Birth) {
        rec.outcome = ExcursionOutcome::Up;
        phase_ = Phase::Higher;
        return std::nullopt;
      }
      if (e.kind == EventKind::DeathLeastFit) {
        rec.outcome = ExcursionOutcome::DownLeastFit;
      } else if (e.subject_id == rec.incumbent_id) {
        rec.outcome = ExcursionOutcome::DownRandomKillsIncumbent;
      } else {
        rec.outcome = ExcursionOutcome::DownRandomKillsNewcomer;
      }
      rec.epsilon = rec.outcome == ExcursionOutcome::DownRandomKillsIncumbent;
      return close_at_one(excursions_.size() - 1);
    }
    case Phase::Higher: {
      if (alive_.size() != 1) return std::nullopt;
      return close_at_one(excursions_.size() - 1);
    }
  }
  return std::nullopt;
}

ExcursionScan detect_excursions(const TypeRecord& initial, std::span<const EventRecord> events) {
  ExcursionDetector detector(initial);
  for (const auto& e : events) detector.on_event(e);
  return detector.scan();
}

std::vector<RegenRecord> detect_regenerations(std::span<const ExcursionRecord> excursions) {
  std::vector<RegenRecord> out;
  for (const auto& ex : excursions) {
    if (!ex.epsilon) continue;
    if (!ex.return_time) throw std::logic_error("epsilon excursion without a return time");
    out.push_back(RegenRecord{out.size() + 1, *ex.return_time, ex.newcomer_fitness, ex.eta});
  }
  return out;
}

std::size_t count_regeneration_violations(const TypeRecord& /*initial*/,
                                          std::span<const EventRecord> events,
                                          std::span<const RegenRecord> regenerations) {
  std::size_t violations = 0;
  std::size_t i = 0;
  std::uint64_t population = 1;
  double previous = -INFINITY;
  for (const auto& reg : regenerations) {
    while (i < events.size() && events[i].time <= reg.time) population = events[i++].population_after;
    if (population != 1) ++violations;
    if (!(reg.time > previous)) ++violations;
    previous = reg.time;
  }
  return violations;
}

double bernoulli_p(const ModelParams& params) {
  params.validate();
  return params.r / (2.0 * (1.0 + params.lambda));
}

double default_t_censor(const ModelParams& params) {
  if (!(params.lambda < 1.0)) throw UsageError("regeneration needs lambda < 1");
  return 50.0 / (1.0 - params.lambda);
}

std::optional<RegenRecord> first_regeneration(const ModelParams& params, double t_censor,
                                              std::uint64_t seed, std::uint64_t replica,
                                              const InitialCondition& init) {
  Simulator sim(params, seed, replica, init);
  ExcursionDetector detector(sim.initial_type());
  while (sim.next_event_time() <= t_censor) {
    const auto done = detector.on_event(sim.step());
    if (done && detector.excursions()[*done].epsilon) {
      const auto& ex = detector.excursions()[*done];
      return RegenRecord{1, *ex.return_time, ex.newcomer_fitness, ex.eta};
    }
  }
  return std::nullopt;
}

R1Estimate estimate_R1(const ModelParams& params, std::size_t n_replicas, double t_censor,
                       std::uint64_t seed, unsigned workers) {
  params.validate();
  if (!(t_censor > 0.0)) throw UsageError("t_censor must be positive");
  if (n_replicas == 0) throw UsageError("need at least one replica");

  const auto firsts = run_replicas(n_replicas, workers, [&](std::size_t i) {
    return first_regeneration(params, t_censor, seed, i);
  });

  R1Estimate est;
  est.replicas = n_replicas;
  for (const auto& f : firsts) {
    if (f) {
      est.samples.push_back(f->time);
    } else {
      ++est.censored;
    }
  }
  if (!est.samples.empty()) {
    double sum = 0.0;
    for (double x : est.samples) sum += x;
    est.mu_hat = sum / static_cast<double>(est.samples.size());
    if (est.samples.size() > 1) {
      double ss = 0.0;
      for (double x : est.samples) ss += (x - est.mu_hat) * (x - est.mu_hat);
      est.standard_error =
          std::sqrt(ss / static_cast<double>(est.samples.size() - 1) /
                    static_cast<double>(est.samples.size()));
    }
  }
  est.censoring_warning = est.censored_fraction() > kCensoringWarnFraction;
  return est;
}

}  // namespace virevo
