#include "virevo/count_process.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace virevo {

CountChain::CountChain(double lambda, bool floor_at_one, std::uint64_t master_seed,
                       std::uint64_t replica, std::uint64_t initial)
    : lambda_(lambda),
      floor_(floor_at_one),
      holding_(master_seed, "count-holding", replica),
      choice_(master_seed, "count-choice", replica),
      leap_(master_seed, "count-leap", replica),
      count_(initial) {
  ModelParams{lambda, 0.0}.validate();
  if (floor_at_one && initial == 0) throw UsageError("floored chain cannot start at 0");
}

double CountChain::next_event_time() {
  if (!pending_) {
    if (count_ == 0) {
      pending_ = INFINITY;
    } else {
      const double n = static_cast<double>(count_);
      const double rate = (floor_ && count_ == 1) ? lambda_ : n * (lambda_ + 1.0);
      pending_ = time_ + holding_.exponential(rate);
    }
  }
  return *pending_;
}

void CountChain::step() {
  time_ = next_event_time();
  pending_.reset();
  const bool birth = (floor_ && count_ == 1) ||
                     choice_.uniform_open() < lambda_ / (lambda_ + 1.0);
  if (birth) {
    ++count_;
  } else {
    --count_;
  }
}

void CountChain::run_until(double t) {
  while (next_event_time() <= t) step();
  time_ = std::max(time_, t);
}

void CountChain::leap_to(double t) {
  if (t <= time_) return;
  pending_.reset();
  count_ = sample_branching_transition(count_, lambda_, t - time_, leap_);
  time_ = t;
}

void CountChain::advance_with_leaps(double t, std::uint64_t leap_threshold) {
  if (!floor_) throw UsageError("advance_with_leaps applies to the floored chain");
  if (!(lambda_ > 1.0)) throw UsageError("leaping the floored chain requires lambda > 1");
  while (count_ < leap_threshold && next_event_time() <= t) step();
  if (count_ < leap_threshold) {
    time_ = std::max(time_, t);
    return;
  }
  leap_to(t);
}

std::uint64_t sample_branching_transition(std::uint64_t m, double lambda, double dt,
                                          Stream& rng) {
  if (m == 0 || dt <= 0.0) return m;
  double extinct;  // α
  double ratio;    // β
  if (std::abs(lambda - 1.0) < 1e-12) {
    extinct = dt / (1.0 + dt);
    ratio = dt / (1.0 + dt);
  } else {
    const double grow = std::exp((lambda - 1.0) * dt);
    const double denom = lambda * grow - 1.0;
    extinct = (grow - 1.0) / denom;
    ratio = lambda * (grow - 1.0) / denom;
  }
  std::binomial_distribution<std::uint64_t> survivors_dist(m, 1.0 - extinct);
  const std::uint64_t survivors = survivors_dist(rng.engine());
  if (survivors == 0) return 0;
  std::negative_binomial_distribution<std::uint64_t> extra_dist(survivors, 1.0 - ratio);
  return survivors + extra_dist(rng.engine());
}

RandomKillingSimulator::RandomKillingSimulator(double lambda, std::uint64_t master_seed,
                                               std::uint64_t replica)
    : lambda_(lambda), streams_(master_seed, replica) {
  ModelParams{lambda, 1.0}.validate();
  types_.push_back(TypeRecord{next_id_++, streams_.fitness.uniform_open(), 0.0});
}

double RandomKillingSimulator::next_event_time() {
  if (!pending_) {
    const auto n = static_cast<double>(types_.size());
    const double rate = types_.size() == 1 ? lambda_ : n * (lambda_ + 1.0);
    pending_ = time_ + streams_.holding.exponential(rate);
  }
  return *pending_;
}

void RandomKillingSimulator::step() {
  time_ = next_event_time();
  pending_.reset();
  const std::size_t n = types_.size();
  const bool birth = n == 1 || streams_.choice.uniform_open() < lambda_ / (lambda_ + 1.0);
  if (birth) {
    types_.push_back(TypeRecord{next_id_++, streams_.fitness.uniform_open(), time_});
    if (types_.back().fitness >= types_[champion_].fitness) champion_ = n;
    return;
  }
  const auto victim = static_cast<std::size_t>(streams_.victim.below(n));
  const bool champion_killed = victim == champion_;
  if (champion_ == n - 1) champion_ = victim;  // last slot moves into the hole
  types_[victim] = types_.back();
  types_.pop_back();
  if (champion_killed) {
    champion_ = static_cast<std::size_t>(
        std::max_element(types_.begin(), types_.end(), ByFitness{}) - types_.begin());
  }
}

void RandomKillingSimulator::run_until(double t) {
  while (next_event_time() <= t) step();
  time_ = std::max(time_, t);
}

}  // namespace virevo
