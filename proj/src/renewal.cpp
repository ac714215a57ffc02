#include "virevo/renewal.hpp"

#include <cmath>
#include <string>

#include "virevo/parallel.hpp"
#include "virevo/regen.hpp"

namespace virevo {

GridFunction GridFunction::zeros(double dt, double horizon) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw UsageError("grid step must be positive");
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw UsageError("grid horizon must be positive");
  const auto steps = static_cast<std::size_t>(std::llround(horizon / dt));
  if (steps == 0) throw UsageError("grid horizon is shorter than one step");
  return GridFunction{dt, std::vector<double>(steps + 1, 0.0)};
}

void RenewalProblem::validate() const {
  if (!(mu > 0.0) || !std::isfinite(mu)) throw UsageError("mu must be positive");
  if (F.size() != h.size() || F.dt != h.dt || F.size() == 0) {
    throw UsageError("F and h must share one non-empty grid");
  }
  if (F.values[0] != 0.0) throw UsageError("F(0) must be 0; mass at 0 makes the recursion diverge");
  for (std::size_t k = 0; k < F.size(); ++k) {
    const double f = F.values[k];
    if (!(f >= 0.0 && f <= 1.0)) throw UsageError("F must lie in [0,1]");
    if (k > 0 && f < F.values[k - 1]) throw UsageError("F must be nondecreasing");
    const double v = h.values[k];
    if (!(v >= 0.0 && v <= 1.0)) throw UsageError("h must lie in [0,1]");
  }
}

GridFunction solve_renewal(const RenewalProblem& problem, const SolveOptions& options) {
  problem.validate();
  const std::size_t n = problem.h.size();
  std::vector<double> dF(n, 0.0);
  for (std::size_t j = 1; j < n; ++j) dF[j] = problem.F.values[j] - problem.F.values[j - 1];

  GridFunction H{problem.h.dt, std::vector<double>(n, 0.0)};
  for (std::size_t k = 0; k < n; ++k) {
    double acc = problem.h.values[k];
    for (std::size_t j = 1; j <= k; ++j) acc += H.values[k - j] * dF[j];
    if (!(std::abs(acc) <= options.max_value)) {
      throw RenewalDivergence("renewal solution exceeds " + std::to_string(options.max_value) +
                              " at t = " + std::to_string(H.time(k)));
    }
    H.values[k] = acc;
  }
  return H;
}

double trapezoid(const GridFunction& g) {
  if (g.size() < 2) return 0.0;
  double sum = 0.0;
  for (double v : g.values) sum += v;
  sum -= 0.5 * (g.values.front() + g.values.back());
  return sum * g.dt;
}

LimitValue limit_value(const GridFunction& h, double mu) {
  if (!(mu > 0.0) || !std::isfinite(mu)) throw UsageError("mu must be positive");
  if (h.size() == 0) throw UsageError("empty grid function");
  LimitValue out;
  out.value = trapezoid(h) / mu;
  out.tail = h.values.back();
  out.truncation_warning = std::abs(out.tail) > kLimitTailTolerance;
  return out;
}

const char* to_string(RenewalMode mode) noexcept {
  return mode == RenewalMode::Fitness ? "fitness" : "age";
}

InitialCondition renewal_start(const ModelParams& params, RenewalMode mode, std::uint64_t seed,
                               std::uint64_t replica) {
  InitialCondition init;
  if (mode == RenewalMode::Age) {
    Stream s(seed, "initial-age", replica);
    init.age = s.exponential(2.0 * (params.lambda + 1.0));
  }
  return init;
}

CycleSample sample_cycle(const ModelParams& params, RenewalMode mode, double dt, double horizon,
                         std::uint64_t seed, std::uint64_t replica) {
  const auto grid = GridFunction::zeros(dt, horizon);
  Simulator sim(params, seed, replica, renewal_start(params, mode, seed, replica));
  ExcursionDetector detector(sim.initial_type());
  CycleSample out;
  out.observed.reserve(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double t = grid.time(k);
    while (sim.next_event_time() <= t) {
      const auto done = detector.on_event(sim.step());
      if (done && detector.excursions()[*done].epsilon) {
        out.r1 = *detector.excursions()[*done].return_time;
        return out;
      }
    }
    const auto& champ = sim.state().fittest();
    out.observed.push_back(mode == RenewalMode::Fitness ? champ.fitness : t - champ.birth_time);
  }
  // Censored: the regeneration may still happen between the last grid
  // point and the next one, which does not matter for the grid values.
  return out;
}

CycleEnsemble::CycleEnsemble(const ModelParams& params, RenewalMode mode, double dt,
                             double horizon, std::size_t n_replicas, std::uint64_t seed,
                             unsigned workers)
    : mode_(mode), dt_(dt), points_(GridFunction::zeros(dt, horizon).size()) {
  params.validate();
  if (!(params.lambda < 1.0)) throw UsageError("renewal estimates need lambda < 1");
  if (!(params.r > 0.0)) throw UsageError("renewal estimates need r > 0");
  if (n_replicas == 0) throw UsageError("need at least one replica");
  cycles_ = run_replicas(n_replicas, workers, [&](std::size_t i) {
    return sample_cycle(params, mode, dt, horizon, seed, i);
  });
  for (const auto& c : cycles_) censored_ += c.r1 ? 0 : 1;
}

GridFunction CycleEnsemble::F() const {
  GridFunction g{dt_, std::vector<double>(points_, 0.0)};
  std::vector<double> counts(points_ + 1, 0.0);
  for (const auto& c : cycles_) {
    if (!c.r1) continue;
    // First grid index with t_k >= R_1.
    counts[c.observed.size()] += 1.0;
  }
  double acc = 0.0;
  const double n = static_cast<double>(cycles_.size());
  for (std::size_t k = 0; k < points_; ++k) {
    acc += counts[k];
    g.values[k] = acc / n;
  }
  return g;
}

double CycleEnsemble::mu_hat() const {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& c : cycles_) {
    if (!c.r1) continue;
    sum += *c.r1;
    ++n;
  }
  return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

GridFunction CycleEnsemble::h(double threshold) const {
  GridFunction g{dt_, std::vector<double>(points_, 0.0)};
  for (const auto& c : cycles_) {
    for (std::size_t k = 0; k < c.observed.size(); ++k) {
      if (c.observed[k] <= threshold) g.values[k] += 1.0;
    }
  }
  for (double& v : g.values) v /= static_cast<double>(cycles_.size());
  return g;
}

CycleEnsemble::Limit CycleEnsemble::limit(double threshold) const {
  const std::size_t n = cycles_.size();
  std::vector<double> y(n), len(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& c = cycles_[i];
    const std::size_t m = c.observed.size();
    double sum = 0.0;
    for (std::size_t k = 0; k < m; ++k) sum += c.observed[k] <= threshold ? 1.0 : 0.0;
    // Trapezoid over the full grid with zeros after R_1.
    if (m > 0 && c.observed[0] <= threshold) sum -= 0.5;
    if (m == points_ && c.observed[m - 1] <= threshold) sum -= 0.5;
    y[i] = sum * dt_;
    len[i] = c.r1 ? *c.r1 : horizon();
  }
  double ybar = 0.0, rbar = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ybar += y[i];
    rbar += len[i];
  }
  ybar /= static_cast<double>(n);
  rbar /= static_cast<double>(n);
  Limit out;
  out.value = ybar / rbar;
  if (n > 1) {
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = y[i] - out.value * len[i];
      ss += d * d;
    }
    out.standard_error =
        std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n)) / rbar;
  }
  return out;
}

GridFunction estimate_h(const ModelParams& params, double threshold, RenewalMode mode, double dt,
                        double horizon, std::size_t n_replicas, std::uint64_t seed,
                        unsigned workers) {
  return CycleEnsemble(params, mode, dt, horizon, n_replicas, seed, workers).h(threshold);
}

}  // namespace virevo
