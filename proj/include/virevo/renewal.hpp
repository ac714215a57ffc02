#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "virevo/engine.hpp"

namespace virevo {

/// Values of a function at t = 0, dt, 2dt, ...
struct GridFunction {
  double dt = 0.1;
  std::vector<double> values;

  std::size_t size() const noexcept { return values.size(); }
  double horizon() const noexcept {
    return values.empty() ? 0.0 : dt * static_cast<double>(values.size() - 1);
  }
  double time(std::size_t k) const noexcept { return dt * static_cast<double>(k); }

  /// Grid with points 0..horizon; horizon is rounded to a whole number of steps.
  static GridFunction zeros(double dt, double horizon);
  template <class Fn>
  static GridFunction sample(double dt, double horizon, Fn&& fn) {
    GridFunction g = zeros(dt, horizon);
    for (std::size_t k = 0; k < g.size(); ++k) g.values[k] = fn(g.time(k));
    return g;
  }
};

/// H = h + F∗H with F the law of the cycle length R_1 and μ = E R_1.
struct RenewalProblem {
  GridFunction F;
  GridFunction h;
  double mu = 1.0;

  /// Throws UsageError unless F is a cdf with F(0) = 0, h lies in
  /// [0,1], both share one grid and μ > 0.
  void validate() const;
};

class RenewalDivergence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SolveOptions {
  double max_value = 1e9;
};

/// Forward recursion
///   H(t_k) = h(t_k) + Σ_{j=1..k} H(t_{k−j})·(F(t_j) − F(t_{j−1})).
/// Throws RenewalDivergence when |H| exceeds options.max_value.
GridFunction solve_renewal(const RenewalProblem& problem, const SolveOptions& options = {});

struct LimitValue {
  double value = 0.0;
  double tail = 0.0;              // h at the horizon
  bool truncation_warning = false;  // tail above kLimitTailTolerance
};

inline constexpr double kLimitTailTolerance = 1e-3;

/// (1/μ)·∫₀^horizon h by the trapezoid rule.
LimitValue limit_value(const GridFunction& h, double mu);

double trapezoid(const GridFunction& g);

enum class RenewalMode { Fitness, Age };

const char* to_string(RenewalMode mode) noexcept;

/// Start of the cycle: φ_0 uniform and, in age mode, a_0 ~ Exp(2(λ+1)).
/// The fitness law does not depend on the initial age, so fitness mode
/// starts at age 0.
InitialCondition renewal_start(const ModelParams& params, RenewalMode mode, std::uint64_t seed,
                               std::uint64_t replica);

/// One cycle observed on the grid up to min(R_1, horizon).
struct CycleSample {
  std::optional<double> r1;     // nullopt when censored at the horizon
  std::vector<double> observed;  // φ or a at grid points t_k < R_1
};

CycleSample sample_cycle(const ModelParams& params, RenewalMode mode, double dt, double horizon,
                         std::uint64_t seed, std::uint64_t replica);

/// Monte Carlo cycles shared by every threshold.
class CycleEnsemble {
 public:
  CycleEnsemble(const ModelParams& params, RenewalMode mode, double dt, double horizon,
                std::size_t n_replicas, std::uint64_t seed, unsigned workers = 1);

  RenewalMode mode() const noexcept { return mode_; }
  double dt() const noexcept { return dt_; }
  double horizon() const noexcept { return dt_ * static_cast<double>(points_ - 1); }
  std::size_t replicas() const noexcept { return cycles_.size(); }
  std::size_t censored() const noexcept { return censored_; }
  double censored_fraction() const noexcept {
    return static_cast<double>(censored_) / static_cast<double>(cycles_.size());
  }
  const std::vector<CycleSample>& cycles() const noexcept { return cycles_; }

  /// Empirical F(t_k) = P(R_1 <= t_k); censored cycles count as beyond
  /// the horizon.
  GridFunction F() const;
  /// Mean of the uncensored R_1 values.
  double mu_hat() const;
  /// ĥ(t_k) = P(observable <= threshold, R_1 > t_k).
  GridFunction h(double threshold) const;

  /// Ratio estimate of (1/μ)∫h with its delta-method standard error,
  /// using per-cycle ∫ 1{observable <= threshold, R_1 > s} ds and R_1
  /// (censored cycles contribute the horizon).
  struct Limit {
    double value = 0.0;
    double standard_error = 0.0;
  };
  Limit limit(double threshold) const;

 private:
  RenewalMode mode_;
  double dt_;
  std::size_t points_;
  std::size_t censored_ = 0;
  std::vector<CycleSample> cycles_;
};

/// Grid estimate of h for one threshold.
GridFunction estimate_h(const ModelParams& params, double threshold, RenewalMode mode, double dt,
                        double horizon, std::size_t n_replicas, std::uint64_t seed,
                        unsigned workers = 1);

}  // namespace virevo
