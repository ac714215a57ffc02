#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "virevo/engine.hpp"

namespace virevo {

/// Settings shared by the verification pipelines. Unset fields take the
/// per-target defaults listed in target_defaults().
struct VerifyConfig {
  ModelParams params;
  std::optional<double> t;               // observation time or horizon
  std::optional<std::size_t> replicas;   // replicas or target sample count
  std::uint64_t seed = 1;
  unsigned workers = 1;
  double grid_dt = 0.1;
  std::optional<double> horizon;         // renewal grid horizon
};

struct Verdict {
  std::string target;
  bool pass = false;
  nlohmann::json report;
};

/// Names accepted by run_verify.
const std::vector<std::string>& verify_targets();

/// Applies target defaults and checks the parameter range of the target;
/// throws UsageError with an explanation on a mismatch.
VerifyConfig resolve_verify_config(std::string_view target, VerifyConfig config);

Verdict run_verify(std::string_view target, const VerifyConfig& config);

// Individual pipelines; each expects a resolved config.

/// a_t/t against uniform(0,1), r = 0, λ <= 1. Passes when D <= 0.03.
Verdict verify_thm1a(const VerifyConfig& c);
/// a_t against exponential(λ−1), r = 0, λ > 1. Passes when D <= 0.03.
Verdict verify_thm2b(const VerifyConfig& c);
/// Regeneration laws: φ at R_n uniform, age at R_n exponential(2λ+2),
/// both D <= 0.02, and the ε frequency within 3 standard errors of p.
Verdict verify_regen(const VerifyConfig& c);
/// Renewal limits against direct simulation at time t for the fitness
/// law at v ∈ {0.25, 0.5, 0.75} and the age law at x ∈ {0.2, 0.5, 1}.
Verdict verify_thm3(const VerifyConfig& c);
/// P(φ_t <= 0.9) strictly decreasing along t ∈ {5, 10, 20, 40}.
Verdict verify_thm4(const VerifyConfig& c);
/// r = 1: per-k KS of φ_t given X_t = k against u^k.
Verdict verify_r1law(const VerifyConfig& c);
/// Time-sampled X against the log-series law (burn-in 50, spacing 5).
Verdict verify_stationary(const VerifyConfig& c);
/// Coupled F^1 ⪯ F^r after every event, cdf dominance, lemma checks.
Verdict verify_coupling(const VerifyConfig& c);
/// Branching-process survival at t ∈ {1, 2, 4} against the closed form.
Verdict verify_survival(const VerifyConfig& c);
/// Growth diagnostics on the r = 0 count process for λ > 1.
Verdict verify_growth(const VerifyConfig& c);

/// P(φ_t <= u) along a time grid. For r = 1 this is E[u^{X_t}] since the
/// living fitnesses are then iid uniforms given X_t; the count is advanced
/// exactly up to 256 and by exact branching leaps beyond (λ > 1).
/// Otherwise the full simulator is used.
struct MaxLawTrend {
  std::vector<double> times;
  std::vector<double> p;
  std::vector<double> standard_error;
  std::string estimator;
};

MaxLawTrend max_law_trend(const ModelParams& params, double u, const std::vector<double>& times,
                          std::size_t replicas, std::uint64_t seed, unsigned workers);

/// Rejection rates of the KS and chi-square tests on data drawn from the
/// null law itself.
struct NullCalibration {
  std::size_t resamples = 0;
  double ks_rejection = 0.0;
  double chi2_rejection = 0.0;
};

NullCalibration null_calibration(std::size_t resamples, std::size_t sample_size,
                                 std::uint64_t seed);

}  // namespace virevo
