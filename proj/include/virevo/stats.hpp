#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "virevo/error.hpp"
#include "virevo/rng.hpp"

namespace virevo {

/// Sorted sample set.
class EmpiricalDistribution {
 public:
  explicit EmpiricalDistribution(std::vector<double> samples);

  std::size_t size() const noexcept { return samples_.size(); }
  const std::vector<double>& samples() const noexcept { return samples_; }

  /// Fraction of samples <= x.
  double cdf(double x) const;
  double quantile(double p) const;
  double mean() const;
  double variance() const;  // unbiased
  double standard_error() const;

 private:
  std::vector<double> samples_;
};

/// A continuous (or, for the log-series, discrete) reference law
/// addressable by name.
struct ReferenceLaw {
  std::string name;
  std::function<double(double)> cdf;
};

ReferenceLaw uniform_law();
ReferenceLaw exponential_law(double rate);
/// cdf u ↦ u^k on (0,1): the maximum of k independent uniforms.
ReferenceLaw power_law(unsigned k);
ReferenceLaw logseries_law(double lambda);

/// Parses "uniform", "exponential:<rate>", "power:<k>", "logseries:<lambda>".
ReferenceLaw parse_reference_law(std::string_view spec);

struct GoFReport {
  std::string test;  // "ks" or "chi2"
  std::string family;
  double statistic = 0.0;
  double threshold = 0.0;
  std::size_t n = 0;
  std::size_t dof = 0;  // chi-square only
  bool pass = false;
};

void to_json(nlohmann::json& j, const GoFReport& r);

/// Asymptotic 5% critical value of sqrt(n)·D_n.
inline constexpr double kKsCritical5 = 1.358;
inline constexpr std::size_t kKsMinSamples = 50;

/// sup |F̂_n - F| over sorted samples.
double ks_distance(std::span<const double> sorted, const std::function<double(double)>& cdf);

/// Two-sided one-sample KS test. Default threshold 1.358/sqrt(n).
GoFReport ks_statistic(const EmpiricalDistribution& samples, const ReferenceLaw& law,
                       std::optional<double> threshold = std::nullopt);

/// Two-sample KS distance sup |F̂ - Ĝ|.
double ks_two_sample(const EmpiricalDistribution& a, const EmpiricalDistribution& b);

/// λⁿ / (n·(−ln(1−λ))), 0 < λ < 1, n >= 1.
double logseries_pmf(double lambda, std::uint64_t n);
double logseries_mean(double lambda);
std::uint64_t sample_logseries(double lambda, Stream& rng);

/// P(X(t) ≠ 0 | X(0) = 1) for the linear branching process with birth
/// rate λ < 1 and death rate 1:
///   e^{−(1−λ)t} (1−λ) / (1 − λ e^{−(1−λ)t}).
double linear_bd_survival(double lambda, double t);

struct ChiSquareOptions {
  double level = 0.05;
  double min_expected = 5.0;
};

/// Pearson goodness of fit of counts over states first_state,
/// first_state+1, ... against a pmf. Bins are pooled from the low end
/// until each holds expected >= min_expected; everything beyond the last
/// closed bin, including states never observed, forms the tail bin.
GoFReport chi_square_gof(std::span<const std::uint64_t> counts, std::uint64_t first_state,
                         const std::function<double(std::uint64_t)>& pmf, std::string family,
                         const ChiSquareOptions& options = {});

double chi_square_quantile(double p, double dof);

/// Streaming record of a count trajectory for the supercritical growth
/// diagnostics.
struct CountEvent {
  double time = 0.0;
  std::uint64_t population_after = 0;
  bool birth = false;
};

struct GrowthDiagnostics {
  double lambda = 0.0;
  std::vector<double> hit_times;         // hit_times[n-1] = first time X reaches n
  std::vector<std::uint64_t> s_counts;   // S_n: types produced by HitTime_n
  std::vector<double> zeta;              // HitTime_n − ln(n)/(λ−1)
  std::vector<double> s_ratio;           // S_n / n
  std::vector<double> t_grid;
  std::vector<std::uint64_t> n_of_t;     // N(t)
  std::vector<double> scaled;            // N(t)·e^{−(λ−1)t}

  /// (max − min)/mean of `scaled` over grid times >= from·t_grid.back().
  double plateau_spread(double from = 0.5) const;
  /// |ζ(2n) − ζ(n)| for n = 1, 2, 4, ... while 2n is reached.
  std::vector<double> dyadic_zeta_differences() const;
};

class GrowthTracker {
 public:
  GrowthTracker();
  void on_event(const CountEvent& e);
  void on_event(double time, std::uint64_t population_after, bool birth) {
    on_event(CountEvent{time, population_after, birth});
  }
  GrowthDiagnostics finish(double lambda, std::span<const double> t_grid) const;

 private:
  std::vector<double> hit_times_;
  std::vector<std::uint64_t> s_counts_;
  std::uint64_t births_ = 1;
  double last_time_ = 0.0;
};

/// Diagnostics of one trajectory started from a single type at time 0.
GrowthDiagnostics growth_diagnostics(double lambda, std::span<const CountEvent> events,
                                     std::span<const double> t_grid);

}  // namespace virevo
