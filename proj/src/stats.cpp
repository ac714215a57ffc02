#include "virevo/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/chi_squared.hpp>

namespace virevo {

EmpiricalDistribution::EmpiricalDistribution(std::vector<double> samples)
    : samples_(std::move(samples)) {
  if (samples_.empty()) throw UsageError("empirical distribution needs at least one sample");
  std::sort(samples_.begin(), samples_.end());
}

double EmpiricalDistribution::cdf(double x) const {
  const auto it = std::upper_bound(samples_.begin(), samples_.end(), x);
  return static_cast<double>(it - samples_.begin()) / static_cast<double>(samples_.size());
}

double EmpiricalDistribution::quantile(double p) const {
  if (!(p >= 0.0 && p <= 1.0)) throw UsageError("quantile level must lie in [0, 1]");
  const double pos = p * static_cast<double>(samples_.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, samples_.size() - 1);
  const double w = pos - static_cast<double>(lo);
  return samples_[lo] * (1.0 - w) + samples_[hi] * w;
}

double EmpiricalDistribution::mean() const {
  return std::accumulate(samples_.begin(), samples_.end(), 0.0) /
         static_cast<double>(samples_.size());
}

double EmpiricalDistribution::variance() const {
  if (samples_.size() < 2) return 0.0;
  const double m = mean();
  double ss = 0.0;
  for (double x : samples_) ss += (x - m) * (x - m);
  return ss / static_cast<double>(samples_.size() - 1);
}

double EmpiricalDistribution::standard_error() const {
  return std::sqrt(variance() / static_cast<double>(samples_.size()));
}

ReferenceLaw uniform_law() {
  return {"uniform", [](double x) { return std::clamp(x, 0.0, 1.0); }};
}

ReferenceLaw exponential_law(double rate) {
  if (!(rate > 0.0)) throw UsageError("exponential rate must be positive");
  return {"exponential(rate=" + std::to_string(rate) + ")",
          [rate](double x) { return x <= 0.0 ? 0.0 : -std::expm1(-rate * x); }};
}

ReferenceLaw power_law(unsigned k) {
  if (k == 0) throw UsageError("power law exponent must be >= 1");
  return {"power(k=" + std::to_string(k) + ")", [k](double x) {
            if (x <= 0.0) return 0.0;
            if (x >= 1.0) return 1.0;
            return std::pow(x, static_cast<double>(k));
          }};
}

ReferenceLaw logseries_law(double lambda) {
  logseries_pmf(lambda, 1);  // validates
  return {"logseries(lambda=" + std::to_string(lambda) + ")", [lambda](double x) {
            if (x < 1.0) return 0.0;
            const auto top = static_cast<std::uint64_t>(std::floor(x));
            double c = 0.0;
            for (std::uint64_t n = 1; n <= top; ++n) {
              const double p = logseries_pmf(lambda, n);
              c += p;
              if (p < 1e-17) break;
            }
            return std::min(c, 1.0);
          }};
}

ReferenceLaw parse_reference_law(std::string_view spec) {
  const auto colon = spec.find(':');
  const std::string_view family = spec.substr(0, colon);
  const std::string arg = colon == std::string_view::npos ? "" : std::string(spec.substr(colon + 1));
  auto number = [&]() {
    if (arg.empty()) throw UsageError("reference law '" + std::string(spec) + "' needs a parameter");
    try {
      std::size_t used = 0;
      const double v = std::stod(arg, &used);
      if (used != arg.size()) throw UsageError("bad number");
      return v;
    } catch (const std::exception&) {
      throw UsageError("bad parameter in reference law '" + std::string(spec) + "'");
    }
  };
  if (family == "uniform") return uniform_law();
  if (family == "exponential") return exponential_law(number());
  if (family == "power") {
    const double k = number();
    if (k < 1.0 || k != std::floor(k)) throw UsageError("power law needs an integer k >= 1");
    return power_law(static_cast<unsigned>(k));
  }
  if (family == "logseries") return logseries_law(number());
  throw UsageError("unknown reference law '" + std::string(spec) + "'");
}

void to_json(nlohmann::json& j, const GoFReport& r) {
  j = nlohmann::json{{"test", r.test},           {"family", r.family}, {"statistic", r.statistic},
                     {"threshold", r.threshold}, {"n", r.n},           {"pass", r.pass}};
  if (r.test == "chi2") j["dof"] = r.dof;
}

double ks_distance(std::span<const double> sorted, const std::function<double(double)>& cdf) {
  const auto n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = cdf(sorted[i]);
    const double above = static_cast<double>(i + 1) / n - f;
    const double below = f - static_cast<double>(i) / n;
    d = std::max({d, above, below});
  }
  return d;
}

GoFReport ks_statistic(const EmpiricalDistribution& samples, const ReferenceLaw& law,
                       std::optional<double> threshold) {
  const std::size_t n = samples.size();
  if (n < kKsMinSamples) {
    throw UsageError("KS test needs at least " + std::to_string(kKsMinSamples) + " samples, got " +
                     std::to_string(n));
  }
  GoFReport report;
  report.test = "ks";
  report.family = law.name;
  report.n = n;
  report.statistic = ks_distance(samples.samples(), law.cdf);
  report.threshold = threshold ? *threshold : kKsCritical5 / std::sqrt(static_cast<double>(n));
  report.pass = report.statistic <= report.threshold;
  return report;
}

double ks_two_sample(const EmpiricalDistribution& a, const EmpiricalDistribution& b) {
  const auto& x = a.samples();
  const auto& y = b.samples();
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] <= v) ++i;
    while (j < y.size() && y[j] <= v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / static_cast<double>(x.size()) -
                             static_cast<double>(j) / static_cast<double>(y.size())));
  }
  return d;
}

double logseries_pmf(double lambda, std::uint64_t n) {
  if (!(lambda > 0.0 && lambda < 1.0)) {
    throw UsageError("the log-series law needs 0 < lambda < 1");
  }
  if (n == 0) throw UsageError("the log-series law lives on n >= 1");
  const double dn = static_cast<double>(n);
  return std::exp(dn * std::log(lambda) - std::log(dn) - std::log(-std::log1p(-lambda)));
}

double logseries_mean(double lambda) {
  logseries_pmf(lambda, 1);
  return lambda / ((1.0 - lambda) * -std::log1p(-lambda));
}

std::uint64_t sample_logseries(double lambda, Stream& rng) {
  const double u = rng.uniform_open();
  double c = 0.0;
  std::uint64_t n = 1;
  for (;; ++n) {
    const double p = logseries_pmf(lambda, n);
    c += p;
    if (u <= c || p < 1e-300) return n;
  }
}

double linear_bd_survival(double lambda, double t) {
  if (!(lambda > 0.0 && lambda < 1.0)) {
    throw UsageError("linear_bd_survival needs 0 < lambda < 1");
  }
  if (!(t >= 0.0)) throw UsageError("linear_bd_survival needs t >= 0");
  const double decay = std::exp(-(1.0 - lambda) * t);
  return decay * (1.0 - lambda) / (1.0 - lambda * decay);
}

double chi_square_quantile(double p, double dof) {
  boost::math::chi_squared_distribution<double> dist(dof);
  return boost::math::quantile(dist, p);
}

GoFReport chi_square_gof(std::span<const std::uint64_t> counts, std::uint64_t first_state,
                         const std::function<double(std::uint64_t)>& pmf, std::string family,
                         const ChiSquareOptions& options) {
  const double total =
      static_cast<double>(std::accumulate(counts.begin(), counts.end(), std::uint64_t{0}));
  if (total <= 0.0) throw UsageError("chi-square test needs at least one observation");

  auto observed = [&](std::uint64_t state) -> double {
    const std::uint64_t i = state - first_state;
    return i < counts.size() ? static_cast<double>(counts[i]) : 0.0;
  };

  double statistic = 0.0;
  std::size_t bins = 0;
  double closed_obs = 0.0;
  double closed_exp = 0.0;
  double acc_obs = 0.0;
  double acc_exp = 0.0;
  double cum_p = 0.0;
  const std::uint64_t last_state = first_state + 10'000'000;
  for (std::uint64_t s = first_state; s < last_state; ++s) {
    const double p = pmf(s);
    cum_p += p;
    acc_obs += observed(s);
    acc_exp += total * p;
    if (acc_exp < options.min_expected) continue;
    if (total * (1.0 - cum_p) < options.min_expected) break;
    statistic += (acc_obs - acc_exp) * (acc_obs - acc_exp) / acc_exp;
    closed_obs += acc_obs;
    closed_exp += acc_exp;
    acc_obs = acc_exp = 0.0;
    ++bins;
  }
  const double tail_obs = total - closed_obs;
  const double tail_exp = total - closed_exp;
  if (tail_exp >= options.min_expected || bins == 0) {
    statistic += (tail_obs - tail_exp) * (tail_obs - tail_exp) / tail_exp;
    ++bins;
  }
  if (bins < 2) throw UsageError("degenerate binning: fewer than two bins with enough mass");

  GoFReport report;
  report.test = "chi2";
  report.family = std::move(family);
  report.n = static_cast<std::size_t>(total);
  report.dof = bins - 1;
  report.statistic = statistic;
  report.threshold = chi_square_quantile(1.0 - options.level, static_cast<double>(report.dof));
  report.pass = report.statistic <= report.threshold;
  return report;
}

double GrowthDiagnostics::plateau_spread(double from) const {
  if (t_grid.empty()) return 0.0;
  const double start = from * t_grid.back();
  double lo = INFINITY, hi = -INFINITY, sum = 0.0;
  std::size_t m = 0;
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    if (t_grid[i] < start) continue;
    lo = std::min(lo, scaled[i]);
    hi = std::max(hi, scaled[i]);
    sum += scaled[i];
    ++m;
  }
  if (m == 0) return 0.0;
  return (hi - lo) / (sum / static_cast<double>(m));
}

std::vector<double> GrowthDiagnostics::dyadic_zeta_differences() const {
  std::vector<double> out;
  for (std::size_t n = 1; 2 * n <= zeta.size(); n *= 2) {
    out.push_back(std::abs(zeta[2 * n - 1] - zeta[n - 1]));
  }
  return out;
}

GrowthTracker::GrowthTracker() : hit_times_{0.0}, s_counts_{1} {}

void GrowthTracker::on_event(const CountEvent& e) {
  if (e.birth) ++births_;
  last_time_ = e.time;
  if (e.population_after > hit_times_.size()) {
    hit_times_.push_back(e.time);
    s_counts_.push_back(births_);
  }
}

GrowthDiagnostics GrowthTracker::finish(double lambda, std::span<const double> t_grid) const {
  if (!(lambda > 1.0)) throw UsageError("growth diagnostics need lambda > 1");
  GrowthDiagnostics g;
  g.lambda = lambda;
  g.hit_times = hit_times_;
  g.s_counts = s_counts_;
  const double growth = lambda - 1.0;
  for (std::size_t i = 0; i < hit_times_.size(); ++i) {
    const double n = static_cast<double>(i + 1);
    g.zeta.push_back(hit_times_[i] - std::log(n) / growth);
    g.s_ratio.push_back(static_cast<double>(s_counts_[i]) / n);
  }
  g.t_grid.assign(t_grid.begin(), t_grid.end());
  for (double t : t_grid) {
    const auto reached = static_cast<std::uint64_t>(
        std::upper_bound(hit_times_.begin(), hit_times_.end(), t) - hit_times_.begin());
    g.n_of_t.push_back(reached);
    g.scaled.push_back(static_cast<double>(reached) * std::exp(-growth * t));
  }
  return g;
}

GrowthDiagnostics growth_diagnostics(double lambda, std::span<const CountEvent> events,
                                     std::span<const double> t_grid) {
  GrowthTracker tracker;
  for (const auto& e : events) tracker.on_event(e);
  return tracker.finish(lambda, t_grid);
}

}  // namespace virevo
