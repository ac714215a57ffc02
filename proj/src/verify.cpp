#include "virevo/verify.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "virevo/count_process.hpp"
#include "virevo/coupling.hpp"
#include "virevo/parallel.hpp"
#include "virevo/regen.hpp"
#include "virevo/renewal.hpp"
#include "virevo/stats.hpp"

namespace virevo {

namespace {

using nlohmann::json;

constexpr double kRelaxedKs = 0.03;      // a_t laws, finite-t bias allowance
constexpr double kRegenKs = 0.02;
constexpr double kDominanceSlack = 0.02;
constexpr double kPlateauBand = 0.5;
constexpr double kPlateauShare = 0.9;
constexpr std::uint64_t kLeapThreshold = 256;

json config_json(std::string_view target, const VerifyConfig& c) {
  json j = {{"target", target},
            {"lambda", c.params.lambda},
            {"r", c.params.r},
            {"seed", c.seed},
            {"workers", c.workers}};
  if (c.t) j["t"] = *c.t;
  if (c.replicas) j["replicas"] = *c.replicas;
  j["grid_dt"] = c.grid_dt;
  if (c.horizon) j["horizon"] = *c.horizon;
  return j;
}

Verdict make_verdict(std::string_view target, const VerifyConfig& c, json checks, bool pass) {
  Verdict v;
  v.target = std::string(target);
  v.pass = pass;
  v.report = {{"config", config_json(target, c)}, {"pass", pass}, {"checks", std::move(checks)}};
  return v;
}

double lag1_correlation(const std::vector<std::pair<double, double>>& pairs) {
  if (pairs.size() < 3) return 0.0;
  double mx = 0.0, my = 0.0;
  for (const auto& [x, y] : pairs) {
    mx += x;
    my += y;
  }
  mx /= static_cast<double>(pairs.size());
  my /= static_cast<double>(pairs.size());
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (const auto& [x, y] : pairs) {
    sxy += (x - mx) * (y - my);
    sxx += (x - mx) * (x - mx);
    syy += (y - my) * (y - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

double median_of(std::vector<double> x) {
  if (x.empty()) return 0.0;
  const auto mid = x.begin() + static_cast<std::ptrdiff_t>(x.size() / 2);
  std::nth_element(x.begin(), mid, x.end());
  if (x.size() % 2 == 1) return *mid;
  const double hi = *mid;
  const double lo = *std::max_element(x.begin(), mid);
  return 0.5 * (lo + hi);
}

}  // namespace

const std::vector<std::string>& verify_targets() {
  static const std::vector<std::string> names = {"thm1a",    "thm2b",      "thm3",
                                                 "thm4",     "regen",      "stationary",
                                                 "coupling", "r1law",      "survival",
                                                 "growth"};
  return names;
}

VerifyConfig resolve_verify_config(std::string_view target, VerifyConfig c) {
  c.params.validate();
  if (c.workers == 0) throw UsageError("workers must be at least 1");
  if (c.replicas && *c.replicas == 0) throw UsageError("replicas must be at least 1");
  if (c.t && !(*c.t > 0.0)) throw UsageError("t must be positive");
  const double lambda = c.params.lambda;
  const double r = c.params.r;
  auto need = [&](bool ok, const char* why) {
    if (!ok) throw UsageError(std::string("verify ") + std::string(target) + " " + why);
  };
  auto defaults = [&](double t, std::size_t n) {
    if (!c.t) c.t = t;
    if (!c.replicas) c.replicas = n;
  };
  if (target == "thm1a") {
    need(r == 0.0 && lambda <= 1.0, "needs r = 0 and lambda <= 1");
    defaults(200.0, 10'000);
  } else if (target == "thm2b") {
    need(r == 0.0 && lambda > 1.0, "needs r = 0 and lambda > 1");
    defaults(10.0, 10'000);
  } else if (target == "thm3") {
    need(r > 0.0 && lambda < 1.0, "needs r > 0 and lambda < 1");
    defaults(200.0, 10'000);
  } else if (target == "regen") {
    need(r > 0.0 && lambda < 1.0, "needs r > 0 and lambda < 1");
    defaults(default_t_censor(c.params), 10'000);
  } else if (target == "thm4") {
    need(lambda >= 1.0 && r > 0.0, "needs lambda >= 1 and r > 0");
    defaults(40.0, 100'000);
  } else if (target == "r1law") {
    need(lambda >= 1.0 && r == 1.0, "needs lambda >= 1 and r = 1");
    defaults(15.0, 100'000);
  } else if (target == "stationary") {
    need(lambda < 1.0, "needs lambda < 1");
    defaults(50.0, 10'000);
  } else if (target == "coupling") {
    need(r > 0.0 && r < 1.0, "needs 0 < r < 1");
    defaults(8.0, 1'000);
  } else if (target == "survival") {
    need(lambda < 1.0, "needs lambda < 1");
    defaults(4.0, 10'000);
  } else if (target == "growth") {
    need(lambda > 1.0 && r == 0.0, "needs lambda > 1 and r = 0");
    defaults(14.0, 100);
  } else {
    throw UsageError("unknown verify target '" + std::string(target) + "'");
  }
  return c;
}

Verdict run_verify(std::string_view target, const VerifyConfig& config) {
  const VerifyConfig c = resolve_verify_config(target, config);
  if (target == "thm1a") return verify_thm1a(c);
  if (target == "thm2b") return verify_thm2b(c);
  if (target == "thm3") return verify_thm3(c);
  if (target == "thm4") return verify_thm4(c);
  if (target == "regen") return verify_regen(c);
  if (target == "stationary") return verify_stationary(c);
  if (target == "coupling") return verify_coupling(c);
  if (target == "r1law") return verify_r1law(c);
  if (target == "survival") return verify_survival(c);
  return verify_growth(c);
}

Verdict verify_thm1a(const VerifyConfig& c) {
  const double t = *c.t;
  const auto scaled = run_replicas(*c.replicas, c.workers, [&](std::size_t i) {
    ChampionSimulator sim(c.params.lambda, c.seed, i);
    sim.run_until(t);
    return sim.age() / t;
  });
  const auto ks = ks_statistic(EmpiricalDistribution(scaled), uniform_law(), kRelaxedKs);
  return make_verdict("thm1a", c, {{"age_over_t_vs_uniform", ks}}, ks.pass);
}

Verdict verify_thm2b(const VerifyConfig& c) {
  const double t = *c.t;
  const auto ages = run_replicas(*c.replicas, c.workers, [&](std::size_t i) {
    ChampionSimulator sim(c.params.lambda, c.seed, i);
    sim.run_until(t);
    return sim.age();
  });
  const auto ks = ks_statistic(EmpiricalDistribution(ages),
                               exponential_law(c.params.lambda - 1.0), kRelaxedKs);
  return make_verdict("thm2b", c, {{"age_vs_exponential", ks}}, ks.pass);
}

namespace {

struct RegenHarvest {
  std::vector<double> xi, eta, phi, age;
  std::uint64_t excursions = 0;
  std::uint64_t epsilon_ones = 0;
  std::uint64_t violations = 0;
  std::vector<std::pair<double, double>> gap_pairs;
  bool censored = false;
};

RegenHarvest harvest_regenerations(const ModelParams& params, std::size_t wanted, double t_limit,
                                   std::uint64_t seed, std::uint64_t replica) {
  RegenHarvest out;
  Simulator sim(params, seed, replica);
  ExcursionDetector detector(sim.initial_type());
  double last_regen = 0.0;
  double last_gap = -1.0;
  std::size_t found = 0;
  while (found < wanted) {
    if (sim.next_event_time() > t_limit) {
      out.censored = true;
      break;
    }
    const auto done = detector.on_event(sim.step());
    if (!done) continue;
    const auto& ex = detector.excursions()[*done];
    ++out.excursions;
    out.xi.push_back(ex.xi);
    out.eta.push_back(ex.eta);
    if (!ex.epsilon) continue;
    ++out.epsilon_ones;
    ++found;
    const double rn = *ex.return_time;
    if (detector.population() != 1 || !(rn > last_regen) ||
        sim.state().fittest().id != ex.newcomer_id) {
      ++out.violations;
    }
    out.phi.push_back(ex.newcomer_fitness);
    out.age.push_back(ex.eta);
    // The first cycle starts from age 0 rather than a regeneration, so
    // correlations use gaps between regenerations only.
    if (found >= 2) {
      const double gap = rn - last_regen;
      if (last_gap >= 0.0) out.gap_pairs.emplace_back(last_gap, gap);
      last_gap = gap;
    }
    last_regen = rn;
  }
  return out;
}

}  // namespace

Verdict verify_regen(const VerifyConfig& c) {
  const std::size_t wanted = *c.replicas;
  const std::size_t trajectories = std::min<std::size_t>(100, wanted);
  const std::size_t per = (wanted + trajectories - 1) / trajectories;
  // Each trajectory may run for `per` expected cycle lengths many times over.
  const double t_limit = *c.t * static_cast<double>(per);
  const auto parts = run_replicas(trajectories, c.workers, [&](std::size_t i) {
    return harvest_regenerations(c.params, per, t_limit, c.seed, i);
  });

  RegenHarvest all;
  std::size_t censored = 0;
  for (const auto& p : parts) {
    all.xi.insert(all.xi.end(), p.xi.begin(), p.xi.end());
    all.eta.insert(all.eta.end(), p.eta.begin(), p.eta.end());
    all.phi.insert(all.phi.end(), p.phi.begin(), p.phi.end());
    all.age.insert(all.age.end(), p.age.begin(), p.age.end());
    all.gap_pairs.insert(all.gap_pairs.end(), p.gap_pairs.begin(), p.gap_pairs.end());
    all.excursions += p.excursions;
    all.epsilon_ones += p.epsilon_ones;
    all.violations += p.violations;
    censored += p.censored ? 1 : 0;
  }

  const double lambda = c.params.lambda;
  const double p = bernoulli_p(c.params);
  const double n_exc = static_cast<double>(all.excursions);
  const double eps_mean = static_cast<double>(all.epsilon_ones) / n_exc;
  const double eps_band = 3.0 * std::sqrt(p * (1.0 - p) / n_exc);
  const bool eps_ok = std::abs(eps_mean - p) <= eps_band;

  const bool enough = all.phi.size() >= kKsMinSamples;
  GoFReport phi_ks, age_ks;
  if (enough) {
    phi_ks = ks_statistic(EmpiricalDistribution(all.phi), uniform_law(), kRegenKs);
    age_ks = ks_statistic(EmpiricalDistribution(all.age), exponential_law(2.0 * (lambda + 1.0)),
                          kRegenKs);
  }
  const auto xi_ks = ks_statistic(EmpiricalDistribution(all.xi), exponential_law(lambda));
  const auto eta_ks =
      ks_statistic(EmpiricalDistribution(all.eta), exponential_law(2.0 * lambda + 2.0));
  const double rho = lag1_correlation(all.gap_pairs);
  const double rho_band = 3.0 / std::sqrt(static_cast<double>(std::max<std::size_t>(all.gap_pairs.size(), 1)));

  const bool pass = enough && phi_ks.pass && age_ks.pass && eps_ok && all.violations == 0;
  json checks = {
      {"regenerations", all.phi.size()},
      {"excursions", all.excursions},
      {"censored_trajectories", censored},
      {"population_violations", all.violations},
      {"epsilon", {{"mean", eps_mean}, {"p", p}, {"band", eps_band}, {"pass", eps_ok}}},
      {"diagnostics",
       {{"xi_vs_exponential", xi_ks},
        {"eta_vs_exponential", eta_ks},
        {"gap_lag1_correlation",
         {{"rho", rho}, {"band", rho_band}, {"pairs", all.gap_pairs.size()},
          {"pass", std::abs(rho) <= rho_band}}}}}};
  if (enough) {
    checks["phi_vs_uniform"] = phi_ks;
    checks["age_vs_exponential"] = age_ks;
  }
  return make_verdict("regen", c, std::move(checks), pass);
}

Verdict verify_thm3(const VerifyConfig& c) {
  const ModelParams& params = c.params;
  const std::size_t n = *c.replicas;
  const double t = *c.t;

  double horizon = 0.0;
  double pilot_mu = 0.0;
  if (c.horizon) {
    horizon = *c.horizon;
  } else {
    const auto pilot = estimate_R1(params, std::max<std::size_t>(n / 5, 100),
                                   default_t_censor(params),
                                   derive_seed(c.seed, "thm3-pilot", 0), c.workers);
    pilot_mu = pilot.mu_hat;
    horizon = 10.0 * pilot.mu_hat;
  }

  const std::vector<double> vs = {0.25, 0.5, 0.75};
  const std::vector<double> xs = {0.2, 0.5, 1.0};

  struct Direct {
    double phi;
    double age;
  };
  const auto direct = run_replicas(n, c.workers, [&](std::size_t i) {
    Simulator sim(params, derive_seed(c.seed, "thm3-direct", 0), i);
    sim.run_until(t);
    return Direct{sim.state().fittest().fitness, age_of_fittest(sim.state())};
  });

  bool pass = true;
  json checks = json::object();
  checks["horizon"] = horizon;
  if (pilot_mu > 0.0) checks["pilot_mu"] = pilot_mu;

  for (const RenewalMode mode : {RenewalMode::Fitness, RenewalMode::Age}) {
    const CycleEnsemble cycles(params, mode, c.grid_dt, horizon, n,
                               derive_seed(c.seed, mode == RenewalMode::Fitness ? "thm3-fitness"
                                                                                : "thm3-age",
                                           0),
                               c.workers);
    const double mu = cycles.mu_hat();
    const GridFunction F = cycles.F();
    const auto& thresholds = mode == RenewalMode::Fitness ? vs : xs;
    json rows = json::array();
    double previous = -1.0;
    bool increasing = true;
    for (double th : thresholds) {
      const auto lim = cycles.limit(th);
      const GridFunction h = cycles.h(th);
      const auto lv = limit_value(h, mu);
      double h_at_horizon = 0.0;
      std::string solve_status = "ok";
      try {
        const GridFunction H = solve_renewal({F, h, mu});
        h_at_horizon = H.values.back();
      } catch (const RenewalDivergence& e) {
        solve_status = e.what();
      }
      std::size_t below = 0;
      for (const auto& d : direct) {
        const double obs = mode == RenewalMode::Fitness ? d.phi : d.age;
        below += obs <= th ? 1 : 0;
      }
      const double p_direct = static_cast<double>(below) / static_cast<double>(n);
      const double se_direct = std::sqrt(p_direct * (1.0 - p_direct) / static_cast<double>(n));
      const double se = std::sqrt(se_direct * se_direct + lim.standard_error * lim.standard_error);
      const bool agree = std::abs(lim.value - p_direct) <= 3.0 * se;
      pass = pass && agree;
      increasing = increasing && lim.value > previous;
      previous = lim.value;
      rows.push_back({{"threshold", th},
                      {"limit", lim.value},
                      {"limit_se", lim.standard_error},
                      {"limit_value", lv.value},
                      {"truncation_warning", lv.truncation_warning},
                      {"H_at_horizon", h_at_horizon},
                      {"solve", solve_status},
                      {"direct", p_direct},
                      {"direct_se", se_direct},
                      {"agree", agree}});
    }
    pass = pass && increasing;
    checks[to_string(mode)] = {{"mu_hat", mu},
                               {"censored_fraction", cycles.censored_fraction()},
                               {"strictly_increasing", increasing},
                               {"rows", std::move(rows)}};
  }
  return make_verdict("thm3", c, std::move(checks), pass);
}

MaxLawTrend max_law_trend(const ModelParams& params, double u, const std::vector<double>& times,
                          std::size_t replicas, std::uint64_t seed, unsigned workers) {
  params.validate();
  if (!std::is_sorted(times.begin(), times.end()) || times.empty() || !(times.front() > 0.0)) {
    throw UsageError("trend times must be positive and sorted");
  }
  if (!(u > 0.0 && u < 1.0)) throw UsageError("u must lie in (0,1)");
  MaxLawTrend out;
  out.times = times;
  const bool conditional = params.r == 1.0;
  out.estimator = conditional ? "conditional_u_pow_X" : "direct_indicator";
  const auto rows = run_replicas(replicas, workers, [&](std::size_t i) {
    std::vector<double> row;
    row.reserve(times.size());
    if (conditional) {
      CountChain chain(params.lambda, true, seed, i);
      for (double t : times) {
        if (params.lambda > 1.0) {
          chain.advance_with_leaps(t, kLeapThreshold);
        } else {
          chain.run_until(t);
        }
        row.push_back(std::pow(u, static_cast<double>(chain.count())));
      }
    } else {
      Simulator sim(params, seed, i);
      for (double t : times) {
        sim.run_until(t);
        row.push_back(sim.state().fittest().fitness <= u ? 1.0 : 0.0);
      }
    }
    return row;
  });
  const double n = static_cast<double>(replicas);
  for (std::size_t k = 0; k < times.size(); ++k) {
    double s = 0.0, ss = 0.0;
    for (const auto& row : rows) {
      s += row[k];
      ss += row[k] * row[k];
    }
    const double mean = s / n;
    const double var = replicas > 1 ? std::max(0.0, (ss - n * mean * mean) / (n - 1.0)) : 0.0;
    out.p.push_back(mean);
    out.standard_error.push_back(std::sqrt(var / n));
  }
  return out;
}

Verdict verify_thm4(const VerifyConfig& c) {
  constexpr double u = 0.9;
  std::vector<double> times = {5.0, 10.0, 20.0, 40.0};
  // A custom t stretches the grid so that its last point is t.
  if (*c.t != 40.0) {
    for (double& t : times) t *= *c.t / 40.0;
  }
  const auto trend = max_law_trend(c.params, u, times, *c.replicas, c.seed, c.workers);
  bool decreasing = true;
  for (std::size_t k = 1; k < trend.p.size(); ++k) decreasing = decreasing && trend.p[k] < trend.p[k - 1];
  return make_verdict("thm4", c,
                      {{"u", u},
                       {"estimator", trend.estimator},
                       {"times", trend.times},
                       {"p", trend.p},
                       {"standard_error", trend.standard_error},
                       {"strictly_decreasing", decreasing}},
                      decreasing);
}

Verdict verify_r1law(const VerifyConfig& c) {
  const double t = *c.t;
  struct Sample {
    std::uint64_t x;
    double phi;
  };
  const auto samples = run_replicas(*c.replicas, c.workers, [&](std::size_t i) {
    RandomKillingSimulator sim(c.params.lambda, c.seed, i);
    sim.run_until(t);
    return Sample{sim.count(), sim.phi()};
  });
  std::vector<std::uint64_t> xs;
  std::vector<double> phis, pit;
  for (const auto& s : samples) {
    xs.push_back(s.x);
    phis.push_back(s.phi);
    pit.push_back(std::pow(s.phi, static_cast<double>(s.x)));
  }
  const auto law = conditional_max_law(xs, phis);
  const auto pooled = ks_statistic(EmpiricalDistribution(pit), uniform_law());
  const bool pass = law.pass && !law.tested.empty();
  return make_verdict("r1law", c,
                      {{"per_k", law},
                       {"bins_tested", law.tested.size()},
                       {"diagnostics", {{"pooled_phi_pow_X_vs_uniform", pooled}}}},
                      pass);
}

Verdict verify_stationary(const VerifyConfig& c) {
  constexpr double spacing = 5.0;
  const double burn_in = *c.t;
  const std::size_t wanted = *c.replicas;
  const std::size_t trajectories = std::min<std::size_t>(100, wanted);
  const std::size_t per = (wanted + trajectories - 1) / trajectories;
  const auto parts = run_replicas(trajectories, c.workers, [&](std::size_t i) {
    Simulator sim(c.params, c.seed, i);
    std::vector<std::uint64_t> xs;
    for (std::size_t k = 0; k < per; ++k) {
      sim.run_until(burn_in + spacing * static_cast<double>(k));
      xs.push_back(sim.state().count());
    }
    return xs;
  });
  std::vector<std::uint64_t> counts;
  std::size_t taken = 0;
  for (const auto& xs : parts) {
    for (auto x : xs) {
      if (taken == wanted) break;
      if (counts.size() < x) counts.resize(x, 0);
      ++counts[x - 1];
      ++taken;
    }
  }
  const double lambda = c.params.lambda;
  const auto chi2 = chi_square_gof(
      counts, 1, [&](std::uint64_t n) { return logseries_pmf(lambda, n); }, "logseries");
  double balance = 0.0;
  for (std::uint64_t n = 1; n < 200; ++n) {
    balance = std::max(balance, std::abs(logseries_pmf(lambda, n + 1) * static_cast<double>(n + 1) -
                                         logseries_pmf(lambda, n) * static_cast<double>(n) * lambda));
  }
  const bool balance_ok = balance <= 1e-12;
  return make_verdict("stationary", c,
                      {{"samples", taken},
                       {"burn_in", burn_in},
                       {"spacing", spacing},
                       {"chi2", chi2},
                       {"detailed_balance_max_error", balance},
                       {"detailed_balance_pass", balance_ok}},
                      chi2.pass && balance_ok);
}

Verdict verify_coupling(const VerifyConfig& c) {
  CoupledOptions options;
  options.abort_on_violation = false;
  const auto runs = run_replicas(*c.replicas, c.workers, [&](std::size_t i) {
    return coupled_simulate(c.params, *c.t, c.seed, i, options);
  });
  std::uint64_t violations = 0, events = 0;
  double gap_min = 0.0;
  std::vector<double> m1, mr;
  for (const auto& run : runs) {
    violations += run.violations;
    events += run.events;
    gap_min = std::min(gap_min, run.dominance_gap_min);
    m1.push_back(run.max_f1);
    mr.push_back(run.max_fr);
  }
  const EmpiricalDistribution e1(m1), er(mr);
  double cdf_excess = -INFINITY;
  for (const auto* s : {&e1.samples(), &er.samples()}) {
    for (double x : *s) cdf_excess = std::max(cdf_excess, er.cdf(x) - e1.cdf(x));
  }
  const bool dominance_ok = cdf_excess <= kDominanceSlack;

  const auto exhaustive = enumerate_lemma(4, 8);
  const auto randomized = randomized_lemma(100'000, 12, c.seed);
  auto lemma_json = [](const LemmaEnumeration& l) {
    return json{{"insert_cases", l.insert_cases},
                {"delete_cases", l.delete_cases},
                {"violations", l.violations}};
  };
  const bool pass = violations == 0 && dominance_ok && exhaustive.violations == 0 &&
                    randomized.violations == 0;
  return make_verdict("coupling", c,
                      {{"violations", violations},
                       {"events", events},
                       {"replicas", runs.size()},
                       {"t_max", *c.t},
                       {"dominance_gap_min", gap_min},
                       {"cdf_excess_max", cdf_excess},
                       {"cdf_slack", kDominanceSlack},
                       {"lemma_exhaustive", lemma_json(exhaustive)},
                       {"lemma_randomized", lemma_json(randomized)}},
                      pass);
}

Verdict verify_survival(const VerifyConfig& c) {
  std::vector<double> times = {1.0, 2.0, 4.0};
  if (*c.t != 4.0) {
    for (double& t : times) t *= *c.t / 4.0;
  }
  const std::size_t n = *c.replicas;
  const auto alive = run_replicas(n, c.workers, [&](std::size_t i) {
    CountChain chain(c.params.lambda, false, c.seed, i);
    std::vector<int> row;
    for (double t : times) {
      chain.run_until(t);
      row.push_back(chain.extinct() ? 0 : 1);
    }
    return row;
  });
  bool pass = true;
  json rows = json::array();
  for (std::size_t k = 0; k < times.size(); ++k) {
    double s = 0.0;
    for (const auto& row : alive) s += row[k];
    const double p_hat = s / static_cast<double>(n);
    const double p = linear_bd_survival(c.params.lambda, times[k]);
    const double se = std::sqrt(p * (1.0 - p) / static_cast<double>(n));
    const bool ok = std::abs(p_hat - p) <= 3.0 * se;
    pass = pass && ok;
    rows.push_back({{"t", times[k]}, {"empirical", p_hat}, {"closed_form", p}, {"se", se}, {"pass", ok}});
  }
  return make_verdict("survival", c, {{"rows", std::move(rows)}}, pass);
}

Verdict verify_growth(const VerifyConfig& c) {
  const double t_max = *c.t;
  std::vector<double> grid;
  for (double t = 0.25; t <= t_max + 1e-9; t += 0.25) grid.push_back(t);
  struct Summary {
    double spread;
    double scaled_min;
    double scaled_last;
    std::vector<double> dyadic;
    double s_ratio_last;
  };
  const auto runs = run_replicas(*c.replicas, c.workers, [&](std::size_t i) {
    CountChain chain(c.params.lambda, true, c.seed, i);
    GrowthTracker tracker;
    while (chain.next_event_time() <= t_max) {
      const auto before = chain.count();
      chain.step();
      tracker.on_event(chain.time(), chain.count(), chain.count() > before);
    }
    const auto g = tracker.finish(c.params.lambda, grid);
    return Summary{g.plateau_spread(0.5), *std::min_element(g.scaled.begin(), g.scaled.end()),
                   g.scaled.back(), g.dyadic_zeta_differences(), g.s_ratio.back()};
  });

  std::size_t within = 0;
  bool positive = true;
  std::size_t depth = SIZE_MAX;
  for (const auto& s : runs) {
    within += s.spread < kPlateauBand ? 1 : 0;
    positive = positive && s.scaled_min > 0.0 && std::isfinite(s.scaled_last);
    depth = std::min(depth, s.dyadic.size());
  }
  const double share = static_cast<double>(within) / static_cast<double>(runs.size());
  std::vector<double> medians;
  for (std::size_t k = 0; k < depth; ++k) {
    std::vector<double> col;
    for (const auto& s : runs) col.push_back(s.dyadic[k]);
    medians.push_back(median_of(std::move(col)));
  }
  bool decreasing = medians.size() >= 2;
  for (std::size_t k = 1; k < medians.size(); ++k) decreasing = decreasing && medians[k] < medians[k - 1];
  std::vector<double> s_ratio;
  for (const auto& s : runs) s_ratio.push_back(s.s_ratio_last);

  const bool pass = positive && share >= kPlateauShare && decreasing;
  return make_verdict("growth", c,
                      {{"replicates", runs.size()},
                       {"plateau_band", kPlateauBand},
                       {"plateau_share", share},
                       {"plateau_required", kPlateauShare},
                       {"scaled_positive_finite", positive},
                       {"dyadic_zeta_median", medians},
                       {"dyadic_median_decreasing", decreasing},
                       {"s_ratio_final_median", median_of(s_ratio)}},
                      pass);
}

NullCalibration null_calibration(std::size_t resamples, std::size_t sample_size,
                                 std::uint64_t seed) {
  constexpr double lambda = 0.5;
  NullCalibration out;
  out.resamples = resamples;
  std::size_t ks_rejects = 0, chi_rejects = 0;
  for (std::size_t i = 0; i < resamples; ++i) {
    Stream rng(seed, "null-calibration", i);
    std::vector<double> u(sample_size);
    for (double& x : u) x = rng.uniform_open();
    ks_rejects += ks_statistic(EmpiricalDistribution(std::move(u)), uniform_law()).pass ? 0 : 1;
    std::vector<std::uint64_t> counts;
    for (std::size_t k = 0; k < sample_size; ++k) {
      const auto x = sample_logseries(lambda, rng);
      if (counts.size() < x) counts.resize(x, 0);
      ++counts[x - 1];
    }
    const auto chi2 = chi_square_gof(
        counts, 1, [&](std::uint64_t n) { return logseries_pmf(lambda, n); }, "logseries");
    chi_rejects += chi2.pass ? 0 : 1;
  }
  out.ks_rejection = static_cast<double>(ks_rejects) / static_cast<double>(resamples);
  out.chi2_rejection = static_cast<double>(chi_rejects) / static_cast<double>(resamples);
  return out;
}

}  // namespace virevo
