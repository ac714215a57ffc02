// Command-line front end: simulate, regen, renewal, couple, verify,
// explore-conjecture. Exit codes: 0 pass, 1 failure, 2 usage error.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "virevo/coupling.hpp"
#include "virevo/engine.hpp"
#include "virevo/parallel.hpp"
#include "virevo/regen.hpp"
#include "virevo/renewal.hpp"
#include "virevo/stats.hpp"
#include "virevo/verify.hpp"

namespace {

using nlohmann::json;
using namespace virevo;

constexpr int kSchemaVersion = 1;
constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;

struct RunConfig {
  double lambda = 0.5;
  double r = 0.0;
  double t_max = 10.0;
  double obs_dt = 1.0;
  std::size_t replicas = 10;
  std::uint64_t seed = 1;
  unsigned workers = 1;
  double grid_dt = 0.1;
  std::optional<double> horizon;
  std::string output = "-";
  std::string format = "json";
  std::string config_path;

  ModelParams params() const {
    ModelParams p{lambda, r};
    p.validate();
    return p;
  }
};

json config_json(const RunConfig& c) {
  json j = {{"lambda", c.lambda},   {"r", c.r},
            {"t_max", c.t_max},     {"obs_dt", c.obs_dt},
            {"replicas", c.replicas}, {"seed", c.seed},
            {"workers", c.workers}, {"grid_dt", c.grid_dt},
            {"output", c.output},   {"format", c.format}};
  j["horizon"] = c.horizon ? json(*c.horizon) : json(nullptr);
  return j;
}

// Flags the user typed, by long name, filled in after parsing.
struct Flags {
  CLI::App* app = nullptr;
  bool given(const std::string& name) const { return app->count("--" + name) > 0; }
};

void add_common(CLI::App* sub, RunConfig& c) {
  sub->add_option("--lambda", c.lambda, "birth rate per type");
  sub->add_option("--r", c.r, "probability that a death is a random killing");
  sub->add_option("--t-max", c.t_max, "time horizon");
  sub->add_option("--obs-dt", c.obs_dt, "spacing of observation times");
  sub->add_option("--replicas", c.replicas, "number of replicas");
  sub->add_option("--seed", c.seed, "master seed");
  sub->add_option("--workers", c.workers, "worker threads");
  sub->add_option("--grid-dt", c.grid_dt, "renewal grid step");
  sub->add_option_function<double>("--horizon", [&c](double h) { c.horizon = h; },
                                   "renewal grid horizon");
  sub->add_option("--output", c.output, "output path, - for stdout");
  sub->add_option("--format", c.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  sub->add_option("--config", c.config_path, "JSON config file");
}

// Fills every field not given on the command line from the config file
// and returns the file's contents.
json apply_config_file(RunConfig& c, const Flags& flags) {
  if (c.config_path.empty()) return json::object();
  std::ifstream in(c.config_path);
  if (!in) throw UsageError("cannot read config file " + c.config_path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw UsageError(std::string("config file is not valid JSON: ") + e.what());
  }
  auto take = [&](const char* key, const char* flag, auto& field) {
    if (j.contains(key) && !flags.given(flag)) j.at(key).get_to(field);
  };
  try {
    take("lambda", "lambda", c.lambda);
    take("r", "r", c.r);
    take("t_max", "t-max", c.t_max);
    take("obs_dt", "obs-dt", c.obs_dt);
    take("replicas", "replicas", c.replicas);
    take("seed", "seed", c.seed);
    take("workers", "workers", c.workers);
    take("grid_dt", "grid-dt", c.grid_dt);
    take("output", "output", c.output);
    take("format", "format", c.format);
    if (j.contains("horizon") && !j.at("horizon").is_null() && !flags.given("horizon")) {
      c.horizon = j.at("horizon").get<double>();
    }
  } catch (const json::exception& e) {
    throw UsageError(std::string("bad config value: ") + e.what());
  }
  if (c.format != "csv" && c.format != "json") throw UsageError("format must be csv or json");
  return j;
}

void validate_run(const RunConfig& c) {
  c.params();
  if (!(c.t_max > 0.0)) throw UsageError("t-max must be positive");
  if (c.replicas < 1) throw UsageError("replicas must be at least 1");
  if (c.workers < 1) throw UsageError("workers must be at least 1");
  if (!(c.obs_dt > 0.0)) throw UsageError("obs-dt must be positive");
  if (!(c.grid_dt > 0.0)) throw UsageError("grid-dt must be positive");
}

class Output {
 public:
  explicit Output(const std::string& path) {
    if (path != "-") {
      file_.open(path);
      if (!file_) throw UsageError("cannot open output " + path);
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_json(const std::string& path, const json& j) {
  Output out(path);
  out.stream() << j.dump(2) << '\n';
}

json quantiles(std::vector<double> x) {
  const EmpiricalDistribution d(std::move(x));
  return {{"mean", d.mean()},
          {"q10", d.quantile(0.1)},
          {"q50", d.quantile(0.5)},
          {"q90", d.quantile(0.9)}};
}

std::vector<double> observation_grid(double t_max, double dt) {
  std::vector<double> times;
  const auto steps = static_cast<std::size_t>(std::floor(t_max / dt + 1e-9));
  for (std::size_t k = 0; k <= steps; ++k) times.push_back(dt * static_cast<double>(k));
  if (times.back() < t_max - 1e-9) times.push_back(t_max);
  return times;
}

json header(const std::string& command, const RunConfig& c) {
  return {{"schema_version", kSchemaVersion}, {"command", command}, {"config", config_json(c)}};
}

int run_simulate(const RunConfig& c, const std::string& summary_path) {
  const ModelParams params = c.params();
  const auto times = observation_grid(c.t_max, c.obs_dt);
  const auto runs = run_replicas(c.replicas, c.workers, [&](std::size_t i) {
    SimulationOptions opt;
    opt.replica = i;
    opt.record_events = false;
    return simulate(params, c.t_max, times, c.seed, opt).observations;
  });

  json summary = header("simulate", c);
  json rows = json::array();
  for (std::size_t k = 0; k < times.size(); ++k) {
    std::vector<double> x, phi, age;
    for (const auto& obs : runs) {
      x.push_back(static_cast<double>(obs[k].population));
      phi.push_back(obs[k].phi);
      age.push_back(obs[k].age);
    }
    rows.push_back({{"t", times[k]}, {"X", quantiles(x)}, {"phi", quantiles(phi)}, {"age", quantiles(age)}});
  }
  summary["observations"] = std::move(rows);

  if (c.format == "csv") {
    Output out(c.output);
    auto& os = out.stream();
    os << "replica,t,X,phi,age,births\n";
    for (std::size_t i = 0; i < runs.size(); ++i) {
      for (const auto& o : runs[i]) {
        os << i << ',' << fmt(o.time) << ',' << o.population << ',' << fmt(o.phi) << ','
           << fmt(o.age) << ',' << o.births << '\n';
      }
    }
    if (!summary_path.empty()) write_json(summary_path, summary);
  } else {
    write_json(c.output, summary);
  }
  return kExitPass;
}

int run_regen(const RunConfig& c, const std::string& excursion_path) {
  const ModelParams params = c.params();
  if (!(params.lambda < 1.0 && params.r > 0.0)) {
    throw UsageError("regen needs lambda < 1 and r > 0");
  }
  struct Part {
    ExcursionScan scan;
    std::vector<RegenRecord> regenerations;
    std::size_t violations = 0;
  };
  const auto parts = run_replicas(c.replicas, c.workers, [&](std::size_t i) {
    SimulationOptions opt;
    opt.replica = i;
    auto sim = simulate(params, c.t_max, {}, c.seed, opt);
    Part p;
    p.scan = detect_excursions(sim.initial, sim.events);
    p.regenerations = detect_regenerations(p.scan.excursions);
    p.violations = count_regeneration_violations(sim.initial, sim.events, p.regenerations);
    return p;
  });

  std::vector<double> phi, age;
  std::size_t excursions = 0, censored = 0, violations = 0, eps = 0;
  for (const auto& p : parts) {
    for (const auto& r : p.regenerations) {
      phi.push_back(r.phi);
      age.push_back(r.age);
    }
    for (const auto& ex : p.scan.excursions) eps += ex.epsilon ? 1 : 0;
    excursions += p.scan.excursions.size();
    censored += p.scan.censored;
    violations += p.violations;
  }

  if (!excursion_path.empty()) {
    Output out(excursion_path);
    auto& os = out.stream();
    os << "n,xi,eta,outcome,epsilon\n";
    for (const auto& ex : parts.front().scan.excursions) {
      os << ex.n << ',' << fmt(ex.xi) << ',' << fmt(ex.eta) << ',' << to_string(ex.outcome) << ','
         << (ex.epsilon ? 1 : 0) << '\n';
    }
  }

  json summary = header("regen", c);
  summary["regenerations"] = phi.size();
  summary["excursions"] = excursions;
  summary["censored_excursions"] = censored;
  summary["population_violations"] = violations;
  summary["epsilon_mean"] = excursions ? static_cast<double>(eps) / static_cast<double>(excursions) : 0.0;
  summary["bernoulli_p"] = bernoulli_p(params);
  if (phi.size() >= kKsMinSamples) {
    summary["phi_vs_uniform"] = ks_statistic(EmpiricalDistribution(phi), uniform_law());
    summary["age_vs_exponential"] =
        ks_statistic(EmpiricalDistribution(age), exponential_law(2.0 * (params.lambda + 1.0)));
  }

  if (c.format == "csv") {
    Output out(c.output);
    auto& os = out.stream();
    os << "replica,n,R_n,phi,age\n";
    for (std::size_t i = 0; i < parts.size(); ++i) {
      for (const auto& r : parts[i].regenerations) {
        os << i << ',' << r.n << ',' << fmt(r.time) << ',' << fmt(r.phi) << ',' << fmt(r.age) << '\n';
      }
    }
  } else {
    write_json(c.output, summary);
  }
  return violations == 0 ? kExitPass : kExitFail;
}

void write_grid(const std::string& path, const GridFunction& g) {
  Output out(path);
  auto& os = out.stream();
  os << "t,value\n";
  for (std::size_t k = 0; k < g.size(); ++k) os << fmt(g.time(k)) << ',' << fmt(g.values[k]) << '\n';
}

int run_renewal(const RunConfig& c, const std::string& mode_name, std::vector<double> thresholds,
                const std::string& grid_prefix) {
  const ModelParams params = c.params();
  const RenewalMode mode = mode_name == "age" ? RenewalMode::Age : RenewalMode::Fitness;
  if (!(params.lambda < 1.0 && params.r > 0.0)) {
    throw UsageError("renewal needs lambda < 1 and r > 0");
  }
  if (thresholds.empty()) {
    thresholds = mode == RenewalMode::Fitness ? std::vector<double>{0.25, 0.5, 0.75}
                                              : std::vector<double>{0.2, 0.5, 1.0};
  }
  double horizon = 0.0;
  if (c.horizon) {
    horizon = *c.horizon;
  } else {
    const auto pilot = estimate_R1(params, std::max<std::size_t>(c.replicas / 5, 100),
                                   default_t_censor(params), derive_seed(c.seed, "renewal-pilot", 0),
                                   c.workers);
    horizon = 10.0 * pilot.mu_hat;
  }
  const CycleEnsemble cycles(params, mode, c.grid_dt, horizon, c.replicas, c.seed, c.workers);
  const double mu = cycles.mu_hat();
  const GridFunction F = cycles.F();

  json summary = header("renewal", c);
  summary["mode"] = to_string(mode);
  summary["horizon"] = horizon;
  json rows = json::array();
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    const GridFunction h = cycles.h(thresholds[i]);
    const GridFunction H = solve_renewal({F, h, mu});
    const auto lim = limit_value(h, mu);
    rows.push_back({{"v_or_x", thresholds[i]},
                    {"limit", lim.value},
                    {"limit_se", cycles.limit(thresholds[i]).standard_error},
                    {"truncation_warning", lim.truncation_warning},
                    {"H_at_horizon", H.values.back()},
                    {"mu_hat", mu},
                    {"censored_fraction", cycles.censored_fraction()}});
    if (!grid_prefix.empty()) {
      write_grid(grid_prefix + "h_" + std::to_string(i) + ".csv", h);
      write_grid(grid_prefix + "H_" + std::to_string(i) + ".csv", H);
    }
  }
  if (!grid_prefix.empty()) write_grid(grid_prefix + "F.csv", F);
  summary["results"] = std::move(rows);
  write_json(c.output, summary);
  return kExitPass;
}

int run_couple(const RunConfig& c, const std::string& trace_path) {
  const ModelParams params = c.params();
  if (!(params.r > 0.0 && params.r < 1.0)) throw UsageError("couple needs 0 < r < 1");
  CoupledOptions opt;
  opt.abort_on_violation = false;
  const auto runs = run_replicas(c.replicas, c.workers, [&](std::size_t i) {
    CoupledOptions o = opt;
    o.record_trace = i == 0 && !trace_path.empty();
    return coupled_simulate(params, c.t_max, c.seed, i, o);
  });
  std::uint64_t violations = 0;
  double gap = 0.0;
  for (const auto& r : runs) {
    violations += r.violations;
    gap = std::min(gap, r.dominance_gap_min);
  }
  if (!trace_path.empty()) {
    Output out(trace_path);
    auto& os = out.stream();
    os << "t,X,max_f1,max_fr\n";
    for (const auto& p : runs.front().trace) {
      os << fmt(p.time) << ',' << p.population << ',' << fmt(p.max_f1) << ',' << fmt(p.max_fr) << '\n';
    }
  }
  json summary = header("couple", c);
  summary["violations"] = violations;
  summary["dominance_gap_min"] = gap;
  summary["replicas"] = c.replicas;
  summary["t_max"] = c.t_max;
  write_json(c.output, summary);
  return violations == 0 ? kExitPass : kExitFail;
}

int run_verify_cmd(const RunConfig& c, const Flags& flags, const json& file,
                   const std::string& target) {
  VerifyConfig v;
  v.params = c.params();
  v.seed = c.seed;
  v.workers = c.workers;
  v.grid_dt = c.grid_dt;
  v.horizon = c.horizon;
  // Targets carry their own defaults; only explicit settings override them.
  if (flags.given("t-max") || file.contains("t_max")) v.t = c.t_max;
  if (flags.given("replicas") || file.contains("replicas")) v.replicas = c.replicas;
  const Verdict verdict = run_verify(target, v);
  json out = header("verify", c);
  out["target"] = verdict.target;
  out["pass"] = verdict.pass;
  out["report"] = verdict.report;
  write_json(c.output, out);
  return verdict.pass ? kExitPass : kExitFail;
}

// Age of the fittest type for r > 0, λ > 1 along a time grid: whether a_t
// stays tight is open, so only the empirical law is reported.
int run_explore(const RunConfig& c) {
  const ModelParams params = c.params();
  if (!(params.r > 0.0 && params.lambda > 1.0)) {
    throw UsageError("explore-conjecture needs r > 0 and lambda > 1");
  }
  const auto times = observation_grid(c.t_max, c.obs_dt);
  const auto runs = run_replicas(c.replicas, c.workers, [&](std::size_t i) {
    Simulator sim(params, c.seed, i);
    std::vector<double> ages;
    for (double t : times) {
      sim.run_until(t);
      ages.push_back(age_of_fittest(sim.state()));
    }
    return ages;
  });
  json summary = header("explore-conjecture", c);
  json rows = json::array();
  for (std::size_t k = 0; k < times.size(); ++k) {
    std::vector<double> a;
    for (const auto& row : runs) a.push_back(row[k]);
    rows.push_back({{"t", times[k]}, {"age", quantiles(a)}});
  }
  summary["age_by_time"] = std::move(rows);
  if (c.format == "csv") {
    Output out(c.output);
    auto& os = out.stream();
    os << "replica,t,age\n";
    for (std::size_t i = 0; i < runs.size(); ++i) {
      for (std::size_t k = 0; k < times.size(); ++k) {
        os << i << ',' << fmt(times[k]) << ',' << fmt(runs[i][k]) << '\n';
      }
    }
  } else {
    write_json(c.output, summary);
  }
  return kExitPass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact simulator and verification suite for the birth-death model with fitness"};
  app.require_subcommand(1);

  RunConfig c;
  c.workers = default_workers();

  auto* sim = app.add_subcommand("simulate", "observation series for independent replicas");
  add_common(sim, c);
  std::string summary_path;
  sim->add_option("--summary", summary_path, "JSON summary path when --format csv");

  auto* regen = app.add_subcommand("regen", "excursions and regeneration times");
  add_common(regen, c);
  std::string excursion_path;
  regen->add_option("--excursions", excursion_path, "excursion debug CSV (first replica)");

  auto* renewal = app.add_subcommand("renewal", "renewal limits of the fitness or age law");
  add_common(renewal, c);
  std::string mode = "fitness";
  std::vector<double> thresholds;
  std::string grid_prefix;
  renewal->add_option("--mode", mode, "fitness or age")->check(CLI::IsMember({"fitness", "age"}));
  renewal->add_option("--threshold", thresholds, "v (fitness) or x (age) values");
  renewal->add_option("--grid-out", grid_prefix, "prefix for F, h and H grid CSVs");

  auto* couple = app.add_subcommand("couple", "coupled r and r = 1 processes");
  add_common(couple, c);
  std::string trace_path;
  couple->add_option("--trace", trace_path, "per-event CSV of the first replica");

  auto* verify = app.add_subcommand("verify", "statistical verification of one target");
  add_common(verify, c);
  std::string target;
  verify->add_option("target", target, "target name")->required()->check(CLI::IsMember(verify_targets()));

  auto* explore = app.add_subcommand("explore-conjecture", "age of the fittest for r > 0, lambda > 1");
  add_common(explore, c);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  CLI::App* chosen = app.get_subcommands().front();
  const Flags flags{chosen};
  try {
    const json file = apply_config_file(c, flags);
    validate_run(c);
    if (chosen == sim) return run_simulate(c, summary_path);
    if (chosen == regen) return run_regen(c, excursion_path);
    if (chosen == renewal) return run_renewal(c, mode, thresholds, grid_prefix);
    if (chosen == couple) return run_couple(c, trace_path);
    if (chosen == verify) return run_verify_cmd(c, flags, file, target);
    return run_explore(c);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFail;
  }
}
