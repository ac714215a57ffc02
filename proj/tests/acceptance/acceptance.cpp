// Acceptance run: one PASS/FAIL line per criterion.
//
// Exit status is 0 when every criterion passes or only criteria listed in
// kKnownDeviations fail without error; 1 otherwise; 2 on bad arguments.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "virevo/engine.hpp"
#include "virevo/verify.hpp"

using namespace virevo;
using nlohmann::json;

namespace {

// Criterion tolerances.
constexpr double kAgeKs = 0.03;
constexpr double kRegenKsTol = 0.02;
constexpr std::size_t kMinRegenerations = 10000;
constexpr double kCouplingSlack = 0.02;
constexpr double kBalanceTol = 1e-12;
constexpr double kPlateauBandTol = 0.5;
constexpr double kPlateauShareTol = 0.9;
constexpr double kNullLow = 0.03;
constexpr double kNullHigh = 0.07;
constexpr std::size_t kNullResamples = 2000;
constexpr std::size_t kNullSampleSize = 2000;

// Criteria expected to fail; see README.
const std::set<int> kKnownDeviations = {5, 9};

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  double budget_seconds;
  std::function<Outcome()> run;
};

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

VerifyConfig config(double lambda, double r, std::uint64_t seed, unsigned workers) {
  VerifyConfig c;
  c.params = {lambda, r};
  c.seed = seed;
  c.workers = workers;
  return c;
}

Verdict verify(std::string_view target, VerifyConfig c) {
  return run_verify(target, resolve_verify_config(target, std::move(c)));
}

bool same_events(const SimulationResult& a, const SimulationResult& b) {
  if (a.events.size() != b.events.size() || !(a.observations == b.observations)) return false;
  for (std::size_t i = 0; i < a.events.size(); ++i) {
    const auto& x = a.events[i];
    const auto& y = b.events[i];
    if (x.time != y.time || x.kind != y.kind || x.subject_id != y.subject_id ||
        x.subject_fitness != y.subject_fitness || x.population_after != y.population_after) {
      return false;
    }
  }
  return true;
}

std::vector<Criterion> criteria(std::uint64_t seed, unsigned workers) {
  std::vector<Criterion> out;

  out.push_back({1, 120.0, [=] {
    auto c = config(0.5, 0.0, seed, workers);
    c.t = 200.0;
    c.replicas = 10000;
    const auto v = verify("thm1a", c);
    const double d = v.report["checks"]["age_over_t_vs_uniform"]["statistic"];
    return Outcome{d <= kAgeKs, "a_t/t vs uniform, lambda=0.5 r=0 t=200 n=10000: D=" +
                                    fmt("%.4f", d) + " (tol " + fmt("%.2f", kAgeKs) + ")"};
  }});

  out.push_back({2, 120.0, [=] {
    auto c = config(2.0, 0.0, seed, workers);
    c.t = 10.0;
    c.replicas = 10000;
    const auto v = verify("thm2b", c);
    const double d = v.report["checks"]["age_vs_exponential"]["statistic"];
    return Outcome{d <= kAgeKs, "a_t vs exponential(1), lambda=2 r=0 t=10 n=10000: D=" +
                                    fmt("%.4f", d) + " (tol " + fmt("%.2f", kAgeKs) + ")"};
  }});

  out.push_back({3, 180.0, [=] {
    auto c = config(0.5, 0.5, seed, workers);
    c.replicas = kMinRegenerations;
    const auto v = verify("regen", c);
    const auto& k = v.report["checks"];
    const std::size_t n = k["regenerations"];
    const double dphi = k.value("/phi_vs_uniform/statistic"_json_pointer, 1.0);
    const double dage = k.value("/age_vs_exponential/statistic"_json_pointer, 1.0);
    const double eps = k["epsilon"]["mean"];
    const double p = k["epsilon"]["p"];
    const double band = 3.0 * std::sqrt(p * (1.0 - p) / static_cast<double>(k["excursions"].get<std::size_t>()));
    const std::size_t violations = k["population_violations"];
    const bool pass = n >= kMinRegenerations && dphi <= kRegenKsTol && dage <= kRegenKsTol &&
                      std::abs(eps - p) <= band && violations == 0;
    return Outcome{pass, "regenerations=" + std::to_string(n) + " D_phi=" + fmt("%.4f", dphi) +
                             " D_age=" + fmt("%.4f", dage) + " (tol " + fmt("%.2f", kRegenKsTol) +
                             ") eps=" + fmt("%.4f", eps) + " vs " + fmt("%.4f", p) + " +- " +
                             fmt("%.4f", band) + " violations=" + std::to_string(violations)};
  }});

  out.push_back({4, 300.0, [=] {
    auto c = config(0.5, 0.5, seed, workers);
    c.t = 200.0;
    const auto v = verify("thm3", c);
    bool pass = true;
    std::string detail;
    for (const char* mode : {"fitness", "age"}) {
      const auto& m = v.report["checks"][mode];
      detail += std::string(mode) + ":";
      double previous = -1.0;
      for (const auto& row : m["rows"]) {
        const double lim = row["limit"], direct = row["direct"];
        const double se = std::hypot(row["limit_se"].get<double>(), row["direct_se"].get<double>());
        const bool agree = std::abs(lim - direct) <= 3.0 * se;
        pass = pass && agree && lim > previous;
        previous = lim;
        detail += " " + fmt("%.3f", lim) + "/" + fmt("%.3f", direct) + (agree ? "" : "!");
      }
      detail += "; ";
    }
    return Outcome{pass, "renewal limit/direct at t=200, " + detail + "3 combined SE, increasing"};
  }});

  out.push_back({5, 180.0, [=] {
    auto law_cfg = config(1.5, 1.0, seed, workers);
    law_cfg.t = 15.0;
    law_cfg.replicas = 100000;
    const auto law = verify("r1law", law_cfg);
    auto trend_cfg = config(1.5, 1.0, seed, workers);
    trend_cfg.t = 40.0;
    const auto trend = verify("thm4", trend_cfg);

    const auto& bins = law.report["checks"]["per_k"]["tested"];
    std::size_t failed = 0;
    std::string worst;
    double worst_excess = -1.0;
    for (const auto& b : bins) {
      const double d = b["ks"]["statistic"], thr = b["ks"]["threshold"];
      if (d > thr) ++failed;
      if (d / thr > worst_excess) {
        worst_excess = d / thr;
        worst = "k=" + std::to_string(b["k"].get<std::uint64_t>()) + " D=" + fmt("%.4f", d) +
                " thr=" + fmt("%.4f", thr);
      }
    }
    const auto p = trend.report["checks"]["p"].get<std::vector<double>>();
    bool decreasing = p.size() == 4;
    for (std::size_t i = 1; i < p.size(); ++i) decreasing = decreasing && p[i] < p[i - 1];
    const bool pass = !bins.empty() && failed == 0 && decreasing;
    std::string ps;
    for (double x : p) ps += (ps.empty() ? "" : ",") + fmt("%.3g", x);
    return Outcome{pass, "u^k law lambda=1.5 r=1 t=15 n=100000: " + std::to_string(failed) + "/" +
                             std::to_string(bins.size()) + " bins fail (worst " + worst +
                             "); P(phi<=0.9) at t=5,10,20,40: " + ps +
                             (decreasing ? " decreasing" : " not decreasing")};
  }});

  out.push_back({6, 120.0, [=] {
    auto c = config(2.0, 0.5, seed, workers);
    c.t = 8.0;
    c.replicas = 1000;
    const auto v = verify("coupling", c);
    const auto& k = v.report["checks"];
    const std::size_t violations = k["violations"];
    const double excess = k["cdf_excess_max"];
    const std::size_t lemma = k["lemma_exhaustive"]["violations"];
    const std::size_t random_lemma = k["lemma_randomized"]["violations"];
    const bool pass =
        violations == 0 && excess <= kCouplingSlack && lemma == 0 && random_lemma == 0;
    return Outcome{pass, "lambda=2 r=0.5 t=8 n=1000: violations=" + std::to_string(violations) +
                             " cdf excess=" + fmt("%.4f", excess) + " (tol " +
                             fmt("%.2f", kCouplingSlack) + ") lemma k<=4 violations=" +
                             std::to_string(lemma) + " random=" + std::to_string(random_lemma)};
  }});

  out.push_back({7, 60.0, [=] {
    auto c = config(0.5, 0.5, seed, workers);
    c.t = 50.0;
    c.replicas = 10000;
    const auto v = verify("stationary", c);
    const auto& k = v.report["checks"];
    const double stat = k["chi2"]["statistic"], thr = k["chi2"]["threshold"];
    const double balance = k["detailed_balance_max_error"];
    const bool pass = stat <= thr && balance <= kBalanceTol;
    return Outcome{pass, "chi2=" + fmt("%.3f", stat) + " (5% critical " + fmt("%.3f", thr) +
                             ") detailed balance error=" + fmt("%.2e", balance)};
  }});

  out.push_back({8, 60.0, [=] {
    auto c = config(0.5, 0.0, seed, workers);
    c.replicas = 10000;
    const auto v = verify("survival", c);
    bool pass = true;
    std::string detail;
    for (const auto& row : v.report["checks"]["rows"]) {
      const double mc = row["empirical"], exact = row["closed_form"], se = row["se"];
      pass = pass && std::abs(mc - exact) <= 3.0 * se;
      detail += " t=" + fmt("%g", row["t"].get<double>()) + ": " + fmt("%.4f", mc) + " vs " +
                fmt("%.4f", exact);
    }
    return Outcome{pass, "amended chain survival n=10000," + detail + " (3 SE)"};
  }});

  out.push_back({9, 120.0, [=] {
    auto c = config(2.0, 0.0, seed, workers);
    c.t = 14.0;
    c.replicas = 100;
    const auto v = verify("growth", c);
    const auto& k = v.report["checks"];
    const double share = k["plateau_share"];
    const bool positive = k["scaled_positive_finite"];
    const auto medians = k["dyadic_zeta_median"].get<std::vector<double>>();
    bool decreasing = medians.size() >= 2;
    for (std::size_t i = 1; i < medians.size(); ++i) {
      decreasing = decreasing && medians[i] < medians[i - 1];
    }
    std::string ms;
    for (std::size_t i = 0; i < std::min<std::size_t>(medians.size(), 6); ++i) {
      ms += (ms.empty() ? "" : ",") + fmt("%.3f", medians[i]);
    }
    const bool pass = positive && share >= kPlateauShareTol && decreasing &&
                      k["plateau_band"].get<double>() <= kPlateauBandTol;
    return Outcome{pass, "lambda=2 r=0 t_max=14 n=100: plateau share=" + fmt("%.2f", share) +
                             " (need " + fmt("%.2f", kPlateauShareTol) + ") positive=" +
                             (positive ? "yes" : "no") + " median |zeta(2n)-zeta(n)| " + ms +
                             (medians.size() > 6 ? ",..." : "") +
                             (decreasing ? " decreasing" : " not decreasing")};
  }});

  out.push_back({10, 120.0, [=] {
    const ModelParams params{1.5, 0.5};
    std::vector<double> obs;
    for (double t = 0.5; t <= 6.0; t += 0.5) obs.push_back(t);
    const auto a = simulate(params, 6.0, obs, seed);
    const auto b = simulate(params, 6.0, obs, seed);
    const bool runs_equal = same_events(a, b);

    auto c = config(0.5, 0.5, seed, 1);
    c.replicas = 2000;
    auto serial = verify("regen", c);
    c.workers = 4;
    auto pooled = verify("regen", c);
    const bool workers_equal = serial.report["checks"] == pooled.report["checks"];

    const auto cal = null_calibration(kNullResamples, kNullSampleSize, seed);
    const bool ks_ok = cal.ks_rejection >= kNullLow && cal.ks_rejection <= kNullHigh;
    const bool chi_ok = cal.chi2_rejection >= kNullLow && cal.chi2_rejection <= kNullHigh;
    return Outcome{runs_equal && workers_equal && ks_ok && chi_ok,
                   std::string("repeat runs ") + (runs_equal ? "identical" : "differ") +
                       ", workers 1 vs 4 " + (workers_equal ? "identical" : "differ") +
                       ", null rejection KS=" + fmt("%.3f", cal.ks_rejection) + " chi2=" +
                       fmt("%.3f", cal.chi2_rejection) + " (band [" + fmt("%.2f", kNullLow) +
                       ", " + fmt("%.2f", kNullHigh) + "])"};
  }});

  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"virevo acceptance run"};
  std::uint64_t seed = 1;
  unsigned workers = 1;
  std::vector<int> only;
  std::string report_path;
  app.add_option("--seed", seed, "master seed");
  app.add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--only", only, "criteria to run")->check(CLI::Range(1, 10));
  app.add_option("--report", report_path, "also write the criterion lines to this file");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  std::FILE* report = nullptr;
  if (!report_path.empty()) {
    report = std::fopen(report_path.c_str(), "w");
    if (report == nullptr) {
      std::fprintf(stderr, "cannot write %s\n", report_path.c_str());
      return 2;
    }
  }
  int unexpected = 0;
  for (const auto& c : criteria(seed, workers)) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    bool errored = false;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
      errored = true;
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = seconds < c.budget_seconds;
    const bool pass = o.pass && in_time;
    const bool known = !errored && kKnownDeviations.count(c.id) > 0;
    char head[64];
    std::snprintf(head, sizeof head, "criterion %2d: %s  ", c.id, pass ? "PASS" : "FAIL");
    const std::string line = head + o.detail + "; runtime " + fmt("%.1f", seconds) + " s (budget " +
                             fmt("%.0f", c.budget_seconds) + " s)" +
                             (!pass && known ? " [known deviation]" : "") + "\n";
    std::fputs(line.c_str(), stdout);
    std::fflush(stdout);
    if (report != nullptr) {
      std::fputs(line.c_str(), report);
      std::fflush(report);
    }
    if (!pass && !known) ++unexpected;
  }
  if (report != nullptr) std::fclose(report);
  return unexpected == 0 ? 0 : 1;
}
