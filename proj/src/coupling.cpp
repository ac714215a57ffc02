#include "virevo/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <sstream>

namespace virevo {

OrderedFitnessSet::OrderedFitnessSet(std::vector<double> values) : v_(std::move(values)) {
  std::sort(v_.begin(), v_.end());
  for (std::size_t i = 0; i < v_.size(); ++i) {
    if (!(v_[i] > 0.0 && v_[i] < 1.0)) throw UsageError("fitness values must lie in (0,1)");
    if (i > 0 && v_[i] == v_[i - 1]) throw UsageError("fitness values must be distinct");
  }
}

bool OrderedFitnessSet::contains(double w) const {
  return std::binary_search(v_.begin(), v_.end(), w);
}

std::size_t OrderedFitnessSet::insert(double w) {
  const auto it = std::lower_bound(v_.begin(), v_.end(), w);
  if (it != v_.end() && *it == w) throw UsageError("value already present");
  const auto index = static_cast<std::size_t>(it - v_.begin());
  v_.insert(it, w);
  return index;
}

double OrderedFitnessSet::erase_largest(std::size_t j) {
  if (j < 1 || j > v_.size()) throw UsageError("rank out of range");
  const auto it = v_.end() - static_cast<std::ptrdiff_t>(j);
  const double w = *it;
  v_.erase(it);
  return w;
}

double OrderedFitnessSet::erase_min() {
  if (v_.empty()) throw UsageError("empty set");
  const double w = v_.front();
  v_.erase(v_.begin());
  return w;
}

bool precedes(const OrderedFitnessSet& a, const OrderedFitnessSet& b) {
  if (a.size() != b.size()) throw UsageError("precedes needs sets of equal size");
  const auto& x = a.values();
  const auto& y = b.values();
  bool ok = true;
  for (std::size_t i = 0; i < x.size(); ++i) ok &= x[i] <= y[i];
  return ok;
}

bool precedes_between(const OrderedFitnessSet& a, const OrderedFitnessSet& b, std::size_t lo,
                      std::size_t hi) {
  if (a.size() != b.size()) throw UsageError("precedes needs sets of equal size");
  if (hi > a.size() || lo > hi) throw UsageError("index range out of bounds");
  const auto& x = a.values();
  const auto& y = b.values();
  bool ok = true;
  for (std::size_t i = lo; i < hi; ++i) ok &= x[i] <= y[i];
  return ok;
}

namespace {

std::string dump(const OrderedFitnessSet& s) {
  std::ostringstream os;
  os.precision(17);
  os << '{';
  const auto& v = s.values();
  const std::size_t shown = std::min<std::size_t>(v.size(), 16);
  for (std::size_t i = 0; i < shown; ++i) os << (i ? ", " : "") << v[i];
  if (shown < v.size()) os << ", ... (" << v.size() << " elements)";
  os << '}';
  return os.str();
}

void require_order(const OrderedFitnessSet& a, const OrderedFitnessSet& b, const char* where) {
  if (!precedes(a, b)) {
    throw CouplingViolation(std::string(where) + ": A ⪯ B fails, A = " + dump(a) +
                            ", B = " + dump(b));
  }
}

}  // namespace

std::pair<OrderedFitnessSet, OrderedFitnessSet> insert_common(OrderedFitnessSet a,
                                                              OrderedFitnessSet b, double w) {
  if (!precedes(a, b)) throw UsageError("insert_common needs A ⪯ B");
  if (a.contains(w) || b.contains(w)) throw UsageError("inserted value already present");
  a.insert(w);
  b.insert(w);
  require_order(a, b, "insert_common");
  return {std::move(a), std::move(b)};
}

std::pair<OrderedFitnessSet, OrderedFitnessSet> delete_coupled(OrderedFitnessSet a,
                                                               OrderedFitnessSet b,
                                                               DeleteRule rule) {
  if (a.size() != b.size()) throw UsageError("delete_coupled needs sets of equal size");
  if (a.size() < 2) throw UsageError("no deletion below two elements");
  if (rule.j < 1 || rule.j > a.size()) throw UsageError("rank out of range");
  if (!precedes(a, b)) throw UsageError("delete_coupled needs A ⪯ B");
  a.erase_largest(rule.j);
  if (rule.kind == DeleteRule::Kind::RandomRank) {
    b.erase_largest(rule.j);
  } else {
    b.erase_min();
  }
  require_order(a, b, "delete_coupled");
  return {std::move(a), std::move(b)};
}

SharedDriver make_shared_driver(const ModelParams& params, double t_max, std::uint64_t seed,
                                std::uint64_t replica) {
  params.validate();
  if (!(t_max > 0.0)) throw UsageError("t_max must be positive");
  Stream holding(seed, "couple-holding", replica);
  Stream choice(seed, "couple-choice", replica);
  Stream fitness(seed, "couple-fitness", replica);
  Stream coin(seed, "couple-coin", replica);
  Stream rank(seed, "couple-rank", replica);

  SharedDriver d;
  d.initial_fitness = fitness.uniform_open();
  double t = 0.0;
  std::uint64_t n = 1;
  for (;;) {
    t += holding.exponential(total_rate(n, params));
    if (t > t_max) break;
    DriverEvent e;
    e.time = t;
    e.count_before = n;
    e.birth = n == 1 || choice.bernoulli(params.lambda / (params.lambda + 1.0));
    if (e.birth) {
      e.v = fitness.uniform_open();
      ++n;
    } else {
      e.eps = coin.bernoulli(params.r);
      e.rank = static_cast<std::size_t>(rank.below(n)) + 1;
      --n;
    }
    d.events.push_back(e);
  }
  return d;
}

CoupledResult replay_coupled(const SharedDriver& driver, const CoupledOptions& options) {
  OrderedFitnessSet f1({driver.initial_fitness});
  OrderedFitnessSet fr({driver.initial_fitness});
  CoupledResult out;
  out.dominance_gap_min = 0.0;
  auto record = [&](double time) {
    if (options.record_trace) out.trace.push_back({time, f1.size(), f1.max(), fr.max()});
  };
  record(0.0);
  // While F1 ⪯ Fr holds, an update can only break it at indices whose
  // pairing changed: those between the positions touched in the two sets.
  bool ordered = true;
  for (const auto& e : driver.events) {
    std::size_t lo = 0, hi = 0;
    if (e.birth) {
      // Fresh uniforms are distinct from every living value with
      // probability one; a collision would be a stream defect.
      if (f1.contains(e.v) || fr.contains(e.v)) throw std::logic_error("repeated fitness draw");
      const std::size_t i1 = f1.insert(e.v);
      const std::size_t ir = fr.insert(e.v);
      lo = std::min(i1, ir);
      hi = std::max(i1, ir) + 1;
    } else {
      const std::size_t i1 = f1.size() - e.rank;
      f1.erase_largest(e.rank);
      std::size_t ir = 0;
      if (e.eps || options.force_eps_one) {
        ir = fr.size() - e.rank;
        fr.erase_largest(e.rank);
      } else {
        fr.erase_min();
      }
      lo = std::min(i1, ir);
      hi = std::max(i1, ir);
    }
    ++out.events;
    ordered = ordered ? precedes_between(f1, fr, lo, hi) : precedes(f1, fr);
    if (!ordered) {
      ++out.violations;
      if (options.abort_on_violation) {
        std::ostringstream os;
        os << "coupling order violated at t = " << e.time << " after event " << out.events
           << ": F1 = " << dump(f1) << ", Fr = " << dump(fr);
        throw CouplingViolation(os.str());
      }
    }
    out.identical = out.identical && f1 == fr;
    out.dominance_gap_min = std::min(out.dominance_gap_min, fr.max() - f1.max());
    record(e.time);
  }
  out.max_f1 = f1.max();
  out.max_fr = fr.max();
  return out;
}

CoupledResult coupled_simulate(const ModelParams& params, double t_max, std::uint64_t seed,
                               std::uint64_t replica, const CoupledOptions& options) {
  return replay_coupled(make_shared_driver(params, t_max, seed, replica), options);
}

namespace {

void for_each_subset(std::size_t grid, std::size_t k, std::vector<double>& cur, std::size_t from,
                     const std::function<void(const std::vector<double>&)>& fn) {
  if (cur.size() == k) {
    fn(cur);
    return;
  }
  for (std::size_t i = from; i <= grid; ++i) {
    cur.push_back(static_cast<double>(i) / static_cast<double>(grid + 1));
    for_each_subset(grid, k, cur, i + 1, fn);
    cur.pop_back();
  }
}

void check_instance(const OrderedFitnessSet& a, const OrderedFitnessSet& b, double w,
                    LemmaEnumeration& out) {
  if (a.contains(w) || b.contains(w)) return;
  ++out.insert_cases;
  OrderedFitnessSet a2 = a, b2 = b;
  a2.insert(w);
  b2.insert(w);
  if (!precedes(a2, b2)) ++out.violations;
}

void check_deletions(const OrderedFitnessSet& a, const OrderedFitnessSet& b,
                     LemmaEnumeration& out) {
  if (a.size() < 2) return;
  for (std::size_t j = 1; j <= a.size(); ++j) {
    for (auto kind : {DeleteRule::Kind::RandomRank, DeleteRule::Kind::MinVsRank}) {
      ++out.delete_cases;
      OrderedFitnessSet a2 = a, b2 = b;
      a2.erase_largest(j);
      if (kind == DeleteRule::Kind::RandomRank) {
        b2.erase_largest(j);
      } else {
        b2.erase_min();
      }
      if (!precedes(a2, b2)) ++out.violations;
    }
  }
}

}  // namespace

LemmaEnumeration enumerate_lemma(std::size_t max_k, std::size_t grid) {
  if (max_k == 0 || grid < max_k) throw UsageError("grid must hold at least max_k points");
  LemmaEnumeration out;
  out.grid = grid;
  out.max_k = max_k;
  for (std::size_t k = 1; k <= max_k; ++k) {
    std::vector<std::vector<double>> subsets;
    std::vector<double> cur;
    for_each_subset(grid, k, cur, 1, [&](const std::vector<double>& s) { subsets.push_back(s); });
    for (const auto& sa : subsets) {
      const OrderedFitnessSet a(sa);
      for (const auto& sb : subsets) {
        const OrderedFitnessSet b(sb);
        if (!precedes(a, b)) continue;
        for (std::size_t i = 1; i <= grid; ++i) {
          check_instance(a, b, static_cast<double>(i) / static_cast<double>(grid + 1), out);
        }
        check_deletions(a, b, out);
      }
    }
  }
  return out;
}

LemmaEnumeration randomized_lemma(std::size_t instances, std::size_t max_k, std::uint64_t seed) {
  if (max_k == 0) throw UsageError("max_k must be positive");
  LemmaEnumeration out;
  out.max_k = max_k;
  Stream rng(seed, "lemma", 0);
  for (std::size_t n = 0; n < instances; ++n) {
    const std::size_t k = 1 + static_cast<std::size_t>(rng.below(max_k));
    // B is A with every element pushed up by a random amount, then
    // resorted; componentwise domination survives sorting.
    std::vector<double> va(k), vb(k);
    for (std::size_t i = 0; i < k; ++i) {
      va[i] = rng.uniform_open();
      vb[i] = va[i] + (1.0 - va[i]) * (rng.bernoulli(0.2) ? 0.0 : rng.uniform_open());
    }
    std::vector<double> sa = va, sb = vb;
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    if (std::adjacent_find(sa.begin(), sa.end()) != sa.end() ||
        std::adjacent_find(sb.begin(), sb.end()) != sb.end() || sb.back() >= 1.0) {
      continue;
    }
    const OrderedFitnessSet a(sa), b(sb);
    if (!precedes(a, b)) throw std::logic_error("generator produced A not preceding B");
    check_instance(a, b, rng.uniform_open(), out);
    check_deletions(a, b, out);
  }
  return out;
}

ConditionalLawReport conditional_max_law(std::span<const std::uint64_t> population,
                                         std::span<const double> phi, std::size_t min_bin) {
  if (population.size() != phi.size()) throw UsageError("population and phi differ in length");
  std::map<std::uint64_t, std::vector<double>> bins;
  for (std::size_t i = 0; i < phi.size(); ++i) bins[population[i]].push_back(phi[i]);
  ConditionalLawReport out;
  out.min_bin = min_bin;
  for (auto& [k, samples] : bins) {
    if (samples.size() < min_bin || samples.size() < kKsMinSamples) {
      out.skipped.emplace_back(k, samples.size());
      continue;
    }
    const std::size_t n = samples.size();
    ConditionalBin bin{k, n, ks_statistic(EmpiricalDistribution(std::move(samples)),
                                          power_law(static_cast<unsigned>(k)))};
    out.pass = out.pass && bin.report.pass;
    out.tested.push_back(std::move(bin));
  }
  return out;
}

void to_json(nlohmann::json& j, const ConditionalLawReport& r) {
  j = nlohmann::json::object();
  j["min_bin"] = r.min_bin;
  j["pass"] = r.pass;
  auto& tested = j["tested"] = nlohmann::json::array();
  for (const auto& b : r.tested) tested.push_back({{"k", b.k}, {"n", b.n}, {"ks", b.report}});
  auto& skipped = j["skipped"] = nlohmann::json::array();
  for (const auto& [k, n] : r.skipped) skipped.push_back({{"k", k}, {"n", n}});
}

}  // namespace virevo
