#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "virevo/engine.hpp"
#include "virevo/stats.hpp"

namespace virevo {

/// Strictly sorted fitness values in (0,1).
class OrderedFitnessSet {
 public:
  OrderedFitnessSet() = default;
  /// Sorts; throws UsageError on duplicates or values outside (0,1).
  explicit OrderedFitnessSet(std::vector<double> values);

  std::size_t size() const noexcept { return v_.size(); }
  bool empty() const noexcept { return v_.empty(); }
  const std::vector<double>& values() const noexcept { return v_; }
  double min() const { return v_.front(); }
  double max() const { return v_.back(); }
  bool contains(double w) const;

  /// Returns the index of w after insertion.
  std::size_t insert(double w);
  /// Removes the j-th largest element, 1 <= j <= size().
  double erase_largest(std::size_t j);
  double erase_min();

  bool operator==(const OrderedFitnessSet&) const = default;

 private:
  std::vector<double> v_;
};

/// A ⪯ B: the i-th smallest of A is at most the i-th smallest of B for
/// every i. Throws UsageError when the sizes differ.
bool precedes(const OrderedFitnessSet& a, const OrderedFitnessSet& b);

/// The same comparison restricted to indices in [lo, hi).
bool precedes_between(const OrderedFitnessSet& a, const OrderedFitnessSet& b, std::size_t lo,
                      std::size_t hi);

class CouplingViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Adds w to both sets. Requires A ⪯ B and w in neither set.
std::pair<OrderedFitnessSet, OrderedFitnessSet> insert_common(OrderedFitnessSet a,
                                                              OrderedFitnessSet b, double w);

struct DeleteRule {
  enum class Kind : std::uint8_t { RandomRank, MinVsRank };
  Kind kind = Kind::RandomRank;
  std::size_t j = 1;  // rank from the top, 1 = largest

  static DeleteRule random_rank(std::size_t j) { return {Kind::RandomRank, j}; }
  static DeleteRule min_vs_rank(std::size_t j) { return {Kind::MinVsRank, j}; }
};

/// RandomRank(j): the j-th largest leaves both sets.
/// MinVsRank(j): the j-th largest leaves A, the smallest leaves B.
/// Requires |A| = |B| >= 2 and A ⪯ B.
std::pair<OrderedFitnessSet, OrderedFitnessSet> delete_coupled(OrderedFitnessSet a,
                                                               OrderedFitnessSet b,
                                                               DeleteRule rule);

/// Randomness of one coupled replica: a single path of the population
/// count with a uniform for each birth, and a coin and a rank for each
/// death.
struct DriverEvent {
  double time = 0.0;
  bool birth = false;
  double v = 0.0;          // fitness of the new type (births)
  bool eps = false;        // random killing (deaths)
  std::size_t rank = 0;    // j-th largest, uniform on 1..k (deaths)
  std::uint64_t count_before = 0;
};

struct SharedDriver {
  double initial_fitness = 0.5;
  std::vector<DriverEvent> events;
};

SharedDriver make_shared_driver(const ModelParams& params, double t_max, std::uint64_t seed,
                                std::uint64_t replica);

struct CoupledOptions {
  bool force_eps_one = false;       // treat every death as a random killing
  bool abort_on_violation = true;   // throw CouplingViolation with a dump
  bool record_trace = false;
};

struct CoupledTracePoint {
  double time = 0.0;
  std::uint64_t population = 0;
  double max_f1 = 0.0;
  double max_fr = 0.0;
};

struct CoupledResult {
  std::uint64_t events = 0;
  std::uint64_t violations = 0;
  double max_f1 = 0.0;  // at t_max
  double max_fr = 0.0;
  bool identical = true;  // F^1 = F^r after every event
  double dominance_gap_min = 0.0;  // min over event times of max F^r − max F^1
  std::vector<CoupledTracePoint> trace;
};

/// Replays one driver through F^1 (always the j-th largest dies) and F^r
/// (the j-th largest if the coin says random killing, else the least
/// fit), checking F^1 ⪯ F^r after every event.
CoupledResult replay_coupled(const SharedDriver& driver, const CoupledOptions& options = {});

CoupledResult coupled_simulate(const ModelParams& params, double t_max, std::uint64_t seed,
                               std::uint64_t replica = 0, const CoupledOptions& options = {});

struct LemmaEnumeration {
  std::size_t grid = 0;
  std::size_t max_k = 0;
  std::uint64_t insert_cases = 0;
  std::uint64_t delete_cases = 0;
  std::uint64_t violations = 0;
};

/// Every A ⪯ B of size k <= max_k with elements in {1..grid}/(grid+1),
/// with every admissible common insertion and every deletion rule.
LemmaEnumeration enumerate_lemma(std::size_t max_k, std::size_t grid);

/// Random instances with A ⪯ B of size up to max_k.
LemmaEnumeration randomized_lemma(std::size_t instances, std::size_t max_k, std::uint64_t seed);

struct ConditionalBin {
  std::uint64_t k = 0;
  std::size_t n = 0;
  GoFReport report;
};

struct ConditionalLawReport {
  std::vector<ConditionalBin> tested;
  std::vector<std::pair<std::uint64_t, std::size_t>> skipped;  // (k, n)
  std::size_t min_bin = 200;
  bool pass = true;  // every tested bin passes
};

inline constexpr std::size_t kConditionalMinBin = 200;

/// Per population size k, KS of the φ samples against u ↦ u^k.
ConditionalLawReport conditional_max_law(std::span<const std::uint64_t> population,
                                         std::span<const double> phi,
                                         std::size_t min_bin = kConditionalMinBin);

void to_json(nlohmann::json& j, const ConditionalLawReport& r);

}  // namespace virevo
