#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "virevo/engine.hpp"
#include "virevo/stats.hpp"

namespace virevo {

enum class ExcursionOutcome : std::uint8_t {
  Up,                        // a birth ends the first level-2 sojourn
  DownLeastFit,              // least-fit killing returns the chain to 1
  DownRandomKillsIncumbent,  // random killing of the pre-excursion survivor
  DownRandomKillsNewcomer,   // random killing of the type born at level 1
};

const char* to_string(ExcursionOutcome outcome) noexcept;

/// One excursion away from population 1: the level-1 sojourn ξ, the type
/// u created when it ends, and the first level-2 sojourn η.
struct ExcursionRecord {
  std::uint64_t n = 0;            // 1-based
  double return_time_prev = 0.0;  // ReturnTime_{n-1} (0 for the first)
  double xi = 0.0;
  double newcomer_fitness = 0.0;
  std::uint64_t newcomer_id = 0;
  double incumbent_fitness = 0.0;
  std::uint64_t incumbent_id = 0;
  double eta = 0.0;
  ExcursionOutcome outcome = ExcursionOutcome::Up;
  bool epsilon = false;
  // ReturnTime_n, once the chain is back at 1.
  std::optional<double> return_time;
};

struct RegenRecord {
  std::uint64_t n = 0;
  double time = 0.0;  // R_n
  double phi = 0.0;   // fitness of the sole survivor
  double age = 0.0;   // its age, equal to the excursion's η
};

struct ExcursionScan {
  std::vector<ExcursionRecord> excursions;
  // Trailing excursion cut by the end of the log before its first
  // level-2 sojourn ended (0 or 1).
  std::size_t censored = 0;
};

/// Incremental excursion classifier over an event log that starts with a
/// single type. Tracks the living types by id so that the survivor of each
/// return to 1 is known.
class ExcursionDetector {
 public:
  explicit ExcursionDetector(const TypeRecord& initial);

  /// Feeds one event. Returns the index into excursions() of an excursion
  /// that was completed (returned to 1) by this event, if any.
  std::optional<std::size_t> on_event(const EventRecord& e);

  /// All records so far; while the first level-2 sojourn is running the
  /// last one still lacks η and its outcome.
  const std::vector<ExcursionRecord>& excursions() const noexcept { return excursions_; }
  std::uint64_t population() const noexcept { return alive_.size(); }
  /// Number of excursions still unresolved at the current point of the
  /// log (0 or 1).
  std::size_t censored() const noexcept;
  ExcursionScan scan() const;

 private:
  enum class Phase { AtOne, AtTwo, Higher };

  std::unordered_map<std::uint64_t, double> alive_;
  Phase phase_ = Phase::AtOne;
  double phase_start_ = 0.0;
  double last_return_ = 0.0;
  double pending_xi_ = 0.0;
  std::uint64_t incumbent_id_ = 0;
  double incumbent_fitness_ = 0.0;
  std::vector<ExcursionRecord> excursions_;
};

/// One record per excursion whose first level-2 sojourn ended inside the
/// log; a trailing excursion cut before that point is only counted.
ExcursionScan detect_excursions(const TypeRecord& initial, std::span<const EventRecord> events);

/// R_n is the return time ending the n-th excursion with ε = 1; the sole
/// survivor there is that excursion's newcomer, aged η.
std::vector<RegenRecord> detect_regenerations(std::span<const ExcursionRecord> excursions);

/// Checks regeneration records against the event log: population is 1 at
/// every R_n and R_n is strictly increasing. Returns the number of
/// violations.
std::size_t count_regeneration_violations(const TypeRecord& initial,
                                          std::span<const EventRecord> events,
                                          std::span<const RegenRecord> regenerations);

/// P(ε_n = 1) = r / (2(1+λ)).
double bernoulli_p(const ModelParams& params);

struct R1Estimate {
  std::vector<double> samples;  // uncensored R_1 values, replica order
  std::size_t replicas = 0;
  std::size_t censored = 0;
  double mu_hat = 0.0;
  double standard_error = 0.0;
  bool censoring_warning = false;  // censored fraction above 1e-3

  double censored_fraction() const {
    return replicas == 0 ? 0.0 : static_cast<double>(censored) / static_cast<double>(replicas);
  }
};

inline constexpr double kCensoringWarnFraction = 1e-3;

/// Default censoring horizon 50/(1−λ).
double default_t_censor(const ModelParams& params);

/// Time of the first regeneration of one trajectory, or nullopt if none
/// occurs by t_censor.
std::optional<RegenRecord> first_regeneration(const ModelParams& params, double t_censor,
                                              std::uint64_t seed, std::uint64_t replica,
                                              const InitialCondition& init = {});

R1Estimate estimate_R1(const ModelParams& params, std::size_t n_replicas, double t_censor,
                       std::uint64_t seed, unsigned workers = 1);

}  // namespace virevo
