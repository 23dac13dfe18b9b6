#pragma once

// Monte Carlo simulation of one two-stage trial.
//
// Patients are recruited in equal cohorts; all outcomes are observed
// immediately. After each adapting analysis the posteriors, Q-values, and
// allocation probabilities are recomputed for both stages and applied to
// the next cohort.

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "smartq/allocation.hpp"
#include "smartq/design.hpp"
#include "smartq/inference.hpp"
#include "smartq/rng.hpp"
#include "smartq/types.hpp"

namespace smartq {

struct InterimSchedule {
  int cohort_size = 500;
  int num_analyses = 4;
  std::vector<int> adapt_at{1, 2, 3};

  static InterimSchedule from_design(const DesignConfig& design);
  bool adapts_after(int analysis) const;
};

struct AllocationSnapshot {
  int analysis = 0;  // allocation in force after this analysis
  AllocationProbs stage1;
  std::vector<AllocationProbs> stage2;  // one per stage-2 history
};

struct TrialResult {
  double mean_utility = 0.0;  // u-bar: total utility / max_patients
  std::vector<AllocationSnapshot> snapshots;
  std::optional<std::vector<PatientRecord>> records;
  std::uint64_t seed = 0;
  int infected = 0;
  std::vector<std::string> warnings;
};

// Mutable state threaded through a trial run.
struct TrialState {
  explicit TrialState(const DesignConfig& design);

  StageData stage1;
  StageData stage2;
  std::vector<PatientRecord> records;
  AllocationProbs alloc_stage1;
  std::vector<AllocationProbs> alloc_stage2;
  Rng rng;
  double utility_sum = 0.0;
  int enrolled = 0;
  int infected = 0;
};

struct RunOptions {
  bool keep_records = false;
};

Action draw_action(const AllocationProbs& alloc, Rng& rng) noexcept;

// Draws y1 ~ Bernoulli(r_{a1}); if infected asks choose_a2 for the stage-2
// action given the full history (a1, y1 = 1) and draws y2 ~ Bernoulli(s_{a1}).
// Death depends on a1 only.
template <class StageTwoChooser>
PatientRecord generate_patient(const Scenario& scenario, Action a1, StageTwoChooser&& choose_a2,
                               const UtilityTable& utilities, Rng& rng) {
  PatientRecord rec;
  rec.a1 = a1;
  rec.y1 = bernoulli(rng, scenario.infection_prob(a1)) ? Outcome::Event : Outcome::None;
  if (rec.y1 == Outcome::Event) {
    const Action a2 = choose_a2(History::after_stage_one(a1, Outcome::Event, false));
    rec.a2 = a2;
    rec.y2 = bernoulli(rng, scenario.death_prob(a1)) ? Outcome::Event : Outcome::None;
  }
  rec.utility = utility_lookup(utilities, rec);
  return rec;
}

// Expected participant utility of a1 under the 0/1 utility table:
// (1 - r) + r (1 - s).
double true_value(const Scenario& scenario, Action a1) noexcept;

// Deterministic in (scenario, design); design.seed drives all randomness.
// Throws std::invalid_argument / ConfigError for invalid inputs.
TrialResult run_trial(const Scenario& scenario, const DesignConfig& design,
                      const RunOptions& options = {});

}  // namespace smartq
