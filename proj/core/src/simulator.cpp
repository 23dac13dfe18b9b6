#include "smartq/simulator.hpp"

#include <algorithm>

#include "smartq/policy.hpp"

namespace smartq {

InterimSchedule InterimSchedule::from_design(const DesignConfig& design) {
  InterimSchedule s;
  s.num_analyses = design.num_interims;
  s.cohort_size = design.max_patients / design.num_interims;
  if (design.adapt_at) {
    s.adapt_at = *design.adapt_at;
    std::sort(s.adapt_at.begin(), s.adapt_at.end());
    s.adapt_at.erase(std::unique(s.adapt_at.begin(), s.adapt_at.end()), s.adapt_at.end());
  } else {
    s.adapt_at.clear();
    for (int k = 1; k < design.num_interims; ++k) s.adapt_at.push_back(k);
  }
  return s;
}

bool InterimSchedule::adapts_after(int analysis) const {
  return std::binary_search(adapt_at.begin(), adapt_at.end(), analysis);
}

TrialState::TrialState(const DesignConfig& design)
    : stage1(StageData::stage_one()),
      stage2(StageData::stage_two(design.myopic)),
      alloc_stage1(AllocationProbs::equal(History::initial())),
      rng(design.seed) {
  const CellLayout& layout = stage2.layout();
  for (std::size_t slot = 0; slot < layout.num_histories(); ++slot) {
    alloc_stage2.push_back(AllocationProbs::equal(layout.history(slot)));
  }
}

Action draw_action(const AllocationProbs& alloc, Rng& rng) noexcept {
  return bernoulli(rng, alloc.prob(Action::Active)) ? Action::Active : Action::Control;
}

double true_value(const Scenario& scenario, Action a1) noexcept {
  const double r = scenario.infection_prob(a1);
  const double s = scenario.death_prob(a1);
  return (1.0 - r) + r * (1.0 - s);
}

namespace {

void reallocate(TrialState& state, const DesignConfig& design, int analysis,
                TrialResult& result) {
  EngineSettings engine = design.engine;
  if (engine.engine == Engine::Mcmc) {
    engine.mcmc.seed = derive_seed(design.seed, {0x4D434D43ULL, static_cast<std::uint64_t>(analysis)});
  }
  StagePosteriors post1 = estimate_posteriors(state.stage1, design.prior, engine);
  if (engine.engine == Engine::Mcmc) engine.mcmc.seed = splitmix64(engine.mcmc.seed);
  StagePosteriors post2 = estimate_posteriors(state.stage2, design.prior, engine);
  for (auto* post : {&post1, &post2}) {
    for (const auto& w : post->warnings) {
      result.warnings.push_back("analysis " + std::to_string(analysis) + ": " + w);
    }
  }

  const PolicySnapshot policy = optimal_policy(post1, post2, design.utilities, design.myopic);
  const double c = design.adapt_exponent;
  state.alloc_stage1 =
      allocation_probs(History::initial(), policy.stage1_q.values, c, design.min_alloc_prob);
  const CellLayout& layout = policy.stage2_q.layout();
  for (std::size_t slot = 0; slot < layout.num_histories(); ++slot) {
    state.alloc_stage2[slot] = allocation_probs(layout.history(slot), policy.stage2_q.values(slot),
                                                c, design.min_alloc_prob);
  }
  result.snapshots.push_back({analysis, state.alloc_stage1, state.alloc_stage2});
}

}  // namespace

TrialResult run_trial(const Scenario& scenario, const DesignConfig& design,
                      const RunOptions& options) {
  scenario.validate();
  design.validate();
  const InterimSchedule schedule = InterimSchedule::from_design(design);

  TrialState state(design);
  TrialResult result;
  result.seed = design.seed;
  if (options.keep_records) state.records.reserve(static_cast<std::size_t>(design.max_patients));

  const CellLayout& layout2 = state.stage2.layout();
  auto choose_a2 = [&](const History& full) {
    const History h = History::after_stage_one(*full.stage1_action(), Outcome::Event, design.myopic);
    return draw_action(state.alloc_stage2[layout2.slot_of(h)], state.rng);
  };

  for (int analysis = 1; analysis <= schedule.num_analyses; ++analysis) {
    for (int i = 0; i < schedule.cohort_size; ++i) {
      const Action a1 = draw_action(state.alloc_stage1, state.rng);
      PatientRecord rec = generate_patient(scenario, a1, choose_a2, design.utilities, state.rng);
      state.stage1.record(History::initial(), rec.a1, rec.y1);
      if (rec.reached_stage_two()) {
        state.stage2.record(History::after_stage_one(rec.a1, rec.y1, design.myopic), *rec.a2, *rec.y2);
        ++state.infected;
      }
      state.utility_sum += rec.utility;
      ++state.enrolled;
      if (options.keep_records) state.records.push_back(rec);
    }
    if (schedule.adapts_after(analysis)) reallocate(state, design, analysis, result);
  }

  result.mean_utility = state.utility_sum / static_cast<double>(design.max_patients);
  result.infected = state.infected;
  if (options.keep_records) result.records = std::move(state.records);
  return result;
}

}  // namespace smartq
