#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "smartq/design.hpp"
#include "smartq/simulator.hpp"

namespace smartq {
namespace {

const Scenario kProse{0.1, 0.3, 0.45, 0.5};

DesignConfig design(bool myopic, double c, std::uint64_t seed) {
  DesignConfig d = DesignConfig::table_cell(myopic, c);
  d.seed = seed;
  return d;
}

auto always(Action a) {
  return [a](const History&) { return a; };
}

TEST(GeneratePatient, NeverInfected) {
  Rng rng(1);
  const auto t = UtilityTable::defaults();
  for (int i = 0; i < 1000; ++i) {
    const auto r = generate_patient(Scenario{0, 0.5, 0.5, 0.5}, Action::Control, always(Action::Active), t, rng);
    ASSERT_EQ(r.y1, Outcome::None);
    ASSERT_FALSE(r.a2);
    ASSERT_EQ(r.utility, 1.0);
  }
}

TEST(GeneratePatient, AlwaysInfectedAndDies) {
  Rng rng(2);
  const auto t = UtilityTable::defaults();
  for (int i = 0; i < 1000; ++i) {
    const auto r = generate_patient(Scenario{0.2, 1, 0.5, 1}, Action::Active, always(Action::Control), t, rng);
    ASSERT_EQ(r.y1, Outcome::Event);
    ASSERT_EQ(r.a2, Action::Control);
    ASSERT_EQ(r.y2, Outcome::Event);
    ASSERT_EQ(r.utility, 0.0);
  }
}

TEST(GeneratePatient, EmpiricalRates) {
  Rng rng(3);
  const auto t = UtilityTable::defaults();
  int infected = 0, died = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const auto r = generate_patient(kProse, Action::Control, always(Action::Active), t, rng);
    ASSERT_TRUE(r.well_formed());
    if (r.reached_stage_two()) {
      ++infected;
      if (*r.y2 == Outcome::Event) ++died;
    }
  }
  EXPECT_NEAR(infected / double(n), 0.1, 0.005);
  EXPECT_NEAR(died / double(infected), 0.45, 0.02);
}

TEST(GeneratePatient, ChooserSeesFullStageOneHistory) {
  Rng rng(4);
  History seen;
  generate_patient(Scenario{1, 1, 0, 0}, Action::Active,
                   [&](const History& h) {
                     seen = h;
                     return Action::Control;
                   },
                   UtilityTable::defaults(), rng);
  EXPECT_EQ(seen, History::after_stage_one(Action::Active, Outcome::Event, false));
}

TEST(TrueValue, Examples) {
  EXPECT_NEAR(true_value(kProse, Action::Control), 0.955, 1e-15);
  EXPECT_NEAR(true_value(kProse, Action::Active), 0.85, 1e-15);
  EXPECT_EQ(true_value(Scenario{0, 0, 0.7, 0.3}, Action::Active), 1.0);
}

TEST(InterimSchedule, Defaults) {
  const auto s = InterimSchedule::from_design(DesignConfig{});
  EXPECT_EQ(s.cohort_size, 500);
  EXPECT_EQ(s.num_analyses, 4);
  EXPECT_EQ(s.adapt_at, (std::vector<int>{1, 2, 3}));
  EXPECT_FALSE(s.adapts_after(4));
}

TEST(DesignConfig, Validation) {
  DesignConfig d;
  EXPECT_NO_THROW(d.validate());
  d.max_patients = 2001;
  EXPECT_THROW(d.validate(), ConfigError);
  d = {};
  d.adapt_exponent = -1;
  EXPECT_THROW(d.validate(), ConfigError);
  d = {};
  d.adapt_at = std::vector<int>{4};
  EXPECT_THROW(d.validate(), ConfigError);
  d = {};
  d.utilities = UtilityTable::empty();
  EXPECT_THROW(d.validate(), ConfigError);
  EXPECT_EQ(DesignConfig::table_cell(true, 1).label(), "m1c1");
  const auto std4 = standard_designs();
  EXPECT_EQ(std4[0].label(), "m0c0");
  EXPECT_EQ(std4[3].label(), "m1c1");
}

TEST(RunTrial, NoInfectionsGivesUnitUtility) {
  const auto r = run_trial(Scenario{0, 0, 0.5, 0.9}, design(false, 1, 5));
  EXPECT_EQ(r.mean_utility, 1.0);
  EXPECT_EQ(r.infected, 0);
}

TEST(RunTrial, FixedDesignMixesTrueValues) {
  const double oracle = 0.5 * (true_value(kProse, Action::Control) + true_value(kProse, Action::Active));
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    EXPECT_NEAR(run_trial(kProse, design(false, 0, seed)).mean_utility, oracle, 0.02);
  }
}

TEST(RunTrial, FixedDesignSnapshotsStayEqual) {
  const auto r = run_trial(kProse, design(false, 0, 1));
  ASSERT_EQ(r.snapshots.size(), 3u);
  for (const auto& s : r.snapshots) {
    EXPECT_EQ(s.stage1.probs, (std::array<double, 2>{0.5, 0.5}));
    for (const auto& a : s.stage2) EXPECT_EQ(a.probs, (std::array<double, 2>{0.5, 0.5}));
  }
}

TEST(RunTrial, RecordsAndSnapshotsAreConsistent) {
  const auto r = run_trial(kProse, design(false, 1, 2), RunOptions{true});
  ASSERT_TRUE(r.records);
  ASSERT_EQ(r.records->size(), 2000u);
  double sum = 0.0;
  int infected = 0;
  for (const auto& rec : *r.records) {
    ASSERT_TRUE(rec.well_formed());
    EXPECT_EQ(rec.utility, utility_lookup(UtilityTable::defaults(), rec));
    sum += rec.utility;
    infected += rec.reached_stage_two() ? 1 : 0;
  }
  EXPECT_EQ(r.mean_utility, sum / 2000.0);
  EXPECT_EQ(r.infected, infected);
  for (const auto& s : r.snapshots) {
    EXPECT_NEAR(s.stage1.probs[0] + s.stage1.probs[1], 1.0, 1e-12);
    ASSERT_EQ(s.stage2.size(), 2u);
    for (const auto& a : s.stage2) EXPECT_NEAR(a.probs[0] + a.probs[1], 1.0, 1e-12);
  }
}

TEST(RunTrial, Deterministic) {
  const auto a = run_trial(kProse, design(true, 1, 77), RunOptions{true});
  const auto b = run_trial(kProse, design(true, 1, 77), RunOptions{true});
  EXPECT_EQ(a.mean_utility, b.mean_utility);
  ASSERT_EQ(a.records->size(), b.records->size());
  for (std::size_t i = 0; i < a.records->size(); ++i) {
    EXPECT_EQ((*a.records)[i].a1, (*b.records)[i].a1);
    EXPECT_EQ((*a.records)[i].utility, (*b.records)[i].utility);
  }
  EXPECT_NE(a.mean_utility, run_trial(kProse, design(true, 1, 78)).mean_utility);
}

TEST(RunTrial, DynamicAdaptationAvoidsFatalRegimen) {
  const Scenario s{0.5, 0.5, 0.05, 0.95};
  double p0 = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto r = run_trial(s, design(false, 1, seed));
    EXPECT_GT(r.snapshots.back().stage1.probs[0], 0.5);
    p0 += r.snapshots.back().stage1.probs[0];
  }
  // At the true parameters Q1 = (0.975, 0.525): allocation 0.65 to a1 = 0.
  EXPECT_NEAR(p0 / 10, 0.975 / (0.975 + 0.525), 0.03);
}

TEST(RunTrial, MyopicStageOneStaysBalancedWhenInfectionRatesMatch) {
  const Scenario s{0.5, 0.5, 0.05, 0.95};
  double p0 = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    p0 += run_trial(s, design(true, 1, seed)).snapshots.back().stage1.probs[0];
  }
  EXPECT_NEAR(p0 / 10, 0.5, 0.03);
}

TEST(RunTrial, AdaptAtSubset) {
  DesignConfig d = design(false, 1, 3);
  d.adapt_at = std::vector<int>{2};
  const auto r = run_trial(kProse, d);
  ASSERT_EQ(r.snapshots.size(), 1u);
  EXPECT_EQ(r.snapshots.front().analysis, 2);
}

TEST(RunTrial, MinAllocationFloorHolds) {
  DesignConfig d = design(false, 1, 3);
  d.min_alloc_prob = 0.2;
  const auto r = run_trial(Scenario{0, 1, 0.05, 0.95}, d);
  for (const auto& s : r.snapshots) {
    EXPECT_GE(s.stage1.probs[1], 0.2 - 1e-15);
    EXPECT_LE(s.stage1.probs[0], 0.8 + 1e-15);
  }
}

TEST(RunTrial, McmcEngineRuns) {
  DesignConfig d = design(false, 1, 4);
  d.max_patients = 400;
  d.num_interims = 2;
  d.engine.engine = Engine::Mcmc;
  d.engine.mcmc.warmup = 200;
  d.engine.mcmc.sampling = 200;
  const auto r = run_trial(kProse, d);
  ASSERT_EQ(r.snapshots.size(), 1u);
  EXPECT_NEAR(r.snapshots[0].stage1.probs[0] + r.snapshots[0].stage1.probs[1], 1.0, 1e-12);
  const auto again = run_trial(kProse, d);
  EXPECT_EQ(r.mean_utility, again.mean_utility);
  EXPECT_EQ(r.snapshots[0].stage1.probs, again.snapshots[0].stage1.probs);
}

TEST(RunTrial, RejectsInvalidInputs) {
  EXPECT_THROW(run_trial(Scenario{1.5, 0, 0, 0}, DesignConfig{}), std::invalid_argument);
  DesignConfig d;
  d.num_interims = 0;
  EXPECT_THROW(run_trial(kProse, d), ConfigError);
}

}  // namespace
}  // namespace smartq
