#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "smartq/simulator.hpp"
#include "smartq/sweep.hpp"

namespace smartq {
namespace {

SweepConfig small_config(std::vector<Scenario> scenarios, int replicates = 3) {
  SweepConfig c;
  c.scenarios = std::move(scenarios);
  c.replicates = replicates;
  c.base_seed = 2024;
  c.threads = 1;
  return c;
}

double rel_of(const SweepResult& r, bool myopic) {
  for (const auto& row : r.relative) {
    if (row.myopic == myopic) return row.rel;
  }
  return NAN;
}

TEST(RunSweep, RowLayoutAndStatistics) {
  const auto result = run_sweep(small_config({{0.1, 0.3, 0.4, 0.6}, {0.5, 0.5, 0.2, 0.2}}));
  ASSERT_EQ(result.rows.size(), 8u);
  ASSERT_EQ(result.relative.size(), 4u);
  for (std::size_t i = 0; i < result.rows.size(); ++i) {
    const auto& row = result.rows[i];
    EXPECT_EQ(row.scenario_index, i / 4);
    EXPECT_EQ(row.design_index, i % 4);
    ASSERT_EQ(row.replicate_u.size(), 3u);
    const double mean = std::accumulate(row.replicate_u.begin(), row.replicate_u.end(), 0.0) / 3.0;
    EXPECT_NEAR(row.u_bar_bar, mean, 1e-15);
    double ss = 0;
    for (double u : row.replicate_u) ss += (u - mean) * (u - mean);
    EXPECT_NEAR(row.std_err, std::sqrt(ss / 2.0) / std::sqrt(3.0), 1e-15);
  }
}

TEST(RunSweep, ReplicateMatchesDirectTrial) {
  const Scenario s{0.2, 0.4, 0.4, 0.6};
  auto config = small_config({s}, 2);
  const auto result = run_sweep(config);
  const auto designs = standard_designs();
  for (std::size_t di = 0; di < 4; ++di) {
    DesignConfig d = designs[di];
    d.seed = trial_seed(config.base_seed, 0, di, d, 1, true);
    EXPECT_EQ(result.rows[di].replicate_u[1], run_trial(s, d).mean_utility);
  }
}

TEST(RunSweep, CommonRandomNumbersShareStreamsAcrossC) {
  const DesignConfig fixed = DesignConfig::table_cell(false, 0);
  const DesignConfig adaptive = DesignConfig::table_cell(false, 1);
  const DesignConfig myopic = DesignConfig::table_cell(true, 1);
  EXPECT_EQ(trial_seed(1, 2, 0, fixed, 3, true), trial_seed(1, 2, 2, adaptive, 3, true));
  EXPECT_NE(trial_seed(1, 2, 0, fixed, 3, true), trial_seed(1, 2, 3, myopic, 3, true));
  EXPECT_NE(trial_seed(1, 2, 0, fixed, 3, false), trial_seed(1, 2, 2, adaptive, 3, false));
}

TEST(RunSweep, ThreadCountDoesNotChangeResults) {
  auto config = small_config(scenario_grid(GridAxes{{0.2, 0.6}, {0.1, 0.9}}), 2);
  const auto one = run_sweep(config);
  config.threads = 4;
  const auto four = run_sweep(config);
  ASSERT_EQ(one.rows.size(), four.rows.size());
  for (std::size_t i = 0; i < one.rows.size(); ++i) {
    EXPECT_EQ(one.rows[i].replicate_u, four.rows[i].replicate_u);
  }
}

TEST(RunSweep, NullScenarioIsNeutral) {
  const auto result = run_sweep(small_config({{0.25, 0.25, 0.4, 0.4}}, 10));
  EXPECT_NEAR(rel_of(result, false), 1.0, 0.03);
  EXPECT_NEAR(rel_of(result, true), 1.0, 0.03);
}

TEST(RunSweep, MyopicHarmWhenProphylaxisCostsSurvival) {
  // Prophylaxis halves infection but infected prophylaxis patients mostly
  // die. Myopic Q1 = 1 - r favours prophylaxis, V(0) = 0.95 vs V(1) = 0.525.
  const auto result = run_sweep(small_config({{1.0, 0.5, 0.05, 0.95}}, 10));
  EXPECT_LT(rel_of(result, true), 0.97);
  EXPECT_GE(rel_of(result, false), 1.0);
}

TEST(RunSweep, ProgressReportsEveryScenario) {
  auto config = small_config({{0.1, 0.1, 0.1, 0.1}, {0.2, 0.2, 0.2, 0.2}}, 1);
  std::vector<std::size_t> seen;
  config.progress = [&](std::size_t done, std::size_t total) {
    EXPECT_EQ(total, 2u);
    seen.push_back(done);
  };
  run_sweep(config);
  EXPECT_EQ(seen, (std::vector<std::size_t>{1, 2}));
}

TEST(RunSweep, FailuresAreCollected) {
  auto config = small_config({{0.1, 0.1, 0.1, 0.1}}, 2);
  DesignConfig bad = DesignConfig::table_cell(false, 1);
  bad.max_patients = 999;
  config.designs = {DesignConfig::table_cell(false, 0), bad};
  try {
    run_sweep(config);
    FAIL() << "expected SweepFailure";
  } catch (const SweepFailure& e) {
    ASSERT_EQ(e.failures().size(), 1u);
    EXPECT_EQ(e.failures()[0].design_label, "m0c1");
  }
}

TEST(RunSweep, RejectsEmptyInputs) {
  EXPECT_THROW(run_sweep(small_config({}, 1)), std::invalid_argument);
  EXPECT_THROW(run_sweep(small_config({{0, 0, 0, 0}}, 0)), std::invalid_argument);
}

AggregateRow agg(Scenario s, bool m, double c, double u) { return {s, m, c, u, 0.0}; }

TEST(RelativeUtilities, PairsWithFixedBaseline) {
  const Scenario s{0.1, 0.2, 0.4, 0.6};
  const std::vector<AggregateRow> rows{agg(s, false, 0, 0.8), agg(s, true, 0, 0.5), agg(s, false, 1, 0.88),
                                       agg(s, true, 1, 0.45)};
  const auto rel = relative_utilities(rows);
  ASSERT_EQ(rel.size(), 2u);
  EXPECT_DOUBLE_EQ(rel[0].rel, 0.88 / 0.8);
  EXPECT_FALSE(rel[0].myopic);
  EXPECT_DOUBLE_EQ(rel[1].rel, 0.45 / 0.5);
}

TEST(RelativeUtilities, FlagsZeroBaseline) {
  const Scenario s{1, 1, 1, 1};
  const std::vector<AggregateRow> rows{agg(s, false, 0, 0.0), agg(s, false, 1, 0.0)};
  const auto rel = relative_utilities(rows);
  ASSERT_EQ(rel.size(), 1u);
  EXPECT_TRUE(rel[0].flagged);
  EXPECT_TRUE(std::isnan(rel[0].rel));
}

TEST(MissingDesignCells, ListsScenariosWithoutBaseline) {
  const Scenario a{0, 0, 0.05, 0.05}, b{0, 0.25, 0.05, 0.05};
  const std::vector<AggregateRow> rows{agg(a, false, 0, 1), agg(a, false, 1, 1), agg(b, false, 1, 1)};
  EXPECT_EQ(missing_design_cells(rows, false), (std::vector<Scenario>{b}));
  EXPECT_TRUE(missing_design_cells(rows, true).empty());
}

TEST(FigureMatrix, ReducedLayout) {
  const auto axes = GridAxes::reduced();
  std::vector<RelativeRow> rel;
  for (const auto& s : scenario_grid(axes)) rel.push_back({s, false, 1.0, s.r0 + 10 * s.r1, false});
  const auto bundle = figure_matrix(rel, false, axes);
  ASSERT_EQ(bundle.panels.size(), 16u);
  const auto& p = bundle.panels[3];
  EXPECT_EQ(p.s0, 0.05);
  EXPECT_EQ(p.s1, 0.95);
  ASSERT_EQ(p.values.size(), 5u);
  // Rows are r1, columns r0.
  EXPECT_DOUBLE_EQ(p.values[2][1], 0.25 + 10 * 0.5);
}

TEST(FigureMatrix, FullGridShapeAndMissingCells) {
  std::vector<RelativeRow> rel;
  for (const auto& s : scenario_grid()) rel.push_back({s, true, 1.0, 1.0, false});
  const auto bundle = figure_matrix(rel, true);
  ASSERT_EQ(bundle.panels.size(), 64u);
  for (const auto& p : bundle.panels) {
    ASSERT_EQ(p.values.size(), 21u);
    for (const auto& row : p.values) ASSERT_EQ(row.size(), 21u);
  }
  std::vector<RelativeRow> reduced;
  for (const auto& s : scenario_grid(GridAxes::reduced())) reduced.push_back({s, true, 1.0, 1.0, false});
  try {
    figure_matrix(reduced, true);
    FAIL();
  } catch (const IncompleteGridError& e) {
    EXPECT_EQ(e.missing().size(), 28224u - 400u);
  }
}

}  // namespace
}  // namespace smartq
