#pragma once

// Scenario x design x replicate sweeps and the relative-utility layout.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "smartq/design.hpp"
#include "smartq/grid.hpp"
#include "smartq/types.hpp"

namespace smartq {

struct SweepConfig {
  std::vector<Scenario> scenarios = scenario_grid();
  std::vector<DesignConfig> designs;  // empty means the four standard designs
  int replicates = 10;
  std::uint64_t base_seed = 0;
  unsigned threads = 0;  // 0 = hardware concurrency
  // Designs that differ only in c share random-number streams, so fixed and
  // adaptive runs of the same (scenario, m, replicate) see the same patients
  // for as long as their allocations agree.
  bool common_random_numbers = true;
  // Called from worker threads after each finished scenario.
  std::function<void(std::size_t done, std::size_t total)> progress;
};

// Per-trial seed. With common random numbers the design enters only
// through its myopic flag.
std::uint64_t trial_seed(std::uint64_t base_seed, std::size_t scenario_index,
                         std::size_t design_index, const DesignConfig& design, int replicate,
                         bool common_random_numbers) noexcept;

struct AggregateRow {
  Scenario scenario;
  bool myopic = false;
  double adapt_exponent = 0.0;
  double u_bar_bar = 0.0;
  double std_err = 0.0;
};

struct SweepRow {
  Scenario scenario;
  std::size_t scenario_index = 0;
  std::size_t design_index = 0;
  bool myopic = false;
  double adapt_exponent = 0.0;
  std::vector<double> replicate_u;
  double u_bar_bar = 0.0;
  double std_err = 0.0;  // sample sd / sqrt(replicates); 0 for one replicate
  std::size_t warnings = 0;

  AggregateRow aggregate() const {
    return {scenario, myopic, adapt_exponent, u_bar_bar, std_err};
  }
};

// Adaptive u-bar-bar divided by the fixed (c = 0) u-bar-bar of the same
// scenario and m. A non-positive fixed value is flagged and rel is NaN.
struct RelativeRow {
  Scenario scenario;
  bool myopic = false;
  double adapt_exponent = 1.0;
  double rel = 0.0;
  bool flagged = false;
};

struct SweepResult {
  std::vector<SweepRow> rows;  // scenario-major, then design order
  std::vector<RelativeRow> relative;
  std::vector<std::string> warnings;

  std::vector<AggregateRow> aggregates() const;
};

struct TrialFailure {
  std::size_t scenario_index = 0;
  Scenario scenario;
  std::size_t design_index = 0;
  std::string design_label;
  int replicate = 0;
  std::string message;
};

class SweepFailure : public std::runtime_error {
 public:
  explicit SweepFailure(std::vector<TrialFailure> failures);
  const std::vector<TrialFailure>& failures() const noexcept { return failures_; }

 private:
  std::vector<TrialFailure> failures_;
};

// Runs every (scenario, design, replicate) trial. Results do not depend on
// the thread count. Throws SweepFailure listing each failed trial.
SweepResult run_sweep(const SweepConfig& config);

// Pairs each adaptive (c > 0) row with the fixed row of the same scenario
// and m, in input order of the adaptive rows.
std::vector<RelativeRow> relative_utilities(std::span<const AggregateRow> rows);

// Scenarios at the given m lacking a fixed or a c = 1 row.
std::vector<Scenario> missing_design_cells(std::span<const AggregateRow> rows, bool myopic);

// One (s0, s1) panel: values[i][j] is rel at r1 = r_axis[i], r0 = r_axis[j].
struct FigurePanel {
  double s0 = 0.0;
  double s1 = 0.0;
  std::vector<double> r_axis;
  std::vector<std::vector<double>> values;
};

struct FigureBundle {
  bool myopic = false;
  std::vector<FigurePanel> panels;  // s0 outer, s1 inner
};

class IncompleteGridError : public std::runtime_error {
 public:
  explicit IncompleteGridError(std::vector<Scenario> missing);
  const std::vector<Scenario>& missing() const noexcept { return missing_; }

 private:
  std::vector<Scenario> missing_;
};

// Arranges c = 1 relative utilities into |S|^2 panels of |R| x |R|.
// Throws IncompleteGridError naming every grid cell without a value.
FigureBundle figure_matrix(std::span<const RelativeRow> relative, bool myopic,
                           const GridAxes& axes = GridAxes::full());
FigureBundle figure_matrix(const SweepResult& result, bool myopic,
                           const GridAxes& axes = GridAxes::full());

}  // namespace smartq
