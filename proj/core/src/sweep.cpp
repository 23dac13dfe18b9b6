#include "smartq/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <thread>
#include <tuple>

#include "smartq/rng.hpp"
#include "smartq/simulator.hpp"

namespace smartq {

namespace {

using ScenarioKey = std::tuple<double, double, double, double>;

ScenarioKey key_of(const Scenario& s) { return {s.r0, s.r1, s.s0, s.s1}; }

std::string summarize(const std::vector<TrialFailure>& failures) {
  std::string msg = std::to_string(failures.size()) + " trial(s) failed";
  if (!failures.empty()) {
    const auto& f = failures.front();
    msg += "; first: scenario " + std::to_string(f.scenario_index) + " " + f.scenario.label() +
           ", design " + f.design_label + ", replicate " + std::to_string(f.replicate) + ": " +
           f.message;
  }
  return msg;
}

std::string summarize(const std::vector<Scenario>& missing) {
  std::string msg = std::to_string(missing.size()) + " grid cell(s) have no relative utility:";
  const std::size_t shown = std::min<std::size_t>(missing.size(), 10);
  for (std::size_t i = 0; i < shown; ++i) msg += " " + missing[i].label();
  if (shown < missing.size()) msg += " ...";
  return msg;
}

void finish_row(SweepRow& row) {
  const double n = static_cast<double>(row.replicate_u.size());
  row.u_bar_bar = std::accumulate(row.replicate_u.begin(), row.replicate_u.end(), 0.0) / n;
  if (row.replicate_u.size() < 2) {
    row.std_err = 0.0;
    return;
  }
  double ss = 0.0;
  for (double u : row.replicate_u) ss += (u - row.u_bar_bar) * (u - row.u_bar_bar);
  row.std_err = std::sqrt(ss / (n - 1.0) / n);
}

}  // namespace

SweepFailure::SweepFailure(std::vector<TrialFailure> failures)
    : std::runtime_error(summarize(failures)), failures_(std::move(failures)) {}

IncompleteGridError::IncompleteGridError(std::vector<Scenario> missing)
    : std::runtime_error(summarize(missing)), missing_(std::move(missing)) {}

std::uint64_t trial_seed(std::uint64_t base_seed, std::size_t scenario_index,
                         std::size_t design_index, const DesignConfig& design, int replicate,
                         bool common_random_numbers) noexcept {
  const std::uint64_t design_key =
      common_random_numbers ? (design.myopic ? 1u : 0u) : 0x100u + design_index;
  return derive_seed(base_seed, {static_cast<std::uint64_t>(scenario_index), design_key,
                                 static_cast<std::uint64_t>(replicate)});
}

std::vector<AggregateRow> SweepResult::aggregates() const {
  std::vector<AggregateRow> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r.aggregate());
  return out;
}

SweepResult run_sweep(const SweepConfig& config) {
  if (config.replicates < 1) throw std::invalid_argument("replicates must be >= 1");
  if (config.scenarios.empty()) throw std::invalid_argument("sweep needs at least one scenario");
  std::vector<DesignConfig> designs = config.designs;
  if (designs.empty()) {
    const auto standard = standard_designs();
    designs.assign(standard.begin(), standard.end());
  }

  const std::size_t n_scen = config.scenarios.size();
  const std::size_t n_design = designs.size();
  SweepResult result;
  result.rows.resize(n_scen * n_design);
  std::vector<std::vector<TrialFailure>> failures(n_scen);
  std::vector<std::vector<std::string>> row_warnings(n_scen * n_design);

  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> done{0};
  auto worker = [&]() {
    for (std::size_t si = next.fetch_add(1); si < n_scen; si = next.fetch_add(1)) {
      const Scenario& scenario = config.scenarios[si];
      for (std::size_t di = 0; di < n_design; ++di) {
        SweepRow& row = result.rows[si * n_design + di];
        row.scenario = scenario;
        row.scenario_index = si;
        row.design_index = di;
        row.myopic = designs[di].myopic;
        row.adapt_exponent = designs[di].adapt_exponent;
        row.replicate_u.reserve(static_cast<std::size_t>(config.replicates));
        DesignConfig design = designs[di];
        for (int rep = 0; rep < config.replicates; ++rep) {
          design.seed = trial_seed(config.base_seed, si, di, design, rep,
                                   config.common_random_numbers);
          try {
            TrialResult trial = run_trial(scenario, design);
            row.replicate_u.push_back(trial.mean_utility);
            row.warnings += trial.warnings.size();
            if (!trial.warnings.empty() && row_warnings[si * n_design + di].empty()) {
              row_warnings[si * n_design + di].push_back(trial.warnings.front());
            }
          } catch (const std::exception& e) {
            failures[si].push_back({si, scenario, di, design.label(), rep, e.what()});
            break;
          }
        }
      }
      const std::size_t finished = done.fetch_add(1) + 1;
      if (config.progress) config.progress(finished, n_scen);
    }
  };

  unsigned threads = config.threads != 0 ? config.threads : std::thread::hardware_concurrency();
  threads = static_cast<unsigned>(std::clamp<std::size_t>(threads, 1, n_scen));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  std::vector<TrialFailure> all_failures;
  for (auto& f : failures) all_failures.insert(all_failures.end(), f.begin(), f.end());
  if (!all_failures.empty()) throw SweepFailure(std::move(all_failures));

  for (std::size_t i = 0; i < result.rows.size(); ++i) {
    SweepRow& row = result.rows[i];
    finish_row(row);
    if (row.warnings > 0) {
      result.warnings.push_back("scenario " + std::to_string(row.scenario_index) + " " +
                                row.scenario.label() + " design " +
                                designs[row.design_index].label() + ": " +
                                std::to_string(row.warnings) + " warning(s), first: " +
                                row_warnings[i].front());
    }
  }
  const auto aggregates = result.aggregates();
  result.relative = relative_utilities(aggregates);
  return result;
}

std::vector<RelativeRow> relative_utilities(std::span<const AggregateRow> rows) {
  std::map<std::pair<ScenarioKey, bool>, double> fixed;
  for (const auto& r : rows) {
    if (r.adapt_exponent == 0.0) fixed.emplace(std::pair{key_of(r.scenario), r.myopic}, r.u_bar_bar);
  }
  std::vector<RelativeRow> out;
  for (const auto& r : rows) {
    if (r.adapt_exponent == 0.0) continue;
    const auto it = fixed.find({key_of(r.scenario), r.myopic});
    if (it == fixed.end()) continue;
    RelativeRow rel{r.scenario, r.myopic, r.adapt_exponent, 0.0, false};
    if (it->second > 0.0) {
      rel.rel = r.u_bar_bar / it->second;
    } else {
      rel.rel = std::numeric_limits<double>::quiet_NaN();
      rel.flagged = true;
    }
    out.push_back(rel);
  }
  return out;
}

std::vector<Scenario> missing_design_cells(std::span<const AggregateRow> rows, bool myopic) {
  std::vector<Scenario> order;
  std::map<ScenarioKey, std::pair<bool, bool>> seen;  // (has fixed, has c = 1)
  for (const auto& r : rows) {
    if (r.myopic != myopic) continue;
    auto [it, inserted] = seen.try_emplace(key_of(r.scenario), false, false);
    if (inserted) order.push_back(r.scenario);
    if (r.adapt_exponent == 0.0) it->second.first = true;
    if (r.adapt_exponent == 1.0) it->second.second = true;
  }
  std::vector<Scenario> missing;
  for (const auto& s : order) {
    const auto& flags = seen.at(key_of(s));
    if (!flags.first || !flags.second) missing.push_back(s);
  }
  return missing;
}

FigureBundle figure_matrix(std::span<const RelativeRow> relative, bool myopic,
                           const GridAxes& axes) {
  std::map<ScenarioKey, double> values;
  for (const auto& r : relative) {
    if (r.myopic == myopic && r.adapt_exponent == 1.0) values.emplace(key_of(r.scenario), r.rel);
  }
  FigureBundle bundle;
  bundle.myopic = myopic;
  std::vector<Scenario> missing;
  for (double s0 : axes.s) {
    for (double s1 : axes.s) {
      FigurePanel panel;
      panel.s0 = s0;
      panel.s1 = s1;
      panel.r_axis = axes.r;
      panel.values.assign(axes.r.size(), std::vector<double>(axes.r.size(), 0.0));
      for (std::size_t i = 0; i < axes.r.size(); ++i) {
        for (std::size_t j = 0; j < axes.r.size(); ++j) {
          const Scenario s{axes.r[j], axes.r[i], s0, s1};
          const auto it = values.find(key_of(s));
          if (it == values.end()) {
            missing.push_back(s);
          } else {
            panel.values[i][j] = it->second;
          }
        }
      }
      bundle.panels.push_back(std::move(panel));
    }
  }
  if (!missing.empty()) throw IncompleteGridError(std::move(missing));
  return bundle;
}

FigureBundle figure_matrix(const SweepResult& result, bool myopic, const GridAxes& axes) {
  return figure_matrix(result.relative, myopic, axes);
}

}  // namespace smartq
