// Acceptance checks. Prints one PASS/FAIL line per criterion.
//
//   acceptance        run every criterion
//   acceptance N      run criterion N only
//
// Exit status is non-zero when any selected criterion fails.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "smartq/smartq.hpp"
#include "smartq_cli/csv_io.hpp"

using namespace smartq;

namespace {

constexpr std::uint64_t kBaseSeed = 0;
constexpr int kReplicates = 10;

struct Verdict {
  bool pass = false;
  std::string detail;
};

unsigned worker_threads() { return std::max(1u, std::thread::hardware_concurrency()); }

std::string fmt(double x, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, x);
  return buf;
}

SweepResult sweep(std::vector<Scenario> scenarios, int replicates = kReplicates, unsigned threads = 0) {
  SweepConfig config;
  config.scenarios = std::move(scenarios);
  config.replicates = replicates;
  config.base_seed = kBaseSeed;
  config.threads = threads == 0 ? worker_threads() : threads;
  return run_sweep(config);
}

struct RelRange {
  double lo = INFINITY;
  double hi = -INFINITY;
  Scenario at_lo, at_hi;
  void add(const RelativeRow& r) {
    if (r.rel < lo) lo = r.rel, at_lo = r.scenario;
    if (r.rel > hi) hi = r.rel, at_hi = r.scenario;
  }
};

RelRange rel_range(const SweepResult& result, bool myopic) {
  RelRange range;
  for (const auto& r : result.relative) {
    if (r.myopic == myopic && r.adapt_exponent == 1.0) range.add(r);
  }
  return range;
}

double rel_at(const SweepResult& result, bool myopic) {
  for (const auto& r : result.relative) {
    if (r.myopic == myopic && r.adapt_exponent == 1.0) return r.rel;
  }
  return NAN;
}

Verdict null_neutrality() {
  std::vector<Scenario> nulls;
  for (const auto& s : scenario_grid(GridAxes::reduced())) {
    if (s.r0 == s.r1 && s.s0 == s.s1) nulls.push_back(s);
  }
  const auto result = sweep(nulls);
  const auto m0 = rel_range(result, false);
  const auto m1 = rel_range(result, true);
  const bool pass = nulls.size() == 20 && m0.lo >= 0.97 && m0.hi <= 1.03 && m1.lo >= 0.97 && m1.hi <= 1.03;
  return {pass, std::to_string(nulls.size()) + " null scenarios; rel m=0 in [" + fmt(m0.lo) + ", " + fmt(m0.hi) +
                    "], m=1 in [" + fmt(m1.lo) + ", " + fmt(m1.hi) + "]; required [0.97, 1.03]"};
}

Verdict dynamic_dominance() {
  const auto result = sweep(scenario_grid(GridAxes::reduced()));
  const auto m0 = rel_range(result, false);
  const bool pass = m0.lo >= 0.98 && m0.hi > 1.05;
  return {pass, "400 scenarios; min rel m=0 " + fmt(m0.lo) + " at " + m0.at_lo.label() + " (>= 0.98), max " +
                    fmt(m0.hi) + " at " + m0.at_hi.label() + " (> 1.05)"};
}

Verdict myopic_harm() {
  const Scenario s{0.5, 0.45, 0.05, 0.95};
  const double v0 = true_value(s, Action::Control);
  const double v1 = true_value(s, Action::Active);
  const auto result = sweep({s});
  const double m1 = rel_at(result, true);
  const double m0 = rel_at(result, false);
  const bool oracle = std::abs(v0 - 0.975) < 1e-12 && std::abs(v1 - 0.5725) < 1e-12;
  const bool pass = oracle && m1 < 0.97 && m0 >= 1.0;
  return {pass, s.label() + ": rel m=1 " + fmt(m1) + " (< 0.97), rel m=0 " + fmt(m0) + " (>= 1.0); V(0) " +
                    fmt(v0) + ", V(1) " + fmt(v1)};
}

Verdict backward_induction() {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> unit(0.0, 1.0), util(0.0, 3.0);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    std::array<double, 2> p1{unit(rng), unit(rng)};
    std::array<double, 4> p2{unit(rng), unit(rng), unit(rng), unit(rng)};
    UtilityTable t;
    for (const auto& row : UtilityTable::rows()) t.set(row, util(rng));
    const auto s1 = StagePosteriors::from_means(CellLayout::stage_one(), p1);
    const auto s2 = StagePosteriors::from_means(CellLayout::stage_two(false), p2);
    const auto q1 = q_stage1(s1, q_stage2(s2, t), t, false);
    const auto brute = brute_force_value(s1, s2, t);
    for (int a = 0; a < 2; ++a) worst = std::max(worst, std::abs(q1.values[a] - brute[a]));
  }
  std::ostringstream ss;
  ss << "1000 random inputs; max |Q1 - brute force| = " << worst << " (<= 1e-12)";
  return {worst <= 1e-12, ss.str()};
}

Verdict engine_parity() {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> prob(0.02, 0.98);
  std::uniform_int_distribution<std::uint32_t> size(200, 600);
  double worst_gap = 0.0, worst_rhat = 0.0;
  int divergent = 0;
  for (int d = 0; d < 20; ++d) {
    StageData data = d % 2 == 0 ? StageData::stage_one() : StageData::stage_two(false);
    for (std::size_t slot = 0; slot < data.layout().num_histories(); ++slot) {
      for (Action a : kActions) {
        const std::uint32_t n = size(rng);
        std::binomial_distribution<std::uint32_t> events(n, prob(rng));
        data.at(slot, a) = {events(rng), n};
      }
    }
    McmcOptions options;  // 4 chains x 1000 warmup / 1000 sampling
    options.seed = derive_seed(kBaseSeed, {static_cast<std::uint64_t>(d)});
    const auto conj = posterior_conjugate(data, PriorSpec{});
    const auto mcmc = posterior_mcmc(data, PriorSpec{}, options);
    for (std::size_t slot = 0; slot < data.layout().num_histories(); ++slot) {
      for (Action a : kActions) {
        worst_gap = std::max(worst_gap, std::abs(conj.mean(slot, a) - mcmc.mean(slot, a)));
        if (mcmc.at(slot, a).draws->size() != 4000) return {false, "draw count is not 4000"};
      }
    }
    worst_rhat = std::max(worst_rhat, mcmc.diagnostics->max_rhat);
    divergent += mcmc.diagnostics->divergent_transitions;
  }
  return {worst_gap < 0.03 && worst_rhat <= 1.05,
          "20 datasets; max |conjugate - mcmc| = " + fmt(worst_gap, 5) + " (< 0.03), max R-hat " +
              fmt(worst_rhat, 4) + " (<= 1.05), divergences " + std::to_string(divergent)};
}

Verdict fixed_calibration() {
  const Scenario s{0.1, 0.3, 0.45, 0.5};
  SweepConfig config;
  config.scenarios = {s};
  config.designs = {DesignConfig::table_cell(false, 0.0)};
  config.replicates = 100;
  config.base_seed = kBaseSeed;
  config.threads = worker_threads();
  const auto result = run_sweep(config);
  const double oracle = 0.5 * (true_value(s, Action::Control) + true_value(s, Action::Active));
  const double u = result.rows.front().u_bar_bar;
  return {std::abs(u - oracle) <= 0.01 && std::abs(oracle - 0.9025) < 1e-12,
          "100 replicates; u_bar_bar " + fmt(u, 5) + " vs " + fmt(oracle, 5) + " (tolerance 0.01)"};
}

Verdict allocation_properties() {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> qd(0.0, 5.0), cd(0.0, 4.0), kd(0.01, 100.0);
  const History h = History::initial();
  int sum_fail = 0, c0_fail = 0, scale_fail = 0, zero_fail = 0, stop_fail = 0;
  for (int i = 0; i < 1000; ++i) {
    const std::array<double, 2> q{qd(rng), qd(rng)};
    const double c = cd(rng);
    const auto p = allocation_probs(h, q, c);
    if (std::abs(p.probs[0] + p.probs[1] - 1.0) > 1e-12) ++sum_fail;
    if (allocation_probs(h, q, 0.0).probs != std::array<double, 2>{0.5, 0.5}) ++c0_fail;
    const double k = kd(rng);
    const auto scaled = allocation_probs(h, {k * q[0], k * q[1]}, c);
    if (std::abs(scaled.probs[0] - p.probs[0]) > 1e-12) ++scale_fail;
    if (allocation_probs(h, {0.0, 0.0}, c).probs != std::array<double, 2>{0.5, 0.5}) ++zero_fail;
    const double qpos = qd(rng) + 1e-9;
    const auto stop = allocation_probs(h, {0.0, qpos}, 1.0);
    if (stop.probs != std::array<double, 2>{0.0, 1.0}) ++stop_fail;
  }
  const int total = sum_fail + c0_fail + scale_fail + zero_fail + stop_fail;
  return {total == 0, "1000 inputs each; violations: sum-to-one " + std::to_string(sum_fail) + ", c=0 " +
                          std::to_string(c0_fail) + ", scale " + std::to_string(scale_fail) + ", zero-denominator " +
                          std::to_string(zero_fail) + ", stop-allocating " + std::to_string(stop_fail)};
}

std::string aggregate_csv(const SweepResult& result) {
  std::ostringstream ss;
  const auto rows = result.aggregates();
  cli::write_aggregate(ss, rows);
  return ss.str();
}

Verdict parallel_determinism() {
  const unsigned n = std::max(4u, worker_threads());
  const auto serial = aggregate_csv(sweep(scenario_grid(GridAxes::reduced()), kReplicates, 1));
  const auto parallel = aggregate_csv(sweep(scenario_grid(GridAxes::reduced()), kReplicates, n));
  return {serial == parallel, "aggregate CSV at 1 and " + std::to_string(n) + " threads: " +
                                  (serial == parallel ? "byte-identical" : "differs") + " (" +
                                  std::to_string(serial.size()) + " bytes)"};
}

Verdict full_grid_feasibility() {
  const auto start = std::chrono::steady_clock::now();
  const auto result = sweep(scenario_grid());
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const bool complete = result.rows.size() == 28224u * 4u;
  bool matrices = true;
  try {
    matrices = figure_matrix(result, false).panels.size() == 64 && figure_matrix(result, true).panels.size() == 64;
  } catch (const std::exception&) {
    matrices = false;
  }
  return {complete && matrices && seconds < 1800.0,
          "28224 scenarios x 4 designs x 10 replicates on " + std::to_string(worker_threads()) + " thread(s): " +
              fmt(seconds, 1) + " s (< 1800 s), " + std::to_string(result.rows.size()) + " rows"};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Verdict()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria{
      {1, "null-effect neutrality", null_neutrality},
      {2, "dynamic dominance", dynamic_dominance},
      {3, "myopic harm", myopic_harm},
      {4, "backward-induction oracle", backward_induction},
      {5, "engine parity", engine_parity},
      {6, "fixed-design calibration", fixed_calibration},
      {7, "allocation-rule properties", allocation_properties},
      {8, "parallelism independence", parallel_determinism},
      {9, "full-grid feasibility", full_grid_feasibility},
  };
  int only = 0;
  if (argc > 1) {
    only = std::atoi(argv[1]);
    if (only < 1 || only > static_cast<int>(criteria.size())) {
      std::cerr << "usage: acceptance [1-" << criteria.size() << "]\n";
      return 2;
    }
  }
  int failed = 0;
  for (const auto& c : criteria) {
    if (only != 0 && c.id != only) continue;
    Verdict outcome;
    try {
      outcome = c.run();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    std::cout << (outcome.pass ? "PASS" : "FAIL") << " criterion " << c.id << " (" << c.name
              << "): " << outcome.detail << std::endl;
    failed += outcome.pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
