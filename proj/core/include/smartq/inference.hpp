#pragma once

// Posterior inference for stage-wise event probabilities.
//
// Two engines share one data layout:
//   * conjugate: an independent Beta posterior per (history, action) cell;
//   * mcmc: Hamiltonian Monte Carlo over the logistic-regression
//     coefficients, pushed forward to per-cell event probabilities.
// With one free coefficient per cell the two describe the same model family.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "smartq/types.hpp"

namespace smartq {

enum class Engine : std::uint8_t { Conjugate, Mcmc };

std::string_view to_string(Engine engine) noexcept;
// Accepts "conjugate" or "mcmc"; throws ConfigError otherwise.
Engine parse_engine(std::string_view text);

// Shape of the cells fitted at one stage.
//
// Stage 1 has one history and two cells. Stage 2 has one history per a1
// (with y1 = 1) in the dynamic design and a single pooled history in the
// myopic design.
class CellLayout {
 public:
  static CellLayout stage_one() noexcept { return CellLayout{Stage::One, false}; }
  static CellLayout stage_two(bool myopic) noexcept { return CellLayout{Stage::Two, myopic}; }

  Stage stage() const noexcept { return stage_; }
  bool myopic() const noexcept { return myopic_; }
  std::size_t num_histories() const noexcept {
    return stage_ == Stage::Two && !myopic_ ? 2 : 1;
  }
  std::size_t num_cells() const noexcept { return 2 * num_histories(); }

  History history(std::size_t slot) const;
  // Throws std::invalid_argument for a history that does not belong here.
  std::size_t slot_of(const History& h) const;
  std::size_t cell_index(std::size_t slot, Action a) const noexcept {
    return 2 * slot + index_of(a);
  }

  friend bool operator==(const CellLayout&, const CellLayout&) = default;

 private:
  CellLayout(Stage stage, bool myopic) noexcept : stage_(stage), myopic_(myopic) {}

  Stage stage_;
  bool myopic_;
};

struct CellCounts {
  std::uint32_t events = 0;
  std::uint32_t trials = 0;

  void record(Outcome y) noexcept {
    ++trials;
    if (y == Outcome::Event) ++events;
  }
  bool valid() const noexcept { return events <= trials; }

  friend bool operator==(const CellCounts&, const CellCounts&) = default;
};

class StageData {
 public:
  explicit StageData(CellLayout layout);
  static StageData stage_one() { return StageData{CellLayout::stage_one()}; }
  static StageData stage_two(bool myopic) { return StageData{CellLayout::stage_two(myopic)}; }

  const CellLayout& layout() const noexcept { return layout_; }
  Stage stage() const noexcept { return layout_.stage(); }

  const CellCounts& cell(const History& h, Action a) const;
  CellCounts& cell(const History& h, Action a);
  const CellCounts& at(std::size_t slot, Action a) const { return cells_.at(layout_.cell_index(slot, a)); }
  CellCounts& at(std::size_t slot, Action a) { return cells_.at(layout_.cell_index(slot, a)); }

  void record(const History& h, Action a, Outcome y) { cell(h, a).record(y); }
  std::uint64_t total_trials() const noexcept;

  friend bool operator==(const StageData&, const StageData&) = default;

 private:
  CellLayout layout_;
  std::vector<CellCounts> cells_;
};

struct PriorSpec {
  double conjugate_alpha = 1.0;
  double conjugate_beta = 1.0;
  double coefficient_mean = 0.0;
  double coefficient_sd = 2.5;

  // Throws ConfigError unless alpha, beta, and sd are positive and finite.
  void validate() const;
};

struct PosteriorSummary {
  double mean_event_prob = 0.5;
  std::optional<std::vector<double>> draws;
  Engine engine = Engine::Conjugate;
};

struct McmcOptions {
  int chains = 4;
  int warmup = 1000;
  int sampling = 1000;
  std::uint64_t seed = 0;
  bool parallel_chains = false;
  double rhat_threshold = 1.05;

  void validate() const;
};

struct McmcDiagnostics {
  std::vector<double> split_rhat;  // one per coefficient
  double max_rhat = 1.0;
  int divergent_transitions = 0;
  std::vector<double> step_sizes;  // one per chain, after adaptation
};

// Posteriors for every cell of one stage.
class StagePosteriors {
 public:
  explicit StagePosteriors(CellLayout layout);
  // Conjugate-tagged summaries with the given means, in cell-index order.
  static StagePosteriors from_means(CellLayout layout, std::span<const double> means);

  const CellLayout& layout() const noexcept { return layout_; }
  const PosteriorSummary& at(const History& h, Action a) const;
  const PosteriorSummary& at(std::size_t slot, Action a) const {
    return cells_.at(layout_.cell_index(slot, a));
  }
  PosteriorSummary& at(std::size_t slot, Action a) { return cells_.at(layout_.cell_index(slot, a)); }
  double mean(const History& h, Action a) const { return at(h, a).mean_event_prob; }
  double mean(std::size_t slot, Action a) const { return at(slot, a).mean_event_prob; }

  std::optional<McmcDiagnostics> diagnostics;
  std::vector<std::string> warnings;

 private:
  CellLayout layout_;
  std::vector<PosteriorSummary> cells_;
};

// Logistic-regression coefficients for one stage:
//   stage 1:          (b10, b11)            f = b10 + b11 a1
//   stage 2 dynamic:  (b20, b21, b22, b23)  f = b20 + b21 a2 + b22 a1 + b23 a1 a2
//   stage 2 myopic:   (b20, b21)            f = b20 + b21 a2
struct CoefficientVector {
  CellLayout layout = CellLayout::stage_one();
  std::vector<double> values;

  static std::size_t expected_size(const CellLayout& layout) noexcept;
};

// Throws std::invalid_argument when coefficient count or history does not
// match the layout.
double linear_predictor(const CoefficientVector& coeffs, const History& h, Action a);
double inverse_logit(double x) noexcept;

// Beta(alpha + events, beta + trials - events) posterior mean.
PosteriorSummary posterior_conjugate(const CellCounts& counts, const PriorSpec& prior);
StagePosteriors posterior_conjugate(const StageData& data, const PriorSpec& prior);

// HMC over the stage coefficients with independent Normal(mean, sd) priors.
// Draws are chain-major: chains * sampling values per cell. A split-chain
// R-hat above options.rhat_threshold is reported as a warning.
StagePosteriors posterior_mcmc(const StageData& data, const PriorSpec& prior,
                               const McmcOptions& options);

struct EngineSettings {
  Engine engine = Engine::Conjugate;
  McmcOptions mcmc;
};

StagePosteriors estimate_posteriors(const StageData& data, const PriorSpec& prior,
                                    const EngineSettings& settings);

// Split-chain potential scale reduction for one scalar quantity.
// Each inner vector is one chain; chains are halved before comparison.
double split_rhat(const std::vector<std::vector<double>>& chains);

// Stage-1 counts over all records; stage-2 counts over infected records,
// keyed by a1 unless myopic, in which case a1 is pooled.
std::pair<StageData, StageData> accumulate(std::span<const PatientRecord> records, bool myopic);

}  // namespace smartq
