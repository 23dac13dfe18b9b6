#include "smartq/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <future>
#include <numeric>
#include <stdexcept>

#include "hmc.hpp"
#include "smartq/format.hpp"
#include "smartq/rng.hpp"

namespace smartq {

std::string_view to_string(Engine engine) noexcept {
  return engine == Engine::Mcmc ? "mcmc" : "conjugate";
}

Engine parse_engine(std::string_view text) {
  if (text == "conjugate") return Engine::Conjugate;
  if (text == "mcmc") return Engine::Mcmc;
  throw ConfigError("unknown engine '" + std::string(text) + "' (expected conjugate or mcmc)");
}

History CellLayout::history(std::size_t slot) const {
  if (slot >= num_histories()) throw std::out_of_range("history slot out of range");
  if (stage_ == Stage::One) return History::initial();
  if (myopic_) return History::after_stage_one(Action::Control, Outcome::Event, true);
  return History::after_stage_one(action_from_int(static_cast<int>(slot)), Outcome::Event, false);
}

std::size_t CellLayout::slot_of(const History& h) const {
  if (h.stage() != stage_) {
    throw std::invalid_argument("history " + h.label() + " does not belong to this stage");
  }
  if (stage_ == Stage::One) return 0;
  if (h.myopic() != myopic_) {
    throw std::invalid_argument("history " + h.label() + " does not match the design's myopic flag");
  }
  if (myopic_) return 0;
  if (!h.stage1_outcome() || *h.stage1_outcome() != Outcome::Event) {
    throw std::invalid_argument("only infected patients (y1 = 1) reach stage 2");
  }
  return index_of(*h.stage1_action());
}

StageData::StageData(CellLayout layout) : layout_(layout), cells_(layout.num_cells()) {}

const CellCounts& StageData::cell(const History& h, Action a) const {
  return cells_[layout_.cell_index(layout_.slot_of(h), a)];
}

CellCounts& StageData::cell(const History& h, Action a) {
  return cells_[layout_.cell_index(layout_.slot_of(h), a)];
}

std::uint64_t StageData::total_trials() const noexcept {
  std::uint64_t n = 0;
  for (const auto& c : cells_) n += c.trials;
  return n;
}

void PriorSpec::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw ConfigError(std::string(name) + " must be positive and finite, got " + format_real(v));
    }
  };
  positive(conjugate_alpha, "prior alpha");
  positive(conjugate_beta, "prior beta");
  positive(coefficient_sd, "coefficient prior sd");
  if (!std::isfinite(coefficient_mean)) throw ConfigError("coefficient prior mean must be finite");
}

void McmcOptions::validate() const {
  if (chains < 1) throw std::invalid_argument("mcmc chains must be >= 1");
  if (warmup < 1) throw std::invalid_argument("mcmc warmup must be >= 1");
  if (sampling < 2) throw std::invalid_argument("mcmc sampling must be >= 2");
}

StagePosteriors::StagePosteriors(CellLayout layout)
    : layout_(layout), cells_(layout.num_cells()) {}

StagePosteriors StagePosteriors::from_means(CellLayout layout, std::span<const double> means) {
  StagePosteriors out(layout);
  if (means.size() != layout.num_cells()) {
    throw std::invalid_argument("expected " + std::to_string(layout.num_cells()) +
                                " posterior means, got " + std::to_string(means.size()));
  }
  for (std::size_t i = 0; i < means.size(); ++i) out.cells_[i].mean_event_prob = means[i];
  return out;
}

const PosteriorSummary& StagePosteriors::at(const History& h, Action a) const {
  return cells_[layout_.cell_index(layout_.slot_of(h), a)];
}

std::size_t CoefficientVector::expected_size(const CellLayout& layout) noexcept {
  return layout.stage() == Stage::Two && !layout.myopic() ? 4 : 2;
}

namespace {

// 0/1 covariate row matching the coefficient order of CoefficientVector.
std::vector<double> covariates(const CellLayout& layout, std::size_t slot, Action a) {
  const double x = to_int(a);
  if (layout.stage() == Stage::Two && !layout.myopic()) {
    const double a1 = static_cast<double>(slot);
    return {1.0, x, a1, a1 * x};
  }
  return {1.0, x};
}

detail::LogisticCellModel build_model(const StageData& data, const PriorSpec& prior) {
  const CellLayout& layout = data.layout();
  const auto cells = static_cast<Eigen::Index>(layout.num_cells());
  const auto dim = static_cast<Eigen::Index>(CoefficientVector::expected_size(layout));
  detail::LogisticCellModel model;
  model.design.resize(cells, dim);
  model.events.resize(cells);
  model.trials.resize(cells);
  model.prior_mean = prior.coefficient_mean;
  model.prior_sd = prior.coefficient_sd;
  for (std::size_t slot = 0; slot < layout.num_histories(); ++slot) {
    for (Action a : kActions) {
      const auto row = static_cast<Eigen::Index>(layout.cell_index(slot, a));
      const auto x = covariates(layout, slot, a);
      for (Eigen::Index j = 0; j < dim; ++j) model.design(row, j) = x[static_cast<std::size_t>(j)];
      model.events[row] = data.at(slot, a).events;
      model.trials[row] = data.at(slot, a).trials;
    }
  }
  return model;
}

void require_valid(const StageData& data) {
  for (std::size_t slot = 0; slot < data.layout().num_histories(); ++slot) {
    for (Action a : kActions) {
      if (!data.at(slot, a).valid()) throw std::invalid_argument("cell has more events than trials");
    }
  }
}

}  // namespace

double inverse_logit(double x) noexcept {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double linear_predictor(const CoefficientVector& coeffs, const History& h, Action a) {
  const CellLayout& layout = coeffs.layout;
  if (coeffs.values.size() != CoefficientVector::expected_size(layout)) {
    throw std::invalid_argument("coefficient vector has " + std::to_string(coeffs.values.size()) +
                                " entries, layout needs " +
                                std::to_string(CoefficientVector::expected_size(layout)));
  }
  const auto x = covariates(layout, layout.slot_of(h), a);
  return std::inner_product(x.begin(), x.end(), coeffs.values.begin(), 0.0);
}

PosteriorSummary posterior_conjugate(const CellCounts& counts, const PriorSpec& prior) {
  if (!counts.valid()) throw std::invalid_argument("cell has more events than trials");
  PosteriorSummary out;
  out.engine = Engine::Conjugate;
  out.mean_event_prob = (prior.conjugate_alpha + counts.events) /
                        (prior.conjugate_alpha + prior.conjugate_beta + counts.trials);
  return out;
}

StagePosteriors posterior_conjugate(const StageData& data, const PriorSpec& prior) {
  StagePosteriors out(data.layout());
  for (std::size_t slot = 0; slot < data.layout().num_histories(); ++slot) {
    for (Action a : kActions) out.at(slot, a) = posterior_conjugate(data.at(slot, a), prior);
  }
  return out;
}

double split_rhat(const std::vector<std::vector<double>>& chains) {
  std::vector<std::span<const double>> halves;
  for (const auto& chain : chains) {
    const std::size_t half = chain.size() / 2;
    if (half < 1) throw std::invalid_argument("split_rhat needs at least two draws per chain");
    // An odd middle draw is dropped so both halves have equal length.
    halves.emplace_back(chain.data(), half);
    halves.emplace_back(chain.data() + chain.size() - half, half);
  }
  const std::size_t n = halves.front().size();
  for (const auto& h : halves) {
    if (h.size() != n) throw std::invalid_argument("split_rhat needs equal-length chains");
  }
  const double m = static_cast<double>(halves.size());
  const double nd = static_cast<double>(n);

  std::vector<double> means;
  double within = 0.0;
  for (const auto& h : halves) {
    const double mean = std::accumulate(h.begin(), h.end(), 0.0) / nd;
    double ss = 0.0;
    for (double v : h) ss += (v - mean) * (v - mean);
    means.push_back(mean);
    within += n > 1 ? ss / (nd - 1.0) : 0.0;
  }
  within /= m;
  const double grand = std::accumulate(means.begin(), means.end(), 0.0) / m;
  double between = 0.0;
  for (double mu : means) between += (mu - grand) * (mu - grand);
  between *= nd / (m - 1.0);

  if (within <= 0.0) return between <= 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
  const double var_plus = (nd - 1.0) / nd * within + between / nd;
  return std::sqrt(var_plus / within);
}

StagePosteriors posterior_mcmc(const StageData& data, const PriorSpec& prior,
                               const McmcOptions& options) {
  options.validate();
  prior.validate();
  require_valid(data);

  const detail::LogisticCellModel model = build_model(data, prior);
  const auto chains = static_cast<std::size_t>(options.chains);

  std::vector<detail::ChainOutput> outputs(chains);
  auto run = [&](std::size_t c) {
    return detail::run_hmc_chain(model, options.warmup, options.sampling,
                                 derive_seed(options.seed, {c}));
  };
  if (options.parallel_chains && chains > 1) {
    std::vector<std::future<detail::ChainOutput>> pending;
    for (std::size_t c = 0; c < chains; ++c) pending.push_back(std::async(std::launch::async, run, c));
    for (std::size_t c = 0; c < chains; ++c) outputs[c] = pending[c].get();
  } else {
    for (std::size_t c = 0; c < chains; ++c) outputs[c] = run(c);
  }

  const CellLayout& layout = data.layout();
  const std::size_t dim = CoefficientVector::expected_size(layout);
  McmcDiagnostics diag;
  for (std::size_t j = 0; j < dim; ++j) {
    std::vector<std::vector<double>> per_chain(chains);
    for (std::size_t c = 0; c < chains; ++c) {
      const auto col = outputs[c].draws.col(static_cast<Eigen::Index>(j));
      per_chain[c].assign(col.data(), col.data() + col.size());
    }
    diag.split_rhat.push_back(split_rhat(per_chain));
  }
  diag.max_rhat = *std::max_element(diag.split_rhat.begin(), diag.split_rhat.end());
  for (const auto& out : outputs) {
    diag.divergent_transitions += out.divergent;
    diag.step_sizes.push_back(out.step_size);
  }

  StagePosteriors result(layout);
  const std::size_t total = chains * static_cast<std::size_t>(options.sampling);
  CoefficientVector coeffs{layout, std::vector<double>(dim)};
  for (std::size_t slot = 0; slot < layout.num_histories(); ++slot) {
    const History h = layout.history(slot);
    for (Action a : kActions) {
      std::vector<double> draws;
      draws.reserve(total);
      for (const auto& out : outputs) {
        for (Eigen::Index it = 0; it < out.draws.rows(); ++it) {
          for (std::size_t j = 0; j < dim; ++j) {
            coeffs.values[j] = out.draws(it, static_cast<Eigen::Index>(j));
          }
          draws.push_back(inverse_logit(linear_predictor(coeffs, h, a)));
        }
      }
      PosteriorSummary& cell = result.at(slot, a);
      cell.engine = Engine::Mcmc;
      cell.mean_event_prob = std::accumulate(draws.begin(), draws.end(), 0.0) /
                             static_cast<double>(draws.size());
      cell.draws = std::move(draws);
    }
  }

  if (diag.max_rhat > options.rhat_threshold) {
    result.warnings.push_back("mcmc split R-hat " + format_real(diag.max_rhat) + " exceeds " +
                              format_real(options.rhat_threshold));
  }
  if (diag.divergent_transitions > 0) {
    result.warnings.push_back("mcmc produced " + std::to_string(diag.divergent_transitions) +
                              " divergent transitions");
  }
  result.diagnostics = std::move(diag);
  return result;
}

StagePosteriors estimate_posteriors(const StageData& data, const PriorSpec& prior,
                                    const EngineSettings& settings) {
  if (settings.engine == Engine::Mcmc) return posterior_mcmc(data, prior, settings.mcmc);
  return posterior_conjugate(data, prior);
}

std::pair<StageData, StageData> accumulate(std::span<const PatientRecord> records, bool myopic) {
  auto stage1 = StageData::stage_one();
  auto stage2 = StageData::stage_two(myopic);
  for (const auto& r : records) {
    if (!r.well_formed()) throw std::invalid_argument("malformed patient record");
    stage1.record(History::initial(), r.a1, r.y1);
    if (r.reached_stage_two()) {
      stage2.record(History::after_stage_one(r.a1, r.y1, myopic), *r.a2, *r.y2);
    }
  }
  return {std::move(stage1), std::move(stage2)};
}

}  // namespace smartq
