#pragma once

// Hamiltonian Monte Carlo for small logistic regressions fitted to cell counts.
// Internal to the inference engine.

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace smartq::detail {

// Bernoulli-logistic likelihood over aggregated cells with an independent
// normal prior on each coefficient.
struct LogisticCellModel {
  Eigen::MatrixXd design;   // one row of 0/1 covariates per cell
  Eigen::VectorXd events;
  Eigen::VectorXd trials;
  double prior_mean = 0.0;
  double prior_sd = 2.5;

  int dim() const { return static_cast<int>(design.cols()); }
  // Log posterior density up to a constant; fills grad.
  double log_density(const Eigen::VectorXd& beta, Eigen::VectorXd& grad) const;
};

struct ChainOutput {
  Eigen::MatrixXd draws;  // sampling x dim
  int divergent = 0;
  double step_size = 0.0;
};

// One chain: windowed warmup (step-size dual averaging plus dense metric
// estimation) followed by fixed-parameter sampling.
ChainOutput run_hmc_chain(const LogisticCellModel& model, int warmup, int sampling,
                          std::uint64_t seed);

}  // namespace smartq::detail
