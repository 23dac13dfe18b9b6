#include "hmc.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "smartq/rng.hpp"

namespace smartq::detail {

namespace {

// log(1 + exp(x)) without overflow.
double softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

constexpr double kTargetAccept = 0.8;
constexpr double kMaxEnergyError = 1000.0;
constexpr int kMaxLeapfrogSteps = 256;
constexpr double kIntegrationTime = std::numbers::pi / 2.0;

// Nesterov dual averaging of log step size (Hoffman & Gelman, 2014).
class StepSizeAdapter {
 public:
  void restart(double step) {
    mu_ = std::log(10.0 * step);
    h_bar_ = 0.0;
    log_step_bar_ = 0.0;
    t_ = 0;
  }

  double update(double accept_stat) {
    constexpr double gamma = 0.05;
    constexpr double t0 = 10.0;
    constexpr double kappa = 0.75;
    ++t_;
    const double t = static_cast<double>(t_);
    const double w = 1.0 / (t + t0);
    h_bar_ = (1.0 - w) * h_bar_ + w * (kTargetAccept - accept_stat);
    const double log_step = mu_ - std::sqrt(t) / gamma * h_bar_;
    const double eta = std::pow(t, -kappa);
    log_step_bar_ = eta * log_step + (1.0 - eta) * log_step_bar_;
    return std::exp(log_step);
  }

  double final_step() const { return std::exp(log_step_bar_); }

 private:
  double mu_ = 0.0;
  double h_bar_ = 0.0;
  double log_step_bar_ = 0.0;
  long t_ = 0;
};

class CovarianceAccumulator {
 public:
  explicit CovarianceAccumulator(int dim) : mean_(Eigen::VectorXd::Zero(dim)), m2_(Eigen::MatrixXd::Zero(dim, dim)) {}

  void add(const Eigen::VectorXd& x) {
    ++n_;
    const Eigen::VectorXd delta = x - mean_;
    mean_ += delta / static_cast<double>(n_);
    m2_ += delta * (x - mean_).transpose();
  }

  // Sample covariance shrunk toward a small multiple of the identity.
  Eigen::MatrixXd regularised() const {
    const int dim = static_cast<int>(mean_.size());
    const double n = static_cast<double>(n_);
    if (n_ < 2) return Eigen::MatrixXd::Identity(dim, dim);
    const Eigen::MatrixXd cov = m2_ / (n - 1.0);
    return (n / (n + 5.0)) * cov +
           1e-3 * (5.0 / (n + 5.0)) * Eigen::MatrixXd::Identity(dim, dim);
  }

  void reset() {
    n_ = 0;
    mean_.setZero();
    m2_.setZero();
  }

 private:
  long n_ = 0;
  Eigen::VectorXd mean_;
  Eigen::MatrixXd m2_;
};

// Leapfrog integration in whitened coordinates u, where beta = chol * u.
class Integrator {
 public:
  Integrator(const LogisticCellModel& model, Rng& rng, const Eigen::VectorXd& start)
      : model_(model),
        rng_(rng),
        chol_(Eigen::MatrixXd::Identity(model.dim(), model.dim())),
        beta_(start),
        grad_(model.dim()) {
    log_p_ = model_.log_density(beta_, grad_);
    if (!std::isfinite(log_p_)) {
      throw std::logic_error("non-finite log density at the chain's initial point");
    }
  }

  void set_metric(const Eigen::MatrixXd& covariance) {
    Eigen::LLT<Eigen::MatrixXd> llt(covariance);
    if (llt.info() == Eigen::Success) chol_ = llt.matrixL();
  }

  const Eigen::VectorXd& position() const { return beta_; }

  // One HMC transition; returns the Metropolis acceptance probability.
  double transition(double step, int steps, bool& divergent) {
    divergent = false;
    Eigen::VectorXd u = chol_.triangularView<Eigen::Lower>().solve(beta_);
    Eigen::VectorXd p(u.size());
    for (Eigen::Index i = 0; i < p.size(); ++i) p[i] = normal_(rng_);
    Eigen::VectorXd grad_beta = grad_;
    Eigen::VectorXd g = chol_.transpose() * grad_beta;
    Eigen::VectorXd beta = beta_;
    double log_p = log_p_;
    const double h0 = -log_p + 0.5 * p.squaredNorm();

    for (int s = 0; s < steps; ++s) {
      p += 0.5 * step * g;
      u += step * p;
      beta = chol_ * u;
      log_p = model_.log_density(beta, grad_beta);
      if (!std::isfinite(log_p)) break;
      g = chol_.transpose() * grad_beta;
      p += 0.5 * step * g;
    }

    const double h1 = -log_p + 0.5 * p.squaredNorm();
    const double energy_error = h1 - h0;
    if (!std::isfinite(energy_error) || energy_error > kMaxEnergyError) {
      divergent = true;
      return 0.0;
    }
    const double accept = std::min(1.0, std::exp(-energy_error));
    if (uniform01(rng_) < accept) {
      beta_ = beta;
      grad_ = grad_beta;
      log_p_ = log_p;
    }
    return accept;
  }

  int jittered_steps(double step) {
    const double tau = kIntegrationTime * (0.5 + uniform01(rng_));
    const double n = std::ceil(tau / step);
    return static_cast<int>(std::clamp(n, 1.0, static_cast<double>(kMaxLeapfrogSteps)));
  }

  // Doubles or halves the step until a single leapfrog step crosses 50% acceptance.
  double reasonable_step(double step) {
    bool divergent = false;
    const Eigen::VectorXd saved_beta = beta_;
    const Eigen::VectorXd saved_grad = grad_;
    const double saved_log_p = log_p_;
    auto probe = [&](double eps) {
      const double a = transition(eps, 1, divergent);
      beta_ = saved_beta;
      grad_ = saved_grad;
      log_p_ = saved_log_p;
      return a;
    };
    double a = probe(step);
    const double direction = a > 0.5 ? 2.0 : 0.5;
    for (int i = 0; i < 50; ++i) {
      const double next = step * direction;
      a = probe(next);
      if ((direction > 1.0 && a < 0.5) || (direction < 1.0 && a > 0.5)) break;
      step = next;
      if (step < 1e-8 || step > 1e3) break;
    }
    return step;
  }

 private:
  const LogisticCellModel& model_;
  Rng& rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  Eigen::MatrixXd chol_;
  Eigen::VectorXd beta_;
  Eigen::VectorXd grad_;
  double log_p_ = 0.0;
};

struct WarmupPlan {
  int init_buffer;
  int term_buffer;
  int base_window;
};

WarmupPlan plan_warmup(int warmup) {
  if (warmup >= 150) return {75, 50, 25};
  const int init = static_cast<int>(0.15 * warmup);
  const int term = static_cast<int>(0.1 * warmup);
  return {init, term, std::max(1, warmup - init - term)};
}

}  // namespace

double LogisticCellModel::log_density(const Eigen::VectorXd& beta, Eigen::VectorXd& grad) const {
  const Eigen::VectorXd eta = design * beta;
  Eigen::VectorXd residual(eta.size());
  double log_p = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    const double e = events[i];
    const double n = trials[i];
    log_p -= e * softplus(-eta[i]) + (n - e) * softplus(eta[i]);
    residual[i] = e - n * sigmoid(eta[i]);
  }
  const double inv_var = 1.0 / (prior_sd * prior_sd);
  const Eigen::VectorXd centred = beta.array() - prior_mean;
  log_p -= 0.5 * inv_var * centred.squaredNorm();
  grad = design.transpose() * residual - inv_var * centred;
  return log_p;
}

ChainOutput run_hmc_chain(const LogisticCellModel& model, int warmup, int sampling,
                          std::uint64_t seed) {
  Rng rng(seed);
  const int dim = model.dim();
  Eigen::VectorXd start(dim);
  for (int i = 0; i < dim; ++i) start[i] = -2.0 + 4.0 * uniform01(rng);

  Integrator integrator(model, rng, start);
  StepSizeAdapter adapter;
  CovarianceAccumulator window(dim);
  ChainOutput out;

  double step = integrator.reasonable_step(1.0);
  adapter.restart(step);

  const WarmupPlan plan = plan_warmup(warmup);
  const int window_end_limit = warmup - plan.term_buffer;
  int next_window_size = plan.base_window;
  int window_start = plan.init_buffer;
  int window_end = std::min(window_start + next_window_size, window_end_limit);
  // Stretch the last window when the next one would not fit.
  if (window_end + 2 * next_window_size > window_end_limit) window_end = window_end_limit;

  bool divergent = false;
  for (int it = 0; it < warmup; ++it) {
    const double accept = integrator.transition(step, integrator.jittered_steps(step), divergent);
    step = adapter.update(accept);

    const bool in_window = it >= window_start && it < window_end;
    if (in_window) window.add(integrator.position());
    if (in_window && it == window_end - 1) {
      integrator.set_metric(window.regularised());
      window.reset();
      step = integrator.reasonable_step(step);
      adapter.restart(step);
      next_window_size *= 2;
      window_start = window_end;
      window_end = std::min(window_start + next_window_size, window_end_limit);
      if (window_end + 2 * next_window_size > window_end_limit) window_end = window_end_limit;
    }
  }
  if (warmup > 0) step = adapter.final_step();

  out.step_size = step;
  out.draws.resize(sampling, dim);
  for (int it = 0; it < sampling; ++it) {
    integrator.transition(step, integrator.jittered_steps(step), divergent);
    if (divergent) ++out.divergent;
    out.draws.row(it) = integrator.position().transpose();
  }
  return out;
}

}  // namespace smartq::detail
