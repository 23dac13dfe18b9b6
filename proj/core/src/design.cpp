#include "smartq/design.hpp"

#include <cmath>

#include "smartq/format.hpp"

namespace smartq {

DesignConfig DesignConfig::table_cell(bool myopic, double adapt_exponent) {
  DesignConfig d;
  d.myopic = myopic;
  d.adapt_exponent = adapt_exponent;
  return d;
}

void DesignConfig::validate() const {
  if (!std::isfinite(adapt_exponent) || adapt_exponent < 0.0) {
    throw ConfigError("adaptation exponent c must be finite and >= 0");
  }
  if (max_patients < 1) throw ConfigError("max_patients must be positive");
  if (num_interims < 1) throw ConfigError("num_interims must be >= 1");
  if (max_patients % num_interims != 0) {
    throw ConfigError("max_patients (" + std::to_string(max_patients) +
                      ") must be divisible by num_interims (" + std::to_string(num_interims) + ")");
  }
  if (adapt_at) {
    for (int k : *adapt_at) {
      if (k < 1 || k >= num_interims) {
        throw ConfigError("adaptation analysis " + std::to_string(k) + " must lie in [1, " +
                          std::to_string(num_interims - 1) + "]");
      }
    }
  }
  if (!(min_alloc_prob >= 0.0 && min_alloc_prob <= 0.5)) {
    throw ConfigError("min_alloc_prob must lie in [0, 0.5]");
  }
  prior.validate();
  utilities.require_complete();
  if (engine.engine == Engine::Mcmc) {
    try {
      engine.mcmc.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
}

std::string DesignConfig::label() const {
  return std::string("m") + (myopic ? "1" : "0") + "c" + format_real(adapt_exponent);
}

std::array<DesignConfig, 4> standard_designs() {
  return {DesignConfig::table_cell(false, 0.0), DesignConfig::table_cell(true, 0.0),
          DesignConfig::table_cell(false, 1.0), DesignConfig::table_cell(true, 1.0)};
}

}  // namespace smartq
