#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "smartq/inference.hpp"
#include "smartq/types.hpp"

namespace smartq {

// One trial design. (myopic, adapt_exponent) in {0,1}^2 gives the four
// fixed/adaptive x dynamic/myopic cells.
struct DesignConfig {
  bool myopic = false;          // m
  double adapt_exponent = 0.0;  // c; 0 = fixed 1:1 randomisation
  int max_patients = 2000;
  int num_interims = 4;
  // Analyses (1-based) after which allocations are recomputed.
  // Defaults to every analysis except the last.
  std::optional<std::vector<int>> adapt_at;
  PriorSpec prior;
  EngineSettings engine;
  UtilityTable utilities = UtilityTable::defaults();
  double min_alloc_prob = 0.0;
  std::uint64_t seed = 0;

  static DesignConfig table_cell(bool myopic, double adapt_exponent);

  // Throws ConfigError describing the first violated constraint.
  void validate() const;
  bool adaptive() const noexcept { return adapt_exponent > 0.0; }
  std::string label() const;  // e.g. "m0c1"
};

// Fixed-dynamic, fixed-myopic, adaptive-dynamic, adaptive-myopic.
std::array<DesignConfig, 4> standard_designs();

}  // namespace smartq
