#pragma once

#include <cstddef>
#include <vector>

#include "smartq/types.hpp"

namespace smartq {

// Axis values for the infection (r) and death (s) probability grids.
struct GridAxes {
  std::vector<double> r;
  std::vector<double> s;

  // R = {0, 0.05, ..., 1} (21 values), S = {0.05, 0.1, 0.2, 0.4, 0.6, 0.8, 0.9, 0.95}.
  static GridAxes full();
  // R' = {0, 0.25, 0.5, 0.75, 1}, S' = {0.05, 0.4, 0.8, 0.95}: 400 scenarios.
  static GridAxes reduced();

  std::size_t size() const noexcept { return r.size() * r.size() * s.size() * s.size(); }
};

// Row-major scenario order: s0 outermost, then s1, r0, and r1 innermost.
// Each consecutive block of |R|^2 scenarios is one (s0, s1) figure panel.
std::vector<Scenario> scenario_grid(const GridAxes& axes);
std::vector<Scenario> scenario_grid();

}  // namespace smartq
