#include "smartq/grid.hpp"

namespace smartq {

namespace {

// Integer percentages divided once so each value is the double nearest the decimal.
std::vector<double> percent(std::initializer_list<int> values) {
  std::vector<double> out;
  out.reserve(values.size());
  for (int v : values) out.push_back(static_cast<double>(v) / 100.0);
  return out;
}

}  // namespace

GridAxes GridAxes::full() {
  GridAxes axes;
  for (int k = 0; k <= 20; ++k) axes.r.push_back(static_cast<double>(5 * k) / 100.0);
  axes.s = percent({5, 10, 20, 40, 60, 80, 90, 95});
  return axes;
}

GridAxes GridAxes::reduced() {
  return GridAxes{percent({0, 25, 50, 75, 100}), percent({5, 40, 80, 95})};
}

std::vector<Scenario> scenario_grid(const GridAxes& axes) {
  std::vector<Scenario> out;
  out.reserve(axes.size());
  for (double s0 : axes.s)
    for (double s1 : axes.s)
      for (double r0 : axes.r)
        for (double r1 : axes.r) out.push_back(Scenario{r0, r1, s0, s1});
  return out;
}

std::vector<Scenario> scenario_grid() { return scenario_grid(GridAxes::full()); }

}  // namespace smartq
