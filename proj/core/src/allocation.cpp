#include "smartq/allocation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "smartq/format.hpp"

namespace smartq {

AllocationProbs allocation_probs(const History& h, const std::array<double, 2>& q, double c,
                                 double min_prob) {
  for (double v : q) {
    if (!std::isfinite(v) || v < 0.0) {
      throw std::invalid_argument("allocation needs finite non-negative Q-values, got " +
                                  format_real(v));
    }
  }
  if (!std::isfinite(c) || c < 0.0) {
    throw std::invalid_argument("allocation exponent c must be finite and >= 0");
  }
  if (!(min_prob >= 0.0 && min_prob <= 0.5)) {
    throw std::invalid_argument("minimum allocation probability must lie in [0, 0.5]");
  }

  AllocationProbs out = AllocationProbs::equal(h);
  const double w0 = std::pow(q[0], c);
  const double w1 = std::pow(q[1], c);
  const double total = w0 + w1;
  if (total >= 1e-12) {
    out.probs[0] = w0 / total;
    out.probs[1] = w1 / total;
  }
  if (min_prob > 0.0) {
    out.probs[0] = std::clamp(out.probs[0], min_prob, 1.0 - min_prob);
    out.probs[1] = 1.0 - out.probs[0];
  }
  return out;
}

}  // namespace smartq
