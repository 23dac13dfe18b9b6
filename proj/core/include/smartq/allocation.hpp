#pragma once

#include <array>

#include "smartq/types.hpp"

namespace smartq {

// Randomisation probabilities over the two actions for one history.
struct AllocationProbs {
  History history;
  std::array<double, 2> probs{0.5, 0.5};

  double prob(Action a) const noexcept { return probs[index_of(a)]; }
  static AllocationProbs equal(const History& h) { return AllocationProbs{h, {0.5, 0.5}}; }
};

// p(a) = Q(a)^c / sum_a' Q(a')^c, with 0^0 = 1 so c = 0 is always 1:1.
// A denominator below 1e-12 falls back to equal allocation. A positive
// min_prob clamps both probabilities into [min_prob, 1 - min_prob].
//
// Throws std::invalid_argument for negative or non-finite Q-values, a
// negative or non-finite c, or min_prob outside [0, 0.5].
AllocationProbs allocation_probs(const History& h, const std::array<double, 2>& q, double c,
                                 double min_prob = 0.0);

}  // namespace smartq
