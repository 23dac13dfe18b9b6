#pragma once

// Decision-theoretic Q-learning for the two-stage design.
//
// Utilities are affine in the event probability, so every posterior
// expected utility is the utility evaluated at the posterior mean:
//
//   Q2(h2, a2) = u(h2, a2, 0) (1 - E[pi2]) + u(h2, a2, 1) E[pi2]
//   Q1(a1)     = u(a1, 0) (1 - E[pi1]) + (1 - m) max_a2 Q2((a1, 1), a2) E[pi1]
//
// The myopic design (m = 1) drops the continuation value and pools the
// stage-2 history.

#include <array>
#include <cstddef>
#include <vector>

#include "smartq/inference.hpp"
#include "smartq/types.hpp"

namespace smartq {

struct QValue {
  History history;
  Action action = Action::Control;
  double value = 0.0;
};

// Maximiser of a two-action value pair; ties go to Action::Control.
Action argmax(const std::array<double, 2>& values) noexcept;

class StageTwoQ {
 public:
  explicit StageTwoQ(bool myopic);

  const CellLayout& layout() const noexcept { return layout_; }
  bool myopic() const noexcept { return layout_.myopic(); }

  double value(const History& h, Action a) const { return values_[layout_.slot_of(h)][index_of(a)]; }
  const std::array<double, 2>& values(std::size_t slot) const { return values_.at(slot); }
  void set(std::size_t slot, Action a, double v) { values_.at(slot)[index_of(a)] = v; }
  double best_value(const History& h) const;

  std::vector<QValue> entries() const;

 private:
  CellLayout layout_;
  std::vector<std::array<double, 2>> values_;
};

struct StageOneQ {
  std::array<double, 2> values{};

  double value(Action a) const noexcept { return values[index_of(a)]; }
  std::vector<QValue> entries() const;
};

struct PolicySnapshot {
  StageTwoQ stage2_q{false};
  std::vector<Action> stage2_opt;  // indexed by stage-2 history slot
  StageOneQ stage1_q;
  Action stage1_opt = Action::Control;

  Action stage2_decision(const History& h) const { return stage2_opt.at(stage2_q.layout().slot_of(h)); }
};

// Utility of a stage-2 outcome for one history slot. The pooled myopic
// history averages the a1 = 0 and a1 = 1 rows.
double stage_two_utility(const UtilityTable& utilities, const CellLayout& layout, std::size_t slot,
                         Action a2, Outcome y2);

// Throws std::invalid_argument unless posteriors are stage-2 posteriors.
StageTwoQ q_stage2(const StagePosteriors& posteriors, const UtilityTable& utilities);

// For m = 0, stage2_q must be the dynamic (unpooled) table; for m = 1 it is
// ignored. Throws std::invalid_argument otherwise.
StageOneQ q_stage1(const StagePosteriors& stage1, const StageTwoQ& stage2_q,
                   const UtilityTable& utilities, bool myopic);

PolicySnapshot optimal_policy(const StagePosteriors& stage1, const StagePosteriors& stage2,
                              const UtilityTable& utilities, bool myopic);

// Enumerates every (a1, a2) regimen directly from posterior means and
// returns, per a1, the value of its best continuation. Does not use the
// backward-induction path above; exists to check it. Requires dynamic
// stage-2 posteriors.
std::array<double, 2> brute_force_value(const StagePosteriors& stage1,
                                        const StagePosteriors& stage2,
                                        const UtilityTable& utilities);

}  // namespace smartq
