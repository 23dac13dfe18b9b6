#include "smartq/policy.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace smartq {

Action argmax(const std::array<double, 2>& values) noexcept {
  return values[1] > values[0] ? Action::Active : Action::Control;
}

StageTwoQ::StageTwoQ(bool myopic)
    : layout_(CellLayout::stage_two(myopic)), values_(layout_.num_histories()) {}

double StageTwoQ::best_value(const History& h) const {
  const auto& v = values_[layout_.slot_of(h)];
  return std::max(v[0], v[1]);
}

std::vector<QValue> StageTwoQ::entries() const {
  std::vector<QValue> out;
  for (std::size_t slot = 0; slot < values_.size(); ++slot) {
    for (Action a : kActions) out.push_back({layout_.history(slot), a, values_[slot][index_of(a)]});
  }
  return out;
}

std::vector<QValue> StageOneQ::entries() const {
  return {{History::initial(), Action::Control, values[0]},
          {History::initial(), Action::Active, values[1]}};
}

double stage_two_utility(const UtilityTable& utilities, const CellLayout& layout, std::size_t slot,
                         Action a2, Outcome y2) {
  if (layout.myopic()) {
    return 0.5 * (utilities.stage_two(Action::Control, a2, y2) +
                  utilities.stage_two(Action::Active, a2, y2));
  }
  return utilities.stage_two(action_from_int(static_cast<int>(slot)), a2, y2);
}

StageTwoQ q_stage2(const StagePosteriors& posteriors, const UtilityTable& utilities) {
  const CellLayout& layout = posteriors.layout();
  if (layout.stage() != Stage::Two) {
    throw std::invalid_argument("q_stage2 needs stage-2 posteriors");
  }
  StageTwoQ q(layout.myopic());
  for (std::size_t slot = 0; slot < layout.num_histories(); ++slot) {
    for (Action a2 : kActions) {
      const double p = posteriors.mean(slot, a2);
      const double u_alive = stage_two_utility(utilities, layout, slot, a2, Outcome::None);
      const double u_dead = stage_two_utility(utilities, layout, slot, a2, Outcome::Event);
      q.set(slot, a2, u_alive * (1.0 - p) + u_dead * p);
    }
  }
  return q;
}

StageOneQ q_stage1(const StagePosteriors& stage1, const StageTwoQ& stage2_q,
                   const UtilityTable& utilities, bool myopic) {
  if (stage1.layout().stage() != Stage::One) {
    throw std::invalid_argument("q_stage1 needs stage-1 posteriors");
  }
  if (!myopic && stage2_q.myopic()) {
    throw std::invalid_argument("dynamic q_stage1 needs stage-2 Q-values for both a1 histories");
  }
  StageOneQ q;
  for (Action a1 : kActions) {
    const double p = stage1.mean(0, a1);
    double continuation = 0.0;
    if (!myopic) {
      continuation = stage2_q.best_value(History::after_stage_one(a1, Outcome::Event, false));
    }
    q.values[index_of(a1)] = utilities.stage_one(a1) * (1.0 - p) + continuation * p;
  }
  return q;
}

PolicySnapshot optimal_policy(const StagePosteriors& stage1, const StagePosteriors& stage2,
                              const UtilityTable& utilities, bool myopic) {
  if (stage2.layout().myopic() != myopic) {
    throw std::invalid_argument("stage-2 posteriors do not match the myopic flag");
  }
  PolicySnapshot snap;
  snap.stage2_q = q_stage2(stage2, utilities);
  for (std::size_t slot = 0; slot < snap.stage2_q.layout().num_histories(); ++slot) {
    snap.stage2_opt.push_back(argmax(snap.stage2_q.values(slot)));
  }
  snap.stage1_q = q_stage1(stage1, snap.stage2_q, utilities, myopic);
  snap.stage1_opt = argmax(snap.stage1_q.values);
  return snap;
}

std::array<double, 2> brute_force_value(const StagePosteriors& stage1,
                                        const StagePosteriors& stage2,
                                        const UtilityTable& utilities) {
  if (stage1.layout().stage() != Stage::One || stage2.layout() != CellLayout::stage_two(false)) {
    throw std::invalid_argument("brute_force_value needs stage-1 and dynamic stage-2 posteriors");
  }
  std::array<double, 2> best{};
  for (Action a1 : kActions) {
    const double p_infect = stage1.at(History::initial(), a1).mean_event_prob;
    const History h2 = History::after_stage_one(a1, Outcome::Event, false);
    double best_regimen = -std::numeric_limits<double>::infinity();
    for (Action a2 : kActions) {
      const double p_death = stage2.at(h2, a2).mean_event_prob;
      const double regimen_value =
          utilities.at(UtilityRow::stage_one(a1)) * (1.0 - p_infect) +
          (utilities.at(UtilityRow::stage_two(a1, a2, Outcome::None)) * (1.0 - p_death) +
           utilities.at(UtilityRow::stage_two(a1, a2, Outcome::Event)) * p_death) *
              p_infect;
      best_regimen = std::max(best_regimen, regimen_value);
    }
    best[index_of(a1)] = best_regimen;
  }
  return best;
}

}  // namespace smartq
