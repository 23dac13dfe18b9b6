#pragma once

// Domain types for a two-stage SMART with binary endpoints.
//
// Stage 1 randomises prophylaxis vs placebo and observes infection.
// Infected patients enter stage 2, which randomises treatment vs placebo
// and observes death.

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace smartq {

// Malformed user configuration: utility tables, design settings, input files.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Stage : std::uint8_t { One = 1, Two = 2 };

// Stage 1: Active = prophylaxis. Stage 2: Active = treatment.
enum class Action : std::uint8_t { Control = 0, Active = 1 };

// Stage 1: Event = infection. Stage 2: Event = death.
enum class Outcome : std::uint8_t { None = 0, Event = 1 };

inline constexpr std::array<Action, 2> kActions{Action::Control, Action::Active};

constexpr int to_int(Action a) noexcept { return static_cast<int>(a); }
constexpr int to_int(Outcome y) noexcept { return static_cast<int>(y); }
constexpr std::size_t index_of(Action a) noexcept { return static_cast<std::size_t>(a); }

// Throw std::invalid_argument for anything other than 0 or 1.
Action action_from_int(int value);
Outcome outcome_from_int(int value);

// Patient history before the stage-k decision.
//
// h1 is empty. h2 = (a1, y1) for the dynamic design; the myopic design
// discards it, so every stage-2 patient shares one pooled history.
class History {
 public:
  static History initial() noexcept { return History{}; }
  static History after_stage_one(Action a1, Outcome y1, bool myopic) noexcept;

  Stage stage() const noexcept { return stage_; }
  bool myopic() const noexcept { return myopic_; }
  bool pooled() const noexcept { return stage_ == Stage::Two && myopic_; }
  const std::optional<Action>& stage1_action() const noexcept { return a1_; }
  const std::optional<Outcome>& stage1_outcome() const noexcept { return y1_; }

  std::string label() const;

  friend bool operator==(const History&, const History&) = default;

 private:
  Stage stage_ = Stage::One;
  std::optional<Action> a1_;
  std::optional<Outcome> y1_;
  bool myopic_ = false;
};

// Generative truth: infection probability r_{a1}, death-given-infection s_{a1}.
struct Scenario {
  double r0 = 0.0;
  double r1 = 0.0;
  double s0 = 0.0;
  double s1 = 0.0;

  double infection_prob(Action a1) const noexcept { return a1 == Action::Active ? r1 : r0; }
  double death_prob(Action a1) const noexcept { return a1 == Action::Active ? s1 : s0; }

  // Throws std::invalid_argument unless every probability is in [0, 1].
  void validate() const;
  std::string label() const;

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

struct PatientRecord {
  Action a1 = Action::Control;
  Outcome y1 = Outcome::None;
  std::optional<Action> a2;
  std::optional<Outcome> y2;
  double utility = 0.0;

  bool reached_stage_two() const noexcept { return y1 == Outcome::Event; }
  // Stage-2 fields are present exactly when the patient was infected.
  bool well_formed() const noexcept;
};

// One terminal realisation of (history, action, outcome).
// Stage-1 rows are (a1, y1 = 0); stage-2 rows are (a1, y1 = 1, a2, y2).
struct UtilityRow {
  Action a1 = Action::Control;
  Outcome y1 = Outcome::None;
  std::optional<Action> a2;
  std::optional<Outcome> y2;

  static UtilityRow stage_one(Action a1) noexcept;
  static UtilityRow stage_two(Action a1, Action a2, Outcome y2) noexcept;
  static UtilityRow terminal_row(const PatientRecord& record);

  // Position in the canonical ten-row order: for each a1, the uninfected
  // row followed by (a2, y2) = (0,0), (0,1), (1,0), (1,1).
  std::size_t index() const;
  std::string label() const;

  friend bool operator==(const UtilityRow&, const UtilityRow&) = default;
};

class UtilityTable {
 public:
  static constexpr std::size_t kRows = 10;

  // Survival (or staying uninfected) is worth 1, death 0.
  static UtilityTable defaults();
  static UtilityTable empty() { return UtilityTable{}; }
  static std::array<UtilityRow, kRows> rows();

  // Throws ConfigError for non-finite or negative utilities.
  UtilityTable& set(const UtilityRow& row, double utility);

  // Throws ConfigError naming the row when it has no entry.
  double at(const UtilityRow& row) const;
  bool contains(const UtilityRow& row) const;

  double stage_one(Action a1) const { return at(UtilityRow::stage_one(a1)); }
  double stage_two(Action a1, Action a2, Outcome y2) const {
    return at(UtilityRow::stage_two(a1, a2, y2));
  }

  std::vector<UtilityRow> missing_rows() const;
  void require_complete() const;
  double min_value() const;
  double max_value() const;
  UtilityTable scaled(double factor) const;

  friend bool operator==(const UtilityTable&, const UtilityTable&) = default;

 private:
  std::array<std::optional<double>, kRows> entries_{};
};

// Utility of the record's terminal row. Uninfected patients resolve to the
// stage-1 row. Throws ConfigError when the table lacks that row.
double utility_lookup(const UtilityTable& table, const PatientRecord& record);

}  // namespace smartq
