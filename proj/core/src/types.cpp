#include "smartq/types.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <system_error>

#include "smartq/format.hpp"

namespace smartq {

std::string format_real(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc{}) throw std::runtime_error("format_real: conversion failed");
  return std::string(buf, end);
}

std::optional<double> parse_real(std::string_view text) {
  if (text == "nan") return std::numeric_limits<double>::quiet_NaN();
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) return std::nullopt;
  return value;
}

std::optional<long long> parse_integer(std::string_view text) {
  long long value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) return std::nullopt;
  return value;
}

Action action_from_int(int value) {
  if (value == 0) return Action::Control;
  if (value == 1) return Action::Active;
  throw std::invalid_argument("action must be 0 or 1, got " + std::to_string(value));
}

Outcome outcome_from_int(int value) {
  if (value == 0) return Outcome::None;
  if (value == 1) return Outcome::Event;
  throw std::invalid_argument("outcome must be 0 or 1, got " + std::to_string(value));
}

History History::after_stage_one(Action a1, Outcome y1, bool myopic) noexcept {
  History h;
  h.stage_ = Stage::Two;
  h.myopic_ = myopic;
  if (!myopic) {
    h.a1_ = a1;
    h.y1_ = y1;
  }
  return h;
}

std::string History::label() const {
  if (stage_ == Stage::One) return "h1";
  if (myopic_) return "h2:pooled";
  return "h2:a1=" + std::to_string(to_int(*a1_)) + ",y1=" + std::to_string(to_int(*y1_));
}

void Scenario::validate() const {
  auto check = [](double p, const char* name) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw std::invalid_argument(std::string("scenario probability ") + name +
                                  " must lie in [0, 1], got " + format_real(p));
    }
  };
  check(r0, "r0");
  check(r1, "r1");
  check(s0, "s0");
  check(s1, "s1");
}

std::string Scenario::label() const {
  return "(r0=" + format_real(r0) + ", r1=" + format_real(r1) + ", s0=" + format_real(s0) +
         ", s1=" + format_real(s1) + ")";
}

bool PatientRecord::well_formed() const noexcept {
  const bool has_stage_two = a2.has_value() && y2.has_value();
  const bool no_stage_two = !a2.has_value() && !y2.has_value();
  if (!(utility >= 0.0) || !std::isfinite(utility)) return false;
  return reached_stage_two() ? has_stage_two : no_stage_two;
}

UtilityRow UtilityRow::stage_one(Action a1) noexcept {
  return UtilityRow{a1, Outcome::None, std::nullopt, std::nullopt};
}

UtilityRow UtilityRow::stage_two(Action a1, Action a2, Outcome y2) noexcept {
  return UtilityRow{a1, Outcome::Event, a2, y2};
}

UtilityRow UtilityRow::terminal_row(const PatientRecord& record) {
  if (!record.well_formed()) {
    throw std::invalid_argument("patient record has stage-2 fields inconsistent with y1");
  }
  if (!record.reached_stage_two()) return stage_one(record.a1);
  return stage_two(record.a1, *record.a2, *record.y2);
}

std::size_t UtilityRow::index() const {
  const std::size_t base = 5 * index_of(a1);
  if (y1 == Outcome::None) {
    if (a2 || y2) throw std::invalid_argument("stage-1 utility row cannot carry stage-2 fields");
    return base;
  }
  if (!a2 || !y2) throw std::invalid_argument("stage-2 utility row needs a2 and y2");
  return base + 1 + 2 * index_of(*a2) + static_cast<std::size_t>(to_int(*y2));
}

std::string UtilityRow::label() const {
  std::string s = "(a1=" + std::to_string(to_int(a1)) + ", y1=" + std::to_string(to_int(y1));
  if (a2) s += ", a2=" + std::to_string(to_int(*a2));
  if (y2) s += ", y2=" + std::to_string(to_int(*y2));
  return s + ")";
}

std::array<UtilityRow, UtilityTable::kRows> UtilityTable::rows() {
  std::array<UtilityRow, kRows> out{};
  for (Action a1 : kActions) {
    out[UtilityRow::stage_one(a1).index()] = UtilityRow::stage_one(a1);
    for (Action a2 : kActions) {
      for (Outcome y2 : {Outcome::None, Outcome::Event}) {
        const auto row = UtilityRow::stage_two(a1, a2, y2);
        out[row.index()] = row;
      }
    }
  }
  return out;
}

UtilityTable UtilityTable::defaults() {
  UtilityTable table;
  for (const auto& row : rows()) {
    const bool died = row.y2.has_value() && *row.y2 == Outcome::Event;
    table.set(row, died ? 0.0 : 1.0);
  }
  return table;
}

UtilityTable& UtilityTable::set(const UtilityRow& row, double utility) {
  if (!std::isfinite(utility) || utility < 0.0) {
    throw ConfigError("utility for row " + row.label() + " must be finite and non-negative, got " +
                      format_real(utility));
  }
  entries_[row.index()] = utility;
  return *this;
}

double UtilityTable::at(const UtilityRow& row) const {
  const auto& entry = entries_[row.index()];
  if (!entry) throw ConfigError("utility table has no entry for row " + row.label());
  return *entry;
}

bool UtilityTable::contains(const UtilityRow& row) const {
  return entries_[row.index()].has_value();
}

std::vector<UtilityRow> UtilityTable::missing_rows() const {
  std::vector<UtilityRow> missing;
  for (const auto& row : rows()) {
    if (!contains(row)) missing.push_back(row);
  }
  return missing;
}

void UtilityTable::require_complete() const {
  const auto missing = missing_rows();
  if (missing.empty()) return;
  std::string msg = "utility table is missing rows:";
  for (const auto& row : missing) msg += " " + row.label();
  throw ConfigError(msg);
}

double UtilityTable::min_value() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& e : entries_) {
    if (e) m = std::min(m, *e);
  }
  return m;
}

double UtilityTable::max_value() const {
  double m = -std::numeric_limits<double>::infinity();
  for (const auto& e : entries_) {
    if (e) m = std::max(m, *e);
  }
  return m;
}

UtilityTable UtilityTable::scaled(double factor) const {
  if (!(factor > 0.0) || !std::isfinite(factor)) {
    throw std::invalid_argument("utility scale factor must be positive");
  }
  UtilityTable out;
  for (std::size_t i = 0; i < kRows; ++i) {
    if (entries_[i]) out.entries_[i] = *entries_[i] * factor;
  }
  return out;
}

double utility_lookup(const UtilityTable& table, const PatientRecord& record) {
  return table.at(UtilityRow::terminal_row(record));
}

}  // namespace smartq
