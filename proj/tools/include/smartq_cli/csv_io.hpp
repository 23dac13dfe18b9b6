#pragma once

// CSV layouts written and read by the command-line tool. Column order is
// fixed; reals use the shortest round-trip representation.

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "smartq/simulator.hpp"
#include "smartq/sweep.hpp"

namespace smartq::cli {

inline constexpr const char* kPatientsHeader = "patient,a1,y1,a2,y2,utility";
inline constexpr const char* kAllocationsHeader = "analysis,stage,history,p_action0,p_action1";
inline constexpr const char* kReplicatesHeader = "r0,r1,s0,s1,m,c,replicate,u_bar";
inline constexpr const char* kAggregateHeader = "r0,r1,s0,s1,m,c,u_bar_bar,std_err";
inline constexpr const char* kLongRelativeHeader = "r0,r1,s0,s1,m,rel_u";
inline constexpr const char* kGridHeader = "r0,r1,s0,s1";
inline constexpr const char* kUtilityHeader = "a1,y1,a2,y2,utility";

std::vector<std::string> split_csv_line(const std::string& line);

void write_patients(std::ostream& os, std::span<const PatientRecord> records);
void write_allocations(std::ostream& os, std::span<const AllocationSnapshot> snapshots);
void write_replicates(std::ostream& os, const SweepResult& result);
void write_aggregate(std::ostream& os, std::span<const AggregateRow> rows);
void write_long_relative(std::ostream& os, std::span<const RelativeRow> rows);
void write_panel(std::ostream& os, const FigurePanel& panel);
std::string panel_filename(bool myopic, const FigurePanel& panel);

// Readers throw ConfigError with the file name and line on malformed input.
std::vector<AggregateRow> read_aggregate(const std::filesystem::path& path);
std::vector<Scenario> read_grid(const std::filesystem::path& path);
// Rows in the file override the corresponding rows of `base`.
UtilityTable read_utilities(const std::filesystem::path& path, UtilityTable base);

// Writes `content` to `path` atomically enough for our purposes: the file is
// truncated and rewritten; throws std::runtime_error on I/O failure.
void write_text_file(const std::filesystem::path& path, const std::string& content);

}  // namespace smartq::cli
