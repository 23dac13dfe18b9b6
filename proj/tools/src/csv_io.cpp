#include "smartq_cli/csv_io.hpp"

#include <fstream>
#include <ostream>
#include <sstream>

#include "smartq/format.hpp"

namespace smartq::cli {

namespace {

std::string opt_int(const auto& value) {
  return value ? std::to_string(static_cast<int>(*value)) : std::string{};
}

std::string history_tag(const History& h) {
  if (h.stage() == Stage::One) return "h1";
  if (h.pooled()) return "pooled";
  return "a1_" + std::to_string(to_int(*h.stage1_action()));
}

std::string real(double v) { return format_real(v); }

class CsvReader {
 public:
  CsvReader(const std::filesystem::path& path, const char* expected_header)
      : path_(path), in_(path) {
    if (!in_) throw ConfigError("cannot open " + path.string());
    std::string header;
    if (!std::getline(in_, header)) throw ConfigError(path.string() + ": empty file");
    strip(header);
    if (header != expected_header) {
      throw ConfigError(path.string() + ": expected header '" + expected_header + "', got '" +
                        header + "'");
    }
    line_no_ = 1;
  }

  // Next non-empty row, or false at end of file.
  bool next(std::vector<std::string>& fields) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      strip(line);
      if (line.empty()) continue;
      fields = split_csv_line(line);
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError(path_.string() + ":" + std::to_string(line_no_) + ": " + what);
  }

  double real_at(const std::vector<std::string>& f, std::size_t i) const {
    const auto v = parse_real(f.at(i));
    if (!v) fail("field " + std::to_string(i + 1) + " is not a number: '" + f.at(i) + "'");
    return *v;
  }

  int int_at(const std::vector<std::string>& f, std::size_t i) const {
    const auto v = parse_integer(f.at(i));
    if (!v) fail("field " + std::to_string(i + 1) + " is not an integer: '" + f.at(i) + "'");
    return static_cast<int>(*v);
  }

  void require_fields(const std::vector<std::string>& f, std::size_t n) const {
    if (f.size() != n) {
      fail("expected " + std::to_string(n) + " fields, got " + std::to_string(f.size()));
    }
  }

 private:
  static void strip(std::string& line) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
  }

  std::filesystem::path path_;
  std::ifstream in_;
  long line_no_ = 0;
};

}  // namespace

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

void write_patients(std::ostream& os, std::span<const PatientRecord> records) {
  os << kPatientsHeader << '\n';
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    os << i + 1 << ',' << to_int(r.a1) << ',' << to_int(r.y1) << ',' << opt_int(r.a2) << ','
       << opt_int(r.y2) << ',' << real(r.utility) << '\n';
  }
}

void write_allocations(std::ostream& os, std::span<const AllocationSnapshot> snapshots) {
  os << kAllocationsHeader << '\n';
  auto row = [&](int analysis, const AllocationProbs& a) {
    os << analysis << ',' << static_cast<int>(a.history.stage()) << ',' << history_tag(a.history)
       << ',' << real(a.probs[0]) << ',' << real(a.probs[1]) << '\n';
  };
  for (const auto& snap : snapshots) {
    row(snap.analysis, snap.stage1);
    for (const auto& a : snap.stage2) row(snap.analysis, a);
  }
}

void write_replicates(std::ostream& os, const SweepResult& result) {
  os << kReplicatesHeader << '\n';
  for (const auto& r : result.rows) {
    const std::string prefix = real(r.scenario.r0) + ',' + real(r.scenario.r1) + ',' +
                               real(r.scenario.s0) + ',' + real(r.scenario.s1) + ',' +
                               (r.myopic ? "1" : "0") + ',' + real(r.adapt_exponent) + ',';
    for (std::size_t k = 0; k < r.replicate_u.size(); ++k) {
      os << prefix << k << ',' << real(r.replicate_u[k]) << '\n';
    }
  }
}

void write_aggregate(std::ostream& os, std::span<const AggregateRow> rows) {
  os << kAggregateHeader << '\n';
  for (const auto& r : rows) {
    os << real(r.scenario.r0) << ',' << real(r.scenario.r1) << ',' << real(r.scenario.s0) << ','
       << real(r.scenario.s1) << ',' << (r.myopic ? 1 : 0) << ',' << real(r.adapt_exponent) << ','
       << real(r.u_bar_bar) << ',' << real(r.std_err) << '\n';
  }
}

void write_long_relative(std::ostream& os, std::span<const RelativeRow> rows) {
  os << kLongRelativeHeader << '\n';
  for (const auto& r : rows) {
    os << real(r.scenario.r0) << ',' << real(r.scenario.r1) << ',' << real(r.scenario.s0) << ','
       << real(r.scenario.s1) << ',' << (r.myopic ? 1 : 0) << ',' << real(r.rel) << '\n';
  }
}

void write_panel(std::ostream& os, const FigurePanel& panel) {
  os << "r1\\r0";
  for (double r0 : panel.r_axis) os << ',' << real(r0);
  os << '\n';
  for (std::size_t i = 0; i < panel.r_axis.size(); ++i) {
    os << real(panel.r_axis[i]);
    for (double v : panel.values[i]) os << ',' << real(v);
    os << '\n';
  }
}

std::string panel_filename(bool myopic, const FigurePanel& panel) {
  return "rel_u_m" + std::string(myopic ? "1" : "0") + "_s0_" + real(panel.s0) + "_s1_" +
         real(panel.s1) + ".csv";
}

std::vector<AggregateRow> read_aggregate(const std::filesystem::path& path) {
  CsvReader reader(path, kAggregateHeader);
  std::vector<AggregateRow> rows;
  std::vector<std::string> f;
  while (reader.next(f)) {
    reader.require_fields(f, 8);
    AggregateRow r;
    r.scenario = {reader.real_at(f, 0), reader.real_at(f, 1), reader.real_at(f, 2),
                  reader.real_at(f, 3)};
    const int m = reader.int_at(f, 4);
    if (m != 0 && m != 1) reader.fail("m must be 0 or 1");
    r.myopic = m == 1;
    r.adapt_exponent = reader.real_at(f, 5);
    r.u_bar_bar = reader.real_at(f, 6);
    r.std_err = reader.real_at(f, 7);
    rows.push_back(r);
  }
  return rows;
}

std::vector<Scenario> read_grid(const std::filesystem::path& path) {
  CsvReader reader(path, kGridHeader);
  std::vector<Scenario> out;
  std::vector<std::string> f;
  while (reader.next(f)) {
    reader.require_fields(f, 4);
    out.push_back({reader.real_at(f, 0), reader.real_at(f, 1), reader.real_at(f, 2),
                   reader.real_at(f, 3)});
  }
  if (out.empty()) throw ConfigError(path.string() + ": grid file has no scenarios");
  return out;
}

UtilityTable read_utilities(const std::filesystem::path& path, UtilityTable base) {
  CsvReader reader(path, kUtilityHeader);
  std::vector<std::string> f;
  while (reader.next(f)) {
    reader.require_fields(f, 5);
    try {
      const Action a1 = action_from_int(reader.int_at(f, 0));
      const Outcome y1 = outcome_from_int(reader.int_at(f, 1));
      const double u = reader.real_at(f, 4);
      if (y1 == Outcome::None) {
        if (!f[2].empty() || !f[3].empty()) reader.fail("uninfected rows leave a2 and y2 empty");
        base.set(UtilityRow::stage_one(a1), u);
      } else {
        base.set(UtilityRow::stage_two(a1, action_from_int(reader.int_at(f, 2)),
                                       outcome_from_int(reader.int_at(f, 3))),
                 u);
      }
    } catch (const std::invalid_argument& e) {
      reader.fail(e.what());
    } catch (const ConfigError& e) {
      reader.fail(e.what());
    }
  }
  return base;
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << content;
  out.close();
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace smartq::cli
