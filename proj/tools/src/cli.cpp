#include "smartq_cli/cli.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "smartq/format.hpp"
#include "smartq/grid.hpp"
#include "smartq/simulator.hpp"
#include "smartq/sweep.hpp"
#include "smartq_cli/csv_io.hpp"
#include "smartq_cli/manifest.hpp"

#ifndef SMARTQ_VERSION
#define SMARTQ_VERSION "unknown"
#endif

namespace fs = std::filesystem;

namespace smartq::cli {

namespace {

using Json = nlohmann::ordered_json;
using Clock = std::chrono::system_clock;

// Raised for problems the user can fix by changing flags or files.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DesignFlags {
  std::string engine = "conjugate";
  int patients = 2000;
  int interims = 4;
  std::string utilities;
  double min_alloc = 0.0;
  double prior_alpha = 1.0;
  double prior_beta = 1.0;
  double coef_mean = 0.0;
  double coef_sd = 2.5;
  int chains = 4;
  int warmup = 1000;
  int sampling = 1000;
  bool parallel_chains = false;
  double rhat_threshold = 1.05;

  void attach(CLI::App& app) {
    app.add_option("--engine", engine, "posterior engine")
        ->check(CLI::IsMember({"conjugate", "mcmc"}))
        ->capture_default_str();
    app.add_option("--patients", patients, "maximum sample size")->capture_default_str();
    app.add_option("--interims", interims, "number of analyses, the last one final")
        ->capture_default_str();
    app.add_option("--utilities", utilities, "CSV a1,y1,a2,y2,utility overriding default rows");
    app.add_option("--min-alloc", min_alloc, "floor on every allocation probability")
        ->capture_default_str();
    app.add_option("--prior-alpha", prior_alpha, "Beta prior alpha")->capture_default_str();
    app.add_option("--prior-beta", prior_beta, "Beta prior beta")->capture_default_str();
    app.add_option("--coef-mean", coef_mean, "normal prior mean for coefficients")
        ->capture_default_str();
    app.add_option("--coef-sd", coef_sd, "normal prior sd for coefficients")
        ->capture_default_str();
    app.add_option("--chains", chains, "MCMC chains")->capture_default_str();
    app.add_option("--warmup", warmup, "MCMC warmup iterations per chain")->capture_default_str();
    app.add_option("--sampling", sampling, "MCMC sampling iterations per chain")
        ->capture_default_str();
    app.add_flag("--parallel-chains", parallel_chains, "run MCMC chains concurrently");
    app.add_option("--rhat-threshold", rhat_threshold, "warn when split R-hat exceeds this")
        ->capture_default_str();
  }

  DesignConfig make(bool myopic, double c) const {
    DesignConfig d = DesignConfig::table_cell(myopic, c);
    d.max_patients = patients;
    d.num_interims = interims;
    d.min_alloc_prob = min_alloc;
    d.prior = {prior_alpha, prior_beta, coef_mean, coef_sd};
    d.engine.engine = parse_engine(engine);
    d.engine.mcmc.chains = chains;
    d.engine.mcmc.warmup = warmup;
    d.engine.mcmc.sampling = sampling;
    d.engine.mcmc.parallel_chains = parallel_chains;
    d.engine.mcmc.rhat_threshold = rhat_threshold;
    if (!utilities.empty()) d.utilities = read_utilities(utilities, UtilityTable::defaults());
    d.validate();
    return d;
  }

  Json to_json() const {
    Json j;
    j["engine"] = engine;
    j["patients"] = patients;
    j["interims"] = interims;
    j["utilities"] = utilities;
    j["min-alloc"] = min_alloc;
    j["prior-alpha"] = prior_alpha;
    j["prior-beta"] = prior_beta;
    j["coef-mean"] = coef_mean;
    j["coef-sd"] = coef_sd;
    j["chains"] = chains;
    j["warmup"] = warmup;
    j["sampling"] = sampling;
    j["parallel-chains"] = parallel_chains;
    j["rhat-threshold"] = rhat_threshold;
    return j;
  }
};

struct SimulateFlags {
  DesignFlags design;
  double r0 = 0.0, r1 = 0.0, s0 = 0.0, s1 = 0.0;
  int m = 0;
  double c = 0.0;
  std::uint64_t seed = 0;
  std::string out = ".";
};

struct SweepFlags {
  DesignFlags design;
  std::string grid = "full";
  std::string grid_file;
  std::vector<std::string> designs{"all"};
  int replicates = 10;
  std::uint64_t base_seed = 0;
  unsigned threads = 0;
  std::string out_dir = ".";
  bool independent_streams = false;
  bool progress = false;
};

struct ReportFlags {
  std::string in;
  int m = 0;
  std::string format = "csv-matrix";
  std::string out_dir = ".";
  std::string out;
};

// Creates `dir` and proves it accepts files.
void ensure_writable_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw UsageError("output directory " + dir.string() + " cannot be created");
  }
  const fs::path probe = dir / ".smartq-write-probe";
  {
    std::ofstream f(probe);
    if (!f) throw UsageError("output directory " + dir.string() + " is not writable");
  }
  fs::remove(probe, ec);
}

template <class Writer>
void write_csv(const fs::path& path, Writer&& writer) {
  std::ostringstream ss;
  writer(ss);
  write_text_file(path, ss.str());
}

DesignConfig parse_design_label(const std::string& label, const DesignFlags& flags) {
  if (label.size() < 4 || label[0] != 'm' || (label[1] != '0' && label[1] != '1') ||
      label[2] != 'c') {
    throw UsageError("design '" + label + "' is not of the form m<0|1>c<exponent>");
  }
  const auto c = parse_real(std::string_view(label).substr(3));
  if (!c || !std::isfinite(*c) || *c < 0.0) {
    throw UsageError("design '" + label + "' has an invalid adaptation exponent");
  }
  return flags.make(label[1] == '1', *c);
}

int cmd_simulate(const SimulateFlags& f, std::ostream& out, std::ostream& err) {
  const auto started = Clock::now();
  const Scenario scenario{f.r0, f.r1, f.s0, f.s1};
  scenario.validate();
  DesignConfig design = f.design.make(f.m == 1, f.c);
  design.seed = f.seed;

  const fs::path dir = f.out;
  ensure_writable_dir(dir);
  const TrialResult result = run_trial(scenario, design, RunOptions{true});

  write_csv(dir / "patients.csv", [&](std::ostream& os) { write_patients(os, *result.records); });
  write_csv(dir / "allocations.csv",
            [&](std::ostream& os) { write_allocations(os, result.snapshots); });

  RunManifest manifest;
  manifest.command = "simulate";
  manifest.config = f.design.to_json();
  manifest.config["r0"] = f.r0;
  manifest.config["r1"] = f.r1;
  manifest.config["s0"] = f.s0;
  manifest.config["s1"] = f.s1;
  manifest.config["m"] = f.m;
  manifest.config["c"] = f.c;
  manifest.config["seed"] = f.seed;
  manifest.base_seed = f.seed;
  manifest.engine = f.design.engine;
  manifest.started_at = started;
  manifest.finished_at = Clock::now();
  manifest.outputs = {"patients.csv", "allocations.csv"};
  manifest.write(dir / "manifest_simulate.json");

  for (const auto& w : result.warnings) err << "warning: " << w << '\n';
  out << "u_bar=" << format_real(result.mean_utility) << '\n';
  return kExitOk;
}

void write_failures(const fs::path& path, const std::vector<TrialFailure>& failures) {
  write_csv(path, [&](std::ostream& os) {
    os << "scenario_index,r0,r1,s0,s1,design,replicate,message\n";
    for (const auto& f : failures) {
      std::string msg = f.message;
      std::replace(msg.begin(), msg.end(), ',', ';');
      std::replace(msg.begin(), msg.end(), '\n', ' ');
      os << f.scenario_index << ',' << format_real(f.scenario.r0) << ','
         << format_real(f.scenario.r1) << ',' << format_real(f.scenario.s0) << ','
         << format_real(f.scenario.s1) << ',' << f.design_label << ',' << f.replicate << ','
         << msg << '\n';
    }
  });
}

int cmd_sweep(const SweepFlags& f, std::ostream& out, std::ostream& err) {
  const auto started = Clock::now();
  SweepConfig config;
  if (f.grid == "full") {
    config.scenarios = scenario_grid(GridAxes::full());
  } else if (f.grid == "reduced") {
    config.scenarios = scenario_grid(GridAxes::reduced());
  } else {
    if (f.grid_file.empty()) throw UsageError("--grid file requires --grid-file");
    config.scenarios = read_grid(f.grid_file);
  }
  if (f.grid != "file" && !f.grid_file.empty()) {
    throw UsageError("--grid-file is only used with --grid file");
  }
  for (const auto& s : config.scenarios) s.validate();

  const bool all = f.designs.size() == 1 && f.designs.front() == "all";
  if (all) {
    for (const auto& d : standard_designs()) config.designs.push_back(f.design.make(d.myopic, d.adapt_exponent));
  } else {
    for (const auto& label : f.designs) config.designs.push_back(parse_design_label(label, f.design));
  }
  if (config.designs.empty()) throw UsageError("--designs names no design");

  config.replicates = f.replicates;
  if (config.replicates < 1) throw UsageError("--replicates must be at least 1");
  config.base_seed = f.base_seed;
  config.threads = f.threads;
  config.common_random_numbers = !f.independent_streams;

  std::mutex progress_mu;
  std::size_t last_percent = 0;
  if (f.progress) {
    config.progress = [&](std::size_t done, std::size_t total) {
      const std::size_t percent = done * 100 / total;
      std::lock_guard lock(progress_mu);
      if (percent != last_percent || done == total) {
        last_percent = percent;
        err << "progress " << done << '/' << total << '\n';
      }
    };
  }

  const fs::path dir = f.out_dir;
  ensure_writable_dir(dir);

  SweepResult result;
  try {
    result = run_sweep(config);
  } catch (const SweepFailure& e) {
    err << "error: " << e.what() << '\n';
    for (const auto& fail : e.failures()) {
      err << "  scenario " << fail.scenario_index << ' ' << fail.scenario.label() << " design "
          << fail.design_label << " replicate " << fail.replicate << ": " << fail.message << '\n';
    }
    write_failures(dir / "failures.csv", e.failures());
    return kExitFailure;
  }

  write_csv(dir / "sweep_replicates.csv", [&](std::ostream& os) { write_replicates(os, result); });
  const auto aggregates = result.aggregates();
  write_csv(dir / "sweep_aggregate.csv", [&](std::ostream& os) { write_aggregate(os, aggregates); });

  RunManifest manifest;
  manifest.command = "sweep";
  manifest.config = f.design.to_json();
  manifest.config["grid"] = f.grid;
  manifest.config["grid-file"] = f.grid_file;
  manifest.config["designs"] = f.designs;
  manifest.config["replicates"] = f.replicates;
  manifest.config["base-seed"] = f.base_seed;
  manifest.config["independent-streams"] = f.independent_streams;
  manifest.config["scenarios"] = config.scenarios.size();
  manifest.base_seed = f.base_seed;
  manifest.engine = f.design.engine;
  manifest.started_at = started;
  manifest.finished_at = Clock::now();
  manifest.outputs = {"sweep_replicates.csv", "sweep_aggregate.csv"};
  manifest.write(dir / "manifest_sweep.json");

  for (const auto& w : result.warnings) err << "warning: " << w << '\n';
  out << "scenarios=" << config.scenarios.size() << " designs=" << config.designs.size()
      << " rows=" << aggregates.size() << '\n';
  return kExitOk;
}

// Grid axes spanned by the rows: r from r0 and r1, s from s0 and s1.
GridAxes infer_axes(std::span<const AggregateRow> rows) {
  std::set<double> r, s;
  for (const auto& row : rows) {
    r.insert(row.scenario.r0);
    r.insert(row.scenario.r1);
    s.insert(row.scenario.s0);
    s.insert(row.scenario.s1);
  }
  return {{r.begin(), r.end()}, {s.begin(), s.end()}};
}

void list_gaps(std::ostream& err, const std::string& what, std::span<const Scenario> gaps) {
  err << "error: " << gaps.size() << " scenario(s) " << what << ":\n";
  for (const auto& s : gaps) err << "  " << s.label() << '\n';
}

int cmd_report(const ReportFlags& f, std::ostream& out, std::ostream& err) {
  const auto started = Clock::now();
  const bool myopic = f.m == 1;
  const auto rows = read_aggregate(f.in);
  if (std::none_of(rows.begin(), rows.end(), [&](const AggregateRow& r) { return r.myopic == myopic; })) {
    err << "error: " << f.in << " has no rows with m=" << f.m << '\n';
    return kExitFailure;
  }
  const auto gaps = missing_design_cells(rows, myopic);
  if (!gaps.empty()) {
    list_gaps(err, "lack a fixed (c=0) or adaptive (c=1) row at m=" + std::to_string(f.m), gaps);
    return kExitFailure;
  }

  std::vector<RelativeRow> relative;
  for (const auto& r : relative_utilities(rows)) {
    if (r.myopic == myopic) relative.push_back(r);
  }
  const auto flagged = std::count_if(relative.begin(), relative.end(),
                                     [](const RelativeRow& r) { return r.flagged; });
  if (flagged > 0) {
    err << "warning: " << flagged << " scenario(s) have a non-positive fixed-design utility; rel_u is nan\n";
  }

  RunManifest manifest;
  manifest.command = "report";
  manifest.config = Json{{"in", f.in}, {"m", f.m}, {"format", f.format}};
  manifest.engine = "n/a";
  manifest.started_at = started;

  if (f.format == "long-csv") {
    if (f.out.empty()) {
      write_long_relative(out, relative);
      return kExitOk;
    }
    const fs::path path = f.out;
    const fs::path dir = path.has_parent_path() ? path.parent_path() : fs::path(".");
    ensure_writable_dir(dir);
    write_csv(path, [&](std::ostream& os) { write_long_relative(os, relative); });
    manifest.outputs = {path.filename()};
    manifest.config["out"] = f.out;
    manifest.finished_at = Clock::now();
    manifest.write(dir / ("manifest_report_m" + std::to_string(f.m) + ".json"));
    return kExitOk;
  }

  FigureBundle bundle;
  try {
    bundle = figure_matrix(relative, myopic, infer_axes(rows));
  } catch (const IncompleteGridError& e) {
    list_gaps(err, "missing from the grid", e.missing());
    return kExitFailure;
  }
  const fs::path dir = f.out_dir;
  ensure_writable_dir(dir);
  for (const auto& panel : bundle.panels) {
    const std::string name = panel_filename(myopic, panel);
    write_csv(dir / name, [&](std::ostream& os) { write_panel(os, panel); });
    manifest.outputs.emplace_back(name);
  }
  manifest.config["out-dir"] = f.out_dir;
  manifest.finished_at = Clock::now();
  manifest.write(dir / ("manifest_report_m" + std::to_string(f.m) + ".json"));
  out << "matrices=" << bundle.panels.size() << '\n';
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Two-stage SMART simulator with Bayesian Q-learning and adaptive randomisation",
               "smartq"};
  app.set_version_flag("--version", SMARTQ_VERSION);
  app.set_config("--config", "", "INI/TOML file; sections [simulate], [sweep], [report]");
  app.require_subcommand(1);
  app.fallthrough();

  SimulateFlags sim;
  auto* simulate = app.add_subcommand("simulate", "run one trial");
  sim.design.attach(*simulate);
  simulate->add_option("--r0", sim.r0, "infection probability under a1=0")->required();
  simulate->add_option("--r1", sim.r1, "infection probability under a1=1")->required();
  simulate->add_option("--s0", sim.s0, "death probability after infection, a1=0")->required();
  simulate->add_option("--s1", sim.s1, "death probability after infection, a1=1")->required();
  simulate->add_option("--m", sim.m, "1 = myopic design")->check(CLI::IsMember({0, 1}))->capture_default_str();
  simulate->add_option("--c", sim.c, "adaptation exponent, 0 = fixed")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  simulate->add_option("--seed", sim.seed, "trial seed")->capture_default_str();
  simulate->add_option("--out", sim.out, "output directory")->capture_default_str();

  SweepFlags sw;
  auto* sweep = app.add_subcommand("sweep", "run a scenario x design x replicate sweep");
  sw.design.attach(*sweep);
  sweep->add_option("--grid", sw.grid, "scenario grid")
      ->check(CLI::IsMember({"full", "reduced", "file"}))
      ->capture_default_str();
  sweep->add_option("--grid-file", sw.grid_file, "CSV r0,r1,s0,s1 for --grid file");
  sweep->add_option("--designs", sw.designs, "'all' or labels such as m0c1")
      ->delimiter(',')
      ->capture_default_str();
  sweep->add_option("--replicates", sw.replicates, "trials per scenario and design")
      ->capture_default_str();
  sweep->add_option("--base-seed", sw.base_seed, "seed all trial seeds derive from")
      ->capture_default_str();
  sweep->add_option("--threads", sw.threads, "worker threads, 0 = all cores")
      ->envname("SMARTQ_THREADS")
      ->capture_default_str();
  sweep->add_option("--out-dir", sw.out_dir, "output directory")
      ->envname("SMARTQ_OUT_DIR")
      ->capture_default_str();
  sweep->add_flag("--independent-streams", sw.independent_streams,
                  "give every design its own random numbers");
  sweep->add_flag("--progress", sw.progress, "report progress on standard error");

  ReportFlags rep;
  auto* report = app.add_subcommand("report", "relative-utility matrices from an aggregate CSV");
  report->add_option("--in", rep.in, "sweep_aggregate.csv")->required();
  report->add_option("--m", rep.m, "design to report")->check(CLI::IsMember({0, 1}))->required();
  report->add_option("--format", rep.format, "output layout")
      ->check(CLI::IsMember({"csv-matrix", "long-csv"}))
      ->capture_default_str();
  report->add_option("--out-dir", rep.out_dir, "directory for csv-matrix files")
      ->envname("SMARTQ_OUT_DIR")
      ->capture_default_str();
  report->add_option("--out", rep.out, "file for long-csv output (default standard output)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(sim, out, err);
    if (sweep->parsed()) return cmd_sweep(sw, out, err);
    return cmd_report(rep, out, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace smartq::cli
