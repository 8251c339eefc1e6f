// scanpower: scan-mode dynamic and static power of one circuit or a
// directory of circuits, with the proposed mux + pattern scheme compared
// against traditional scan and input control.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "scanpower/scanpower.hpp"

namespace fs = std::filesystem;
using namespace scanpower;

namespace {

struct Options {
  std::string bench;
  std::string vectors;
  std::string leakage;
  bool leakage_analytic = false;
  std::string params;
  std::string delays;
  std::optional<double> mux_delay;
  double vdd = 0.9;
  double freq = 0.0;  // only used to print absolute dynamic power
  double unit_cap = 1e-15;
  std::uint64_t seed = 1;
  std::size_t fill_trials = 1000;
  std::size_t backtrack_limit = 1000;
  bool literal_step_f = false;
  std::string format = "table";
  std::string out;
  std::string scan_order;
  std::string pattern_out;
  std::string report_out;
  std::string mode = "proposed";
};

void add_common(CLI::App* app, Options& o) {
  app->add_option("--vectors", o.vectors, "Test vectors, one 0/1 string per line in scan-in order")
      ->check(CLI::ExistingFile);
  auto* table = app->add_option("--leakage", o.leakage, "Leakage table CSV (kind,arity,pattern,leak_nA)")
                    ->check(CLI::ExistingFile);
  auto* analytic = app->add_flag("--leakage-analytic", o.leakage_analytic,
                                 "Build the leakage table from the analytic device model");
  table->excludes(analytic);
  app->add_option("--params", o.params, "Device parameters (key=value) for --leakage-analytic")
      ->check(CLI::ExistingFile);
  app->add_option("--delays", o.delays, "Gate delay table CSV (kind,delay)")->check(CLI::ExistingFile);
  app->add_option("--mux-delay", o.mux_delay, "Delay of an inserted isolation mux")
      ->check(CLI::NonNegativeNumber);
  app->add_option("--vdd", o.vdd, "Supply voltage (V)")->check(CLI::PositiveNumber);
  app->add_option("--freq", o.freq, "Shift clock (Hz); adds absolute dynamic power to table output")
      ->check(CLI::NonNegativeNumber);
  app->add_option("--unit-cap", o.unit_cap, "Capacitance per fanout pin (F)")->check(CLI::PositiveNumber);
  app->add_option("--seed", o.seed, "Run seed; every random stream derives from it");
  app->add_option("--fill-trials", o.fill_trials, "Random completions tried for don't-cares")
      ->check(CLI::Range(std::size_t{1}, std::numeric_limits<std::size_t>::max()));
  app->add_option("--backtrack-limit", o.backtrack_limit, "Backtracks per justification objective")
      ->check(CLI::Range(std::size_t{1}, std::numeric_limits<std::size_t>::max()));
  app->add_flag("--literal-step-f", o.literal_step_f,
                "Add a target gate's fanout to the transition set even when it was blocked");
  app->add_option("--format", o.format, "Output format")->check(CLI::IsMember({"table", "csv"}));
  app->add_option("--out", o.out, "Write the report here instead of stdout");
}

std::string slurp(const std::string& path) { return scanpower::detail::read_file(path); }

PipelineConfig make_config(const Options& o) {
  PipelineConfig cfg;
  DeviceParams params;
  if (!o.params.empty()) params = parse_device_params(slurp(o.params));
  params.vdd = o.vdd;
  if (!o.leakage.empty()) {
    cfg.table = parse_leakage_table(slurp(o.leakage));
  } else if (o.leakage_analytic) {
    cfg.table = calibrated_leakage_table(params);
  }
  if (!o.delays.empty()) cfg.delays = parse_delay_table(slurp(o.delays));
  if (o.mux_delay) cfg.delays.mux_delay = *o.mux_delay;
  cfg.cap.unit_cap = o.unit_cap;
  cfg.vdd = o.vdd;
  cfg.seed = o.seed;
  cfg.search.fill_trials = o.fill_trials;
  cfg.search.backtrack_limit = o.backtrack_limit;
  cfg.search.literal_step_f = o.literal_step_f;
  return cfg;
}

PipelineResult run_one(const Options& o, const std::string& bench_path, const PipelineConfig& cfg) {
  Circuit parsed = scanpower::detail::stage("parse", [&] { return read_bench(bench_path); });
  if (!o.scan_order.empty()) {
    parsed = scanpower::detail::stage("scan order", [&] {
      return with_scan_order(parsed, parse_scan_order(parsed, slurp(o.scan_order)));
    });
  }
  std::optional<std::vector<TestVector>> vectors;
  if (!o.vectors.empty()) {
    vectors = scanpower::detail::stage("vectors", [&] {
      return parse_vectors(slurp(o.vectors), parsed.scan_chain_order().size());
    });
  }
  return run_pipeline(parsed, std::move(vectors), cfg);
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write '" + path + "'");
  f << text;
}

ReportFormat format_of(const Options& o) { return o.format == "csv" ? ReportFormat::Csv : ReportFormat::Table; }

std::string absolute_dynamic_note(const PowerReport& r, double freq) {
  if (freq <= 0.0) return {};
  std::string out;
  for (ScanMode m : kScanModes) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "# %s %s: %.6g uW at %.6g Hz\n", r.circuit.c_str(),
                  std::string(to_string(m)).c_str(), r[m].dynamic_per_hz * freq, freq);
    out += buf;
  }
  return out;
}

void side_outputs(const Options& o, const PipelineResult& r) {
  if (!o.pattern_out.empty()) write_text(o.pattern_out, format_pattern(r.multiplexed, r.pattern));
  if (!o.report_out.empty()) write_text(o.report_out, format_blocking_report(r.multiplexed, r.search.report));
}

int cmd_analyze(const Options& o) {
  const auto cfg = make_config(o);
  auto r = run_one(o, o.bench, cfg);
  side_outputs(o, r);
  ScanMode mode = o.mode == "traditional"     ? ScanMode::Traditional
                  : o.mode == "input_control" ? ScanMode::InputControl
                                              : ScanMode::Proposed;
  write_text(o.out, emit_mode(r.report, mode, format_of(o)));
  return 0;
}

int cmd_compare(const Options& o) {
  const auto cfg = make_config(o);
  auto r = run_one(o, o.bench, cfg);
  side_outputs(o, r);
  std::string text = emit_report(r.report, format_of(o));
  if (format_of(o) == ReportFormat::Table) text = absolute_dynamic_note(r.report, o.freq) + text;
  write_text(o.out, text);
  return 0;
}

int cmd_table(const Options& o) {
  const auto cfg = make_config(o);
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(o.bench)) {
    if (entry.is_regular_file() && entry.path().extension() == ".bench") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw Error("no .bench files in '" + o.bench + "'");
  if (!o.vectors.empty()) throw Error("table runs use generated vectors; --vectors is per-circuit");

  std::vector<std::future<PowerReport>> jobs;
  for (const auto& f : files) {
    jobs.push_back(std::async(std::launch::async, [&o, &cfg, f] {
      try {
        return run_one(o, f.string(), cfg).report;
      } catch (const std::exception& e) {
        throw Error(f.filename().string() + ": " + e.what());
      }
    }));
  }
  std::vector<PowerReport> reports;
  for (auto& j : jobs) reports.push_back(j.get());
  write_text(o.out, emit_report(reports, format_of(o)));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Scan-mode dynamic and static power analysis"};
  app.require_subcommand(1);
  Options o;

  auto* analyze = app.add_subcommand("analyze", "Power of one circuit under one scan mode");
  analyze->add_option("--bench", o.bench, "Netlist (.bench)")->required()->check(CLI::ExistingFile);
  analyze->add_option("--mode", o.mode, "Scan mode")
      ->check(CLI::IsMember({"traditional", "input_control", "proposed"}));
  add_common(analyze, o);

  auto* compare = app.add_subcommand("compare", "All three scan modes for one circuit");
  compare->add_option("--bench", o.bench, "Netlist (.bench)")->required()->check(CLI::ExistingFile);
  add_common(compare, o);

  auto* table = app.add_subcommand("table", "All three modes for every .bench file in a directory");
  table->add_option("--bench", o.bench, "Directory of .bench netlists")->required()->check(CLI::ExistingDirectory);
  add_common(table, o);

  for (auto* sub : {analyze, compare}) {
    sub->add_option("--scan-order", o.scan_order, "Scan chain order, one pseudo-input per line")
        ->check(CLI::ExistingFile);
    sub->add_option("--pattern-out", o.pattern_out, "Write the controlled-input pattern (name=0|1|X)");
    sub->add_option("--report-out", o.report_out, "Write the per-gate blocking report (CSV)");
  }

  auto* leak = app.add_subcommand("leakage-table", "Print the calibrated leakage table");
  std::string leak_params;
  bool leak_bundled = true;
  leak->add_option("--params", leak_params, "Device parameters (key=value)")->check(CLI::ExistingFile);
  leak->add_flag("!--uncalibrated", leak_bundled, "Skip the NAND2 scaling and anchor rows");
  leak->add_option("--out", o.out, "Write here instead of stdout");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*analyze) return cmd_analyze(o);
    if (*compare) return cmd_compare(o);
    if (*table) return cmd_table(o);
    if (*leak) {
      DeviceParams p;
      if (!leak_params.empty()) p = parse_device_params(slurp(leak_params));
      auto t = leak_bundled ? bundled_leakage_table(p) : build_leakage_table(p, library_cells());
      write_text(o.out, format_leakage_table(t));
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "scanpower: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
