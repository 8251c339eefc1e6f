#pragma once

// End-to-end flow and the three-way comparison: traditional scan, input
// control on the primary inputs only, and the proposed mux + pattern scheme.

#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "scanpower/bench.hpp"
#include "scanpower/leakage.hpp"
#include "scanpower/observability.hpp"
#include "scanpower/pattern.hpp"
#include "scanpower/rng.hpp"
#include "scanpower/scan.hpp"
#include "scanpower/techmap.hpp"
#include "scanpower/timing.hpp"

namespace scanpower {

class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& what)
      : Error(stage + ": " + what), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

inline constexpr std::array<ScanMode, 3> kScanModes{ScanMode::Traditional, ScanMode::InputControl,
                                                    ScanMode::Proposed};
inline constexpr std::size_t kDefaultVectorCount = 100;
inline constexpr std::size_t kAutoExhaustiveInputs = 16;

struct ModePower {
  double dynamic_per_hz = 0.0;  // uW/Hz
  double static_uw = 0.0;       // uW

  bool operator==(const ModePower&) const = default;
};

inline double improvement(double baseline, double proposed) {
  if (baseline == 0.0) return 0.0;
  return 100.0 * (baseline - proposed) / baseline;
}

struct PowerReport {
  std::string circuit;
  std::size_t gates = 0;
  std::size_t pseudo_inputs = 0;
  std::size_t multiplexed = 0;
  std::size_t vectors = 0;
  bool generated_vectors = false;  // seeded LFSR instead of a vector file
  std::array<ModePower, 3> modes{};

  const ModePower& operator[](ScanMode m) const { return modes[static_cast<std::size_t>(m)]; }
  ModePower& operator[](ScanMode m) { return modes[static_cast<std::size_t>(m)]; }

  double dynamic_improvement(ScanMode baseline) const {
    return improvement((*this)[baseline].dynamic_per_hz, (*this)[ScanMode::Proposed].dynamic_per_hz);
  }
  double static_improvement(ScanMode baseline) const {
    return improvement((*this)[baseline].static_uw, (*this)[ScanMode::Proposed].static_uw);
  }

  bool operator==(const PowerReport&) const = default;
};

struct PipelineConfig {
  LeakageTable table = bundled_leakage_table();
  DelayModel delays;
  CapacitanceModel cap;
  double vdd = 0.9;
  SearchConfig search;          // search.seed is replaced by the derived fill seed
  std::uint64_t seed = 1;
  std::optional<ObservabilityMode> lo_mode;  // unset: exhaustive up to 16 inputs
};

// Everything the flow produced, for reports and inspection.
struct PipelineResult {
  PowerReport report;
  Circuit mapped;          // traditional and input-control circuit
  Circuit multiplexed;     // after the mux pass, before reordering
  Circuit proposed;        // multiplexed and reordered
  LeakageObservability lo;
  PatternResult search;
  Assignment pattern;      // filled controlled-input pattern of the proposed scheme
  Assignment input_control_pattern;
  std::array<ShiftActivity, 3> activity{};
};

namespace detail {

template <typename F>
auto stage(const char* name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

inline double chain_averaged_static(const Circuit& c, ScanMode mode, const Assignment& pattern,
                                    const LeakageTable& t, double vdd) {
  double sum = 0.0;
  for (Logic3 chain : {Logic3::Zero, Logic3::One}) {
    sum += static_power(c, scan_steady_state(c, mode, pattern, chain), t, vdd);
  }
  return 0.5 * sum;
}

// Average switched capacitance per cycle, as power per Hz in uW/Hz.
inline double per_cycle_dynamic(const ShiftActivity& act, double vdd, const CapacitanceModel& cap) {
  if (act.cycles() == 0) return 0.0;
  SwitchedCap total = act.total();
  total.load /= static_cast<double>(act.cycles());
  total.internal /= static_cast<double>(act.cycles());
  return dynamic_power_per_hz(total, vdd, cap.vth) * 1e6;
}

}  // namespace detail

inline ObservabilityMode auto_observability_mode(const Circuit& c, std::uint64_t seed) {
  if (c.controlled_inputs().size() <= kAutoExhaustiveInputs) return ObservabilityMode::exhaustive();
  return ObservabilityMode::sampled(4096, derive_seed(seed, "lobs"));
}

inline std::vector<TestVector> default_vectors(const Circuit& c, std::uint64_t seed) {
  return lfsr_vectors(derive_seed(seed, "vectors"), kDefaultVectorCount, c.scan_chain_order().size());
}

// parse -> tech_map -> add_muxes -> observability -> pattern -> fill ->
// reorder -> activity and static power per mode. Without `vectors`, a seeded
// LFSR set is used and flagged in the report.
inline PipelineResult run_pipeline(const Circuit& parsed, std::optional<std::vector<TestVector>> vectors,
                                   const PipelineConfig& cfg) {
  PipelineResult r;
  r.report.circuit = parsed.name();
  r.report.generated_vectors = !vectors.has_value();
  if (!vectors) vectors = default_vectors(parsed, cfg.seed);
  r.report.vectors = vectors->size();

  r.mapped = detail::stage("tech_map", [&] { return tech_map(parsed); });
  detail::stage("leakage table", [&] {
    cfg.table.require(r.mapped);
    return 0;
  });
  r.multiplexed = detail::stage("add_muxes", [&] { return add_muxes(r.mapped, cfg.delays); });
  r.report.gates = r.mapped.gate_count();
  r.report.pseudo_inputs = r.mapped.pseudo_inputs().size();
  r.report.multiplexed = r.multiplexed.multiplexed().size();

  r.lo = detail::stage("observability", [&] {
    auto mode = cfg.lo_mode.value_or(auto_observability_mode(r.multiplexed, cfg.seed));
    return leakage_observability(r.multiplexed, cfg.table, mode);
  });

  SearchConfig search = cfg.search;
  search.seed = derive_seed(cfg.seed, "fill");
  r.search = detail::stage("pattern", [&] {
    return find_controlled_input_pattern(r.multiplexed, r.lo.value, search, cfg.cap);
  });
  r.pattern = detail::stage("fill", [&] { return fill_dont_cares(r.multiplexed, r.search.pattern, cfg.table, search); });
  r.proposed = detail::stage("reorder", [&] {
    std::array<Assignment, 2> states{
        scan_steady_state(r.multiplexed, ScanMode::Proposed, r.pattern, Logic3::Zero),
        scan_steady_state(r.multiplexed, ScanMode::Proposed, r.pattern, Logic3::One)};
    return reorder_inputs(r.multiplexed, std::span<const Assignment>(states), cfg.table);
  });

  // Baseline: undirected search over the primary inputs, X parked at 0.
  r.input_control_pattern = detail::stage("input-control pattern", [&] {
    Assignment p = find_controlled_input_pattern(r.mapped, {}, search, cfg.cap).pattern;
    for (LineId in : r.mapped.primary_inputs()) {
      if (p[in] == Logic3::X) p[in] = Logic3::Zero;
    }
    return p;
  });

  detail::stage("power", [&] {
    const Assignment none(r.mapped.line_count());
    struct Run {
      const Circuit* circuit;
      const Assignment* pattern;
    };
    const std::array<Run, 3> runs{Run{&r.mapped, &none}, Run{&r.mapped, &r.input_control_pattern},
                                  Run{&r.proposed, &r.pattern}};
    for (std::size_t i = 0; i < kScanModes.size(); ++i) {
      const ScanMode mode = kScanModes[i];
      const auto& run = runs[i];
      r.activity[i] = scan_shift_activity(*run.circuit, *vectors, mode, *run.pattern, cfg.cap);
      r.report[mode].dynamic_per_hz = detail::per_cycle_dynamic(r.activity[i], cfg.vdd, cfg.cap);
      r.report[mode].static_uw =
          detail::chain_averaged_static(*run.circuit, mode, *run.pattern, cfg.table, cfg.vdd);
    }
    return 0;
  });
  return r;
}

inline PipelineResult run_pipeline(std::string_view bench_text, std::string name,
                                   std::optional<std::vector<TestVector>> vectors,
                                   const PipelineConfig& cfg) {
  Circuit parsed = detail::stage("parse", [&] { return parse_bench(bench_text, std::move(name)); });
  return run_pipeline(parsed, std::move(vectors), cfg);
}

// ---------------------------------------------------------------------------
// Output

enum class ReportFormat { Table, Csv };

namespace detail {

inline std::string shortest(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

inline std::string printf_str(const char* fmt, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

inline std::vector<std::string> split_csv(std::string_view line) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    auto comma = line.find(',', pos);
    out.emplace_back(trim(line.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos)));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

}  // namespace detail

inline constexpr std::string_view kReportCsvHeader =
    "circuit,gates,pseudo_inputs,multiplexed,vectors,vector_source,"
    "traditional_dynamic_uw_per_hz,traditional_static_uw,"
    "input_control_dynamic_uw_per_hz,input_control_static_uw,"
    "proposed_dynamic_uw_per_hz,proposed_static_uw,"
    "dynamic_improvement_vs_traditional_pct,static_improvement_vs_traditional_pct,"
    "dynamic_improvement_vs_input_control_pct,static_improvement_vs_input_control_pct";

inline std::string report_csv_row(const PowerReport& r) {
  using detail::shortest;
  std::string row = r.circuit + "," + std::to_string(r.gates) + "," + std::to_string(r.pseudo_inputs) + "," +
                    std::to_string(r.multiplexed) + "," + std::to_string(r.vectors) + "," +
                    (r.generated_vectors ? "lfsr" : "file");
  for (ScanMode m : kScanModes) {
    row += "," + shortest(r[m].dynamic_per_hz) + "," + shortest(r[m].static_uw);
  }
  for (ScanMode base : {ScanMode::Traditional, ScanMode::InputControl}) {
    row += "," + shortest(r.dynamic_improvement(base)) + "," + shortest(r.static_improvement(base));
  }
  return row;
}

namespace detail {

inline std::string table_header() {
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "%-10s %7s | %-23s | %-23s | %-23s | %-17s | %-17s\n"
                "%-10s %7s | %11s %11s | %11s %11s | %11s %11s | %8s %8s | %8s %8s\n",
                "", "", "Traditional scan", "Input control", "Proposed", "Impr. vs trad. %",
                "Impr. vs IC %", "Circuit", "MUX/PPI", "Dyn(/f)", "Static", "Dyn(/f)", "Static",
                "Dyn(/f)", "Static", "Dynamic", "Static", "Dynamic", "Static");
  return buf;
}

inline std::string table_row(const PowerReport& r) {
  char buf[512];
  const std::string mux = std::to_string(r.multiplexed) + "/" + std::to_string(r.pseudo_inputs);
  std::snprintf(buf, sizeof buf,
                "%-10s %7s | %11.4e %11.4f | %11.4e %11.4f | %11.4e %11.4f | %8.2f %8.2f | %8.2f %8.2f\n",
                r.circuit.c_str(), mux.c_str(), r[ScanMode::Traditional].dynamic_per_hz,
                r[ScanMode::Traditional].static_uw, r[ScanMode::InputControl].dynamic_per_hz,
                r[ScanMode::InputControl].static_uw, r[ScanMode::Proposed].dynamic_per_hz,
                r[ScanMode::Proposed].static_uw, r.dynamic_improvement(ScanMode::Traditional),
                r.static_improvement(ScanMode::Traditional), r.dynamic_improvement(ScanMode::InputControl),
                r.static_improvement(ScanMode::InputControl));
  return buf;
}

}  // namespace detail

// Several circuits in one report. Table output notes generated vectors and
// units; csv output is the header plus one row per circuit.
inline std::string emit_report(std::span<const PowerReport> reports, ReportFormat format) {
  std::string out;
  if (format == ReportFormat::Csv) {
    out = std::string(kReportCsvHeader) + "\n";
    for (const auto& r : reports) out += report_csv_row(r) + "\n";
    return out;
  }
  out += "# dynamic power per Hz in uW/Hz (per-cycle average), static power in uW\n";
  for (const auto& r : reports) {
    if (r.generated_vectors) {
      out += "# " + r.circuit + ": " + std::to_string(r.vectors) + " generated LFSR vectors\n";
    }
  }
  out += detail::table_header();
  for (const auto& r : reports) out += detail::table_row(r);
  return out;
}

inline std::string emit_report(const PowerReport& r, ReportFormat format) {
  return emit_report(std::span<const PowerReport>(&r, 1), format);
}

// One mode of one circuit, for `analyze`.
inline std::string emit_mode(const PowerReport& r, ScanMode mode, ReportFormat format) {
  const ModePower& p = r[mode];
  if (format == ReportFormat::Csv) {
    return "circuit,mode,dynamic_uw_per_hz,static_uw\n" + r.circuit + "," + std::string(to_string(mode)) +
           "," + detail::shortest(p.dynamic_per_hz) + "," + detail::shortest(p.static_uw) + "\n";
  }
  char buf[256];
  std::snprintf(buf, sizeof buf, "%s (%s): dynamic %.6e uW/Hz, static %.6f uW\n", r.circuit.c_str(),
                std::string(to_string(mode)).c_str(), p.dynamic_per_hz, p.static_uw);
  return buf;
}

// Reads what emit_report(.., Csv) wrote. Improvement columns are derived and
// are checked against the raw columns rather than stored.
inline std::vector<PowerReport> parse_report_csv(std::string_view text) {
  std::vector<PowerReport> out;
  std::size_t lineno = 0;
  std::size_t pos = 0;
  bool header_seen = false;
  auto number = [&](const std::string& s) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) throw ParseError(lineno, "bad number '" + s + "'");
    return v;
  };
  auto count = [&](const std::string& s) {
    std::size_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) throw ParseError(lineno, "bad count '" + s + "'");
    return v;
  };
  while (pos < text.size()) {
    auto eol = text.find('\n', pos);
    auto line = detail::trim(text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos));
    pos = eol == std::string_view::npos ? text.size() : eol + 1;
    ++lineno;
    if (line.empty()) continue;
    if (!header_seen) {
      if (line != kReportCsvHeader) throw ParseError(lineno, "unexpected report header");
      header_seen = true;
      continue;
    }
    auto f = detail::split_csv(line);
    if (f.size() != 16) throw ParseError(lineno, "expected 16 fields, got " + std::to_string(f.size()));
    PowerReport r;
    r.circuit = f[0];
    r.gates = count(f[1]);
    r.pseudo_inputs = count(f[2]);
    r.multiplexed = count(f[3]);
    r.vectors = count(f[4]);
    if (f[5] != "lfsr" && f[5] != "file") throw ParseError(lineno, "vector source must be lfsr or file");
    r.generated_vectors = f[5] == "lfsr";
    for (std::size_t i = 0; i < 3; ++i) {
      r.modes[i].dynamic_per_hz = number(f[6 + 2 * i]);
      r.modes[i].static_uw = number(f[7 + 2 * i]);
    }
    out.push_back(std::move(r));
  }
  if (!header_seen) throw ParseError(lineno, "empty report");
  return out;
}

}  // namespace scanpower
