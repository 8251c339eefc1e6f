#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "support/oracles.hpp"

using namespace scanpower;

namespace {

std::string read(const std::string& path) {
  std::ifstream f(path);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

const std::string kRoot = SCANPOWER_SOURCE_DIR;

PipelineResult s27_run(std::uint64_t seed = 1) {
  auto vectors = parse_vectors(read(kRoot + "/data/s27_vectors.txt"), 3);
  PipelineConfig cfg;
  cfg.table = parse_leakage_table(read(kRoot + "/data/leakage_45nm.csv"));
  cfg.seed = seed;
  return run_pipeline(read(kRoot + "/benchmarks/iscas89/s27.bench"), "s27", vectors, cfg);
}

// Power of one mode recomputed with the test oracles.
ModePower oracle_power(const Circuit& c, ScanMode mode, const Assignment& pattern,
                       const std::vector<TestVector>& vectors, const PipelineConfig& cfg) {
  auto rep = oracle::replay(c, vectors, mode, pattern, cfg.cap.unit_cap);
  ModePower p;
  p.dynamic_per_hz = 0.5 * cfg.vdd * cfg.vdd * (rep.shift + rep.capture) / static_cast<double>(rep.cycles) * 1e6;
  double leak = 0.0;
  for (Logic3 chain : {Logic3::Zero, Logic3::One}) {
    std::vector<Logic3> in(c.line_count(), Logic3::Zero);
    for (LineId q : c.pseudo_inputs()) in[q] = chain;
    for (LineId pi : c.primary_inputs()) in[pi] = mode == ScanMode::Traditional ? Logic3::Zero : pattern[pi];
    for (LineId q : c.multiplexed()) {
      in[c.mux_constant(q)] = mode == ScanMode::Proposed ? pattern[c.mux_constant(q)] : Logic3::Zero;
    }
    if (c.scan_enable() != kNoLine) in[c.scan_enable()] = mode == ScanMode::Proposed ? Logic3::One : Logic3::Zero;
    leak += oracle::leakage_of(c, oracle::evaluate(c, in), cfg.table);
  }
  p.static_uw = leak / 2 * cfg.vdd * 1e-3;
  return p;
}

}  // namespace

TEST(Pipeline, NoScanCellsMeansEqualDynamicPower) {
  PipelineConfig cfg;
  auto r = run_pipeline("INPUT(a)\nINPUT(b)\nOUTPUT(y)\nn = NOT(a)\ny = NAND(n, b)\n", "comb", std::nullopt, cfg);
  EXPECT_EQ(r.report[ScanMode::Traditional].dynamic_per_hz, r.report[ScanMode::InputControl].dynamic_per_hz);
  EXPECT_EQ(r.report[ScanMode::Traditional].dynamic_per_hz, r.report[ScanMode::Proposed].dynamic_per_hz);
  EXPECT_TRUE(r.report.generated_vectors);
  EXPECT_EQ(r.report.vectors, kDefaultVectorCount);
}

TEST(Pipeline, FullIsolationSilencesShift) {
  PipelineConfig cfg;
  cfg.delays.mux_delay = 0.0;
  auto r = run_pipeline(read(kRoot + "/benchmarks/iscas89/s27.bench"), "s27", std::nullopt, cfg);
  EXPECT_EQ(r.report.multiplexed, r.report.pseudo_inputs);
  const auto& proposed = r.activity[static_cast<std::size_t>(ScanMode::Proposed)];
  const auto& trad = r.activity[static_cast<std::size_t>(ScanMode::Traditional)];
  EXPECT_EQ(proposed.shift.load, 0.0);
  ASSERT_GT(trad.shift.load, 0.0);
  EXPECT_DOUBLE_EQ(improvement(trad.shift.load, proposed.shift.load), 100.0);
}

TEST(Pipeline, S27MatchesGoldenFile) {
  auto r = s27_run();
  std::string csv = emit_report(r.report, ReportFormat::Csv);
  EXPECT_EQ(csv, read(kRoot + "/tests/golden/s27_report.csv"));
}

TEST(Pipeline, S27AgreesWithOracleReplay) {
  auto r = s27_run();
  auto vectors = parse_vectors(read(kRoot + "/data/s27_vectors.txt"), 3);
  PipelineConfig cfg;
  const Assignment none(r.mapped.line_count());
  auto check = [&](const Circuit& c, ScanMode mode, const Assignment& p) {
    auto ref = oracle_power(c, mode, p, vectors, cfg);
    EXPECT_NEAR(r.report[mode].dynamic_per_hz, ref.dynamic_per_hz, 1e-12 * ref.dynamic_per_hz) << to_string(mode);
    EXPECT_NEAR(r.report[mode].static_uw, ref.static_uw, 1e-12 * ref.static_uw) << to_string(mode);
  };
  check(r.mapped, ScanMode::Traditional, none);
  check(r.mapped, ScanMode::InputControl, r.input_control_pattern);
  check(r.proposed, ScanMode::Proposed, r.pattern);
}

TEST(Pipeline, SameSeedSameBytes) {
  auto a = emit_report(s27_run(7).report, ReportFormat::Csv);
  auto b = emit_report(s27_run(7).report, ReportFormat::Csv);
  EXPECT_EQ(a, b);
}

TEST(Pipeline, StageAttribution) {
  PipelineConfig cfg;
  try {
    run_pipeline("INPUT(a)\ny = FOO(a)\n", "bad", std::nullopt, cfg);
    FAIL();
  } catch (const StageError& e) {
    EXPECT_EQ(e.stage(), "parse");
  }
  cfg.table = parse_leakage_table("INV,1,0,1\nINV,1,1,1\n");
  try {
    run_pipeline("INPUT(a)\nINPUT(b)\nOUTPUT(y)\ny = NAND(a, b)\n", "t", std::nullopt, cfg);
    FAIL();
  } catch (const StageError& e) {
    EXPECT_EQ(e.stage(), "leakage table");
  }
}

TEST(Report, ZeroImprovementPrintsZero) {
  PowerReport r;
  r.circuit = "flat";
  for (auto& m : r.modes) m = {2e-9, 1.5};
  std::string table = emit_report(r, ReportFormat::Table);
  auto row = table.substr(table.find("flat"));
  EXPECT_EQ(std::count(row.begin(), row.end(), '%'), 0);
  std::size_t zeros = 0;
  for (std::size_t pos = row.find("0.00"); pos != std::string::npos; pos = row.find("0.00", pos + 1)) ++zeros;
  EXPECT_GE(zeros, 4u);
  EXPECT_EQ(r.dynamic_improvement(ScanMode::Traditional), 0.0);
}

TEST(Report, NegativeImprovementKeepsSign) {
  PowerReport r;
  r.circuit = "s510";
  r[ScanMode::Traditional] = {10.0, 10.0};
  r[ScanMode::InputControl] = {1.0, 10.0};
  r[ScanMode::Proposed] = {1.0041, 9.0};
  std::string table = emit_report(r, ReportFormat::Table);
  EXPECT_NE(table.find("-0.41"), std::string::npos) << table;
  EXPECT_NEAR(r.dynamic_improvement(ScanMode::InputControl), -0.41, 1e-9);
}

TEST(Report, CsvRoundTrip) {
  auto r = s27_run().report;
  PowerReport odd = r;
  odd.circuit = "odd";
  odd.generated_vectors = !r.generated_vectors;
  odd[ScanMode::Proposed].static_uw = 1.0 / 3.0;
  std::vector<PowerReport> both{r, odd};
  auto parsed = parse_report_csv(emit_report(both, ReportFormat::Csv));
  ASSERT_EQ(parsed.size(), 2u);
  EXPECT_EQ(parsed[0], r);
  EXPECT_EQ(parsed[1], odd);
}

TEST(Report, PrintedPercentagesMatchColumns) {
  auto r = s27_run().report;
  auto row = scanpower::detail::split_csv(report_csv_row(r));
  auto pct = [](double base, double prop) { return base == 0.0 ? 0.0 : 100.0 * (base - prop) / base; };
  EXPECT_NEAR(std::stod(row[12]), pct(std::stod(row[6]), std::stod(row[10])), 0.01);
  EXPECT_NEAR(std::stod(row[13]), pct(std::stod(row[7]), std::stod(row[11])), 0.01);
  EXPECT_NEAR(std::stod(row[14]), pct(std::stod(row[8]), std::stod(row[10])), 0.01);
  EXPECT_NEAR(std::stod(row[15]), pct(std::stod(row[9]), std::stod(row[11])), 0.01);
}

TEST(Report, ParseRejectsGarbage) {
  EXPECT_THROW(parse_report_csv("nope\n"), ParseError);
  EXPECT_THROW(parse_report_csv(std::string(kReportCsvHeader) + "\na,1,2\n"), ParseError);
}
