// Acceptance suite: one PASS/FAIL line per criterion. The benchmark
// directory defaults to the bundled one and can be pointed elsewhere with
// SCANPOWER_BENCH_DIR.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include "support/oracles.hpp"

using namespace scanpower;
namespace fs = std::filesystem;

namespace {

const std::vector<std::string> kBenchmarks{"s27", "s208", "s298", "s344", "s349", "s382", "s444"};

struct Outcome {
  bool pass;
  std::string detail;
};

std::string read(const fs::path& path) {
  std::ifstream f(path);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

fs::path bench_dir() {
  if (const char* env = std::getenv("SCANPOWER_BENCH_DIR")) return env;
  return fs::path(SCANPOWER_SOURCE_DIR) / "benchmarks" / "iscas89";
}

// Loads whichever of the named benchmarks exist; the rest are listed.
std::vector<Circuit> load_benchmarks(std::vector<std::string>& missing) {
  std::vector<Circuit> out;
  for (const auto& name : kBenchmarks) {
    fs::path p = bench_dir() / (name + ".bench");
    if (!fs::exists(p)) {
      missing.push_back(name);
      continue;
    }
    out.push_back(parse_bench(read(p), name));
  }
  return out;
}

std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (const auto& x : v) s += (s.empty() ? "" : " ") + x;
  return s;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

Circuit single_nand2() {
  return parse_bench("INPUT(a)\nINPUT(b)\nOUTPUT(y)\ny = NAND(a, b)\n", "nand2");
}

Outcome nand2_anchor() {
  auto t = parse_leakage_table(read(fs::path(SCANPOWER_SOURCE_DIR) / "data" / "leakage_45nm.csv"));
  auto c = single_nand2();
  const std::array<double, 4> expect_nw{70.2, 65.7, 237.6, 367.2};
  double worst = 0.0;
  for (int pat = 0; pat < 4; ++pat) {
    Assignment in(c.line_count());
    in[c.primary_inputs()[0]] = to_logic(pat >> 1);
    in[c.primary_inputs()[1]] = to_logic(pat & 1);
    double nw = static_power(c, simulate(c, in), t, 0.9) * 1e3;
    worst = std::max(worst, std::abs(nw - expect_nw[pat]) / expect_nw[pat]);
  }
  return {worst <= 1e-9, "worst relative error " + fmt("%.3g", worst)};
}

Outcome analytic_ordering() {
  auto t0 = std::chrono::steady_clock::now();
  auto t = calibrated_leakage_table(DeviceParams{});
  double secs = seconds_since(t0);
  const double l00 = t.get(GateKind::Nand, 2, 0), l01 = t.get(GateKind::Nand, 2, 1);
  const double l10 = t.get(GateKind::Nand, 2, 2), l11 = t.get(GateKind::Nand, 2, 3);
  bool ordered = l11 > l10 && l10 > l00 && l00 > l01;
  double worst = 0.0;
  for (std::uint32_t p = 0; p < 4; ++p) {
    worst = std::max(worst, std::abs(t.get(GateKind::Nand, 2, p) - kNand2AnchorNa[p]) / kNand2AnchorNa[p]);
  }
  std::string detail = "00/01/10/11 = " + fmt("%.1f", l00) + "/" + fmt("%.1f", l01) + "/" + fmt("%.1f", l10) +
                       "/" + fmt("%.1f", l11) + " nA, worst deviation " + fmt("%.1f%%", 100 * worst) + ", " +
                       fmt("%.3f s", secs);
  return {ordered && worst <= 0.25 && secs < 1.0, detail};
}

Outcome addmux_safety() {
  auto t0 = std::chrono::steady_clock::now();
  std::vector<std::string> missing;
  auto benches = load_benchmarks(missing);
  std::vector<Circuit> circuits;
  for (auto& b : benches) circuits.push_back(tech_map(b));
  std::mt19937_64 rng(2024);
  for (std::size_t i = 0; i < 200; ++i) {
    circuits.push_back(oracle::random_circuit(rng, {3 + i % 5, 2 + i % 7, 20 + i % 40, 3, true}));
  }
  std::size_t violations = 0;
  for (const auto& c : circuits) {
    DelayModel d;
    auto m = add_muxes(c, d);
    if (critical_path_delay(m, d) != critical_path_delay(c, d)) ++violations;
    d.mux_delay = 0.0;
    if (add_muxes(c, d).multiplexed().size() != c.pseudo_inputs().size()) ++violations;
  }
  double secs = seconds_since(t0);
  std::string detail = std::to_string(benches.size()) + " benchmarks + 200 random DAGs, " +
                       std::to_string(violations) + " violations, " + fmt("%.2f s", secs);
  if (!missing.empty()) detail += "; missing benchmarks: " + join(missing);
  return {missing.empty() && violations == 0 && secs < 10.0, detail};
}

Outcome blocking_soundness() {
  std::vector<std::string> missing;
  auto benches = load_benchmarks(missing);
  auto t = bundled_leakage_table();
  std::size_t blocked = 0, violations = 0;
  for (const auto& b : benches) {
    PipelineConfig cfg;
    auto r = run_pipeline(b, std::nullopt, cfg);
    Assignment scan_mode = r.search.pattern;
    if (r.multiplexed.scan_enable() != kNoLine) scan_mode[r.multiplexed.scan_enable()] = Logic3::One;
    auto sim = simulate(r.multiplexed, scan_mode);
    for (const auto& rec : r.search.report) {
      if (!rec.blocked) continue;
      ++blocked;
      if (!is_binary(sim[r.multiplexed.gate(rec.gate).output])) ++violations;
    }
  }
  std::string detail = std::to_string(benches.size()) + " benchmarks, " + std::to_string(blocked) +
                       " blocked gates, " + std::to_string(violations) + " violations";
  if (!missing.empty()) detail += "; missing benchmarks: " + join(missing);
  return {missing.empty() && violations == 0, detail};
}

Outcome observability_oracle() {
  auto t = bundled_leakage_table();
  std::mt19937_64 rng(515);
  double worst = 0.0;
  std::size_t circuits = 0;
  while (circuits < 50) {
    auto c = oracle::random_circuit(rng, {2 + circuits % 5, 2 + circuits % 6, 15 + circuits % 20, 3, true});
    DelayModel d;
    d.mux_delay = circuits % 3 == 0 ? 0.0 : 1.0;
    c = add_muxes(c, d);
    if (c.controlled_inputs().size() > 12) continue;
    ++circuits;
    auto lo = leakage_observability(c, t);
    auto ref = oracle::brute_force_observability(c, t);
    for (LineId l = 0; l < c.line_count(); ++l) {
      double scale = std::max(std::abs(ref[l]), 1e-9);
      worst = std::max(worst, std::abs(lo[l] - ref[l]) / scale);
    }
  }
  return {worst <= 1e-9, "50 circuits, worst relative error " + fmt("%.3g", worst)};
}

Outcome justify_oracle() {
  std::mt19937_64 rng(616);
  std::size_t cones = 0;
  int mismatches = 0, bad_assignments = 0, successes = 0;
  auto t = bundled_leakage_table();
  while (cones < 200) {
    auto base = oracle::random_circuit(rng, {2 + cones % 6, 1 + cones % 4, 8 + cones % 10, 3, true});
    Circuit c = base;
    for (LineId q : base.scan_chain_order()) {
      if (rng() & 1) c.insert_mux(q);
    }
    c.mark_mux_pass_applied();
    c.finalize();
    if (c.controlled_inputs().size() > 10) continue;
    LineId target = c.gate(static_cast<GateId>(rng() % c.gate_count())).output;
    Logic3 value = to_logic(rng() & 1);
    auto a = scan_search_start(c);
    if (is_binary(a[target]) && a[target] != value) continue;
    ++cones;
    bool expect = oracle::justifiable(c, a, target, value);
    std::vector<double> lo;
    if (cones % 2) lo = leakage_observability(c, t).value;
    bool got = justify(c, a, {target, value}, lo, SearchConfig{});
    if (got != expect) ++mismatches;
    if (got) {
      ++successes;
      if (oracle::evaluate(c, a)[target] != value) ++bad_assignments;
    }
  }
  return {mismatches == 0 && bad_assignments == 0,
          "200 cones, " + std::to_string(successes) + " justified, " + std::to_string(mismatches) +
              " verdict mismatches, " + std::to_string(bad_assignments) + " bad assignments"};
}

Outcome directional_table() {
  auto t0 = std::chrono::steady_clock::now();
  std::vector<std::string> missing;
  auto benches = load_benchmarks(missing);
  int dyn_ok = 0, stat_ok = 0;
  std::string per;
  for (const auto& b : benches) {
    PipelineConfig cfg;
    cfg.seed = 1;
    auto r = run_pipeline(b, std::nullopt, cfg).report;
    bool d = r[ScanMode::Proposed].dynamic_per_hz <= r[ScanMode::Traditional].dynamic_per_hz;
    bool s = r[ScanMode::Proposed].static_uw <= r[ScanMode::Traditional].static_uw;
    dyn_ok += d;
    stat_ok += s;
    per += " " + b.name() + "(" + fmt("%+.1f", r.dynamic_improvement(ScanMode::Traditional)) + "%/" +
           fmt("%+.1f", r.static_improvement(ScanMode::Traditional)) + "%)";
  }
  double secs = seconds_since(t0);
  std::string detail = "dynamic " + std::to_string(dyn_ok) + "/7, static " + std::to_string(stat_ok) +
                       "/7 vs traditional;" + per + "; " + fmt("%.2f s", secs);
  if (!missing.empty()) detail += "; missing benchmarks: " + join(missing);
  return {dyn_ok >= 6 && stat_ok >= 6 && secs < 60.0, detail};
}

Outcome reorder_properties() {
  auto t = bundled_leakage_table();
  std::mt19937_64 rng(808);
  std::size_t function_changes = 0, increases = 0, checked = 0;
  std::vector<Circuit> circuits;
  std::vector<std::string> missing;
  for (auto& b : load_benchmarks(missing)) circuits.push_back(tech_map(b));
  for (int i = 0; i < 100; ++i) circuits.push_back(oracle::random_circuit(rng, {4, 4, 30, 4, true}));
  for (const auto& c : circuits) {
    auto ins = oracle::input_lines(c);
    if (ins.size() > 16) continue;
    ++checked;
    Assignment in(c.line_count());
    for (LineId l : ins) in[l] = to_logic(rng() & 1);
    auto state = simulate(c, in);
    auto r = reorder_inputs(c, state, t);
    auto outs = oracle::output_lines(c);
    if (oracle::truth_table(r, ins, outs) != oracle::truth_table(c, ins, outs)) ++function_changes;
    if (static_power(r, simulate(r, in), t, 0.9) > static_power(c, state, t, 0.9)) ++increases;
  }
  auto nand = single_nand2();
  Assignment in(nand.line_count());
  in[nand.primary_inputs()[0]] = Logic3::One;
  in[nand.primary_inputs()[1]] = Logic3::Zero;
  double before = total_leakage(nand, simulate(nand, in), t);
  auto re = reorder_inputs(nand, simulate(nand, in), t);
  double after = total_leakage(re, simulate(re, in), t);
  return {function_changes == 0 && increases == 0 && before == 264.0 && after == 73.0,
          std::to_string(checked) + " circuits, " + std::to_string(function_changes) + " function changes, " +
              std::to_string(increases) + " increases; NAND2 10: " + fmt("%.0f", before) + " -> " +
              fmt("%.0f", after) + " nA"};
}

Outcome isolation_bound() {
  std::mt19937_64 rng(909);
  std::vector<Circuit> circuits;
  std::vector<std::string> missing;
  for (auto& b : load_benchmarks(missing)) circuits.push_back(tech_map(b));
  for (int i = 0; i < 20; ++i) circuits.push_back(oracle::random_circuit(rng, {4, 6, 40, 3, true}));
  double worst = 0.0, worst_power = 0.0;
  for (const auto& c : circuits) {
    DelayModel d;
    d.mux_delay = 0.0;
    auto m = add_muxes(c, d);
    Assignment pattern(m.line_count());
    for (LineId in : m.controlled_inputs()) pattern[in] = to_logic(rng() & 1);
    auto vectors = lfsr_vectors(rng(), 20, m.scan_chain_order().size());
    auto act = scan_shift_activity(m, vectors, ScanMode::Proposed, pattern, CapacitanceModel{});
    worst = std::max(worst, act.shift.load);
    worst_power = std::max(worst_power, dynamic_power(act.shift, 0.9, 1e8));
  }
  return {worst == 0.0 && worst_power == 0.0,
          std::to_string(circuits.size()) + " fully isolated circuits, max shift activity " + fmt("%g", worst) +
              " F, max shift power " + fmt("%g", worst_power) + " W"};
}

Outcome determinism() {
  const fs::path tmp = fs::temp_directory_path() / ("scanpower_det_" + std::to_string(std::rand()));
  fs::create_directories(tmp);
  const std::string bench = (fs::path(SCANPOWER_SOURCE_DIR) / "benchmarks" / "iscas89" / "s27.bench").string();
  std::string outs[2];
  for (int run = 0; run < 2; ++run) {
    fs::path out = tmp / ("run" + std::to_string(run) + ".csv");
    std::string cmd = std::string("\"") + SCANPOWER_CLI + "\" compare --bench \"" + bench +
                      "\" --seed 1 --format csv --out \"" + out.string() + "\"";
    if (std::system(cmd.c_str()) != 0) return {false, "compare run failed: " + cmd};
    outs[run] = read(out);
  }
  fs::remove_all(tmp);
  bool same = !outs[0].empty() && outs[0] == outs[1];
  return {same, "two CLI compare runs, " + std::to_string(outs[0].size()) + " bytes, " +
                    (same ? "identical" : "different")};
}

Outcome unit_checks() {
  DeviceParams p;
  bool zero_vds = true;
  for (double vgs : {-0.3, 0.0, 0.5}) zero_vds &= subthreshold_current(p, vgs, 0.0, 0.1) == 0.0;
  bool tunnel_limit = gate_tunneling_density(p, 0.0) == 0.0 && gate_tunneling_density(p, 1e-8) < 1e-7 * gate_tunneling_density(p, 1e-4) &&
                      gate_tunneling_density(p, 1e-7) < gate_tunneling_density(p, 1e-5);
  bool sub_grid = true, tox_grid = true;
  double prev = -1.0;
  for (int i = 0; i < 100; ++i) {
    double cur = subthreshold_current(p, -0.4 + 0.01 * i, 0.9, 0.0);
    sub_grid &= cur > prev;
    prev = cur;
  }
  DeviceParams thin = p;
  thin.tox = p.tox / 2;
  for (int i = 1; i <= 100; ++i) {
    double v = 0.009 * i;
    tox_grid &= gate_tunneling_density(thin, v) > gate_tunneling_density(p, v);
  }
  return {zero_vds && tunnel_limit && sub_grid && tox_grid,
          std::string("vds=0 ") + (zero_vds ? "ok" : "bad") + ", vox->0 " + (tunnel_limit ? "ok" : "bad") +
              ", vgs grid " + (sub_grid ? "ok" : "bad") + ", tox grid " + (tox_grid ? "ok" : "bad")};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"NAND2 anchor static power", nand2_anchor},
      {"analytic NAND2 ordering and calibration", analytic_ordering},
      {"mux insertion keeps critical-path delay", addmux_safety},
      {"blocking soundness on benchmarks", blocking_soundness},
      {"leakage observability vs brute force", observability_oracle},
      {"justify vs exhaustive enumeration", justify_oracle},
      {"proposed <= traditional power on benchmarks", directional_table},
      {"input reordering properties", reorder_properties},
      {"full isolation silences shift", isolation_bound},
      {"byte-identical compare runs", determinism},
      {"device model unit checks", unit_checks},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s [%2zu] %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.c_str());
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
