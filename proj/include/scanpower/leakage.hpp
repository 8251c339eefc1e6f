#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <map>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "scanpower/bench.hpp"
#include "scanpower/error.hpp"
#include "scanpower/netlist.hpp"
#include "scanpower/simulate.hpp"

namespace scanpower {

inline constexpr double kBoltzmann = 1.380649e-23;        // J/K
inline constexpr double kElementaryCharge = 1.602176634e-19;  // C

// Device parameters of the analytic leakage model, SI units throughout.
// Defaults describe a 45 nm-class device at 0.9 V, calibrated so that the
// NAND2 table keeps the ordering 11 > 10 > 00 > 01.
struct DeviceParams {
  double mu0 = 0.03;            // m^2/(V s), zero-bias mobility
  double cox = 0.0288;          // F/m^2
  double weff = 90e-9;          // m
  double leff = 45e-9;          // m
  double n_swing = 1.5;         // subthreshold swing coefficient
  double vt0 = 0.32;            // V, zero-bias threshold
  double delta_body = 0.08;     // body-effect coefficient
  double eta_dibl = 0.12;       // DIBL coefficient
  double temperature = 300.0;   // K
  double tox = 1.2e-9;          // m
  double phi_ox = 3.1;          // V, tunneling barrier height
  double a_dt = 5.8e-6;         // A/V^2, direct-tunneling prefactor
  double b_dt = 2.0e10;         // V/m, direct-tunneling exponent
  double vdd = 0.9;             // V
  // PMOS currents relative to an NMOS of the same size.
  double pmos_sub_ratio = 0.5;
  double pmos_tunnel_ratio = 0.2;

  double thermal_voltage() const { return kBoltzmann * temperature / kElementaryCharge; }

  void validate() const {
    auto positive = [](double v, const char* name) {
      if (!(v > 0.0) || !std::isfinite(v)) throw DomainError(std::string(name) + " must be > 0");
    };
    positive(vdd, "vdd");
    positive(tox, "tox");
    positive(phi_ox, "phi_ox");
    positive(temperature, "temperature");
    positive(weff, "weff");
    positive(leff, "leff");
    positive(n_swing, "n_swing");
    if (vt0 >= phi_ox || vdd >= phi_ox) throw DomainError("oxide voltage would exceed phi_ox");
    if (pmos_sub_ratio < 0.0 || pmos_tunnel_ratio < 0.0) throw DomainError("negative PMOS ratio");
  }
};

// key=value lines, '#' comments. Unknown keys are an error.
inline DeviceParams parse_device_params(std::string_view text, DeviceParams p = {}) {
  std::map<std::string, double*> fields{
      {"mu0", &p.mu0},           {"cox", &p.cox},
      {"weff", &p.weff},         {"leff", &p.leff},
      {"n_swing", &p.n_swing},   {"vt0", &p.vt0},
      {"delta_body", &p.delta_body}, {"eta_dibl", &p.eta_dibl},
      {"temperature", &p.temperature}, {"tox", &p.tox},
      {"phi_ox", &p.phi_ox},     {"a_dt", &p.a_dt},
      {"b_dt", &p.b_dt},         {"vdd", &p.vdd},
      {"pmos_sub_ratio", &p.pmos_sub_ratio}, {"pmos_tunnel_ratio", &p.pmos_tunnel_ratio}};
  std::size_t lineno = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto eol = text.find('\n', pos);
    auto raw = text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++lineno;
    if (auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    auto row = detail::trim(raw);
    if (row.empty()) continue;
    auto eq = row.find('=');
    if (eq == std::string_view::npos) throw ParseError(lineno, "expected key=value");
    std::string key(detail::trim(row.substr(0, eq)));
    std::string val(detail::trim(row.substr(eq + 1)));
    auto it = fields.find(key);
    if (it == fields.end()) throw ParseError(lineno, "unknown parameter '" + key + "'");
    try {
      std::size_t used = 0;
      *it->second = std::stod(val, &used);
      if (used != val.size()) throw std::invalid_argument(val);
    } catch (const std::exception&) {
      throw ParseError(lineno, "bad value '" + val + "' for " + key);
    }
  }
  p.validate();
  return p;
}

// BSIM-style subthreshold current of one device (A):
//   I = A exp((Vgs - Vt0 - delta Vs + eta Vds) / (n kT/q)) (1 - exp(-Vds q/kT))
//   A = mu0 Cox (W/L) (kT/q)^2 e^1.8
inline double subthreshold_current(const DeviceParams& p, double vgs, double vds, double vs) {
  const double vt = p.thermal_voltage();
  const double prefactor = p.mu0 * p.cox * (p.weff / p.leff) * vt * vt * std::exp(1.8);
  const double exponent = (vgs - p.vt0 - p.delta_body * vs + p.eta_dibl * vds) / (p.n_swing * vt);
  return prefactor * std::exp(exponent) * -std::expm1(-vds / vt);
}

// Direct-tunneling current density (A/m^2) across an oxide drop `vox`:
//   J = A (Vox/Tox)^2 exp(-B (1 - (1 - Vox/phi)^1.5) / (Vox/Tox))
inline double gate_tunneling_density(const DeviceParams& p, double vox) {
  if (!(vox >= 0.0) || vox >= p.phi_ox) {
    throw DomainError("oxide voltage " + std::to_string(vox) + " V outside [0, phi_ox)");
  }
  if (vox == 0.0) return 0.0;
  const double field = vox / p.tox;
  const double bracket = 1.0 - std::pow(1.0 - vox / p.phi_ox, 1.5);
  return p.a_dt * field * field * std::exp(-p.b_dt * bracket / field);
}

namespace detail {

// Subthreshold current of a series stack holding k OFF devices, reduced to
// its dominant device: Vds = Vdd/k, source lifted to (k-1) Vdd / (2k).
inline double off_stack_current(const DeviceParams& p, std::size_t k) {
  const double vdd = p.vdd;
  const double kk = static_cast<double>(k);
  const double vds = vdd / kk;
  const double vs = (kk - 1.0) * vdd / (2.0 * kk);
  return subthreshold_current(p, -vs, vds, vs);
}

inline double device_tunneling(const DeviceParams& p, double vox) {
  return gate_tunneling_density(p, vox) * p.weff * p.leff;
}

struct NetworkSide {
  bool on_level;      // gate value that turns the device on
  double sub_ratio;
  double tunnel_ratio;
};

// Leakage (A) of a static gate made of one series stack and one parallel
// network with complementary devices. bits[0] drives the series device
// nearest to the supply rail of the stack.
//
// ON devices conduct a full rail (oxide drop Vdd) when nothing OFF sits
// between them and their rail; otherwise they pass a degraded level and see
// only Vt0. OFF parallel devices have Vds = 0 unless the stack conducts.
inline double series_parallel_leakage(const DeviceParams& p, std::span<const bool> bits,
                                      NetworkSide series, NetworkSide parallel) {
  const std::size_t n = bits.size();
  std::size_t off = 0;
  for (bool b : bits) off += b != series.on_level;

  double total = 0.0;
  if (off == 0) {
    total += static_cast<double>(n) * off_stack_current(p, 1) * parallel.sub_ratio;
    total += static_cast<double>(n) * device_tunneling(p, p.vdd) * series.tunnel_ratio;
    return total;
  }
  total += off_stack_current(p, off) * series.sub_ratio;
  bool behind_off = false;
  for (std::size_t i = 0; i < n; ++i) {
    if (bits[i] != series.on_level) {
      behind_off = true;
      total += device_tunneling(p, p.vdd) * parallel.tunnel_ratio;  // its parallel twin is on
      continue;
    }
    total += device_tunneling(p, behind_off ? p.vt0 : p.vdd) * series.tunnel_ratio;
  }
  return total;
}

inline double nand_leakage(const DeviceParams& p, std::span<const bool> bits) {
  return series_parallel_leakage(p, bits, {true, 1.0, 1.0},
                                 {false, p.pmos_sub_ratio, p.pmos_tunnel_ratio});
}

inline double nor_leakage(const DeviceParams& p, std::span<const bool> bits) {
  return series_parallel_leakage(p, bits, {false, p.pmos_sub_ratio, p.pmos_tunnel_ratio},
                                 {true, 1.0, 1.0});
}

// Transmission-gate Mux2: an inverter on the select line and two pass gates,
// the one on `tie` enabled by select. The disabled pass gate leaks through
// both of its devices when its input differs from the output. Conducting
// devices see the full oxide drop only while passing the opposite rail.
inline double mux2_leakage(const DeviceParams& p, bool sel, bool data, bool tie) {
  std::array<bool, 1> inv{sel};
  double total = nand_leakage(p, inv);
  const bool out = sel ? tie : data;
  const bool off_in = sel ? data : tie;
  if (off_in != out) total += off_stack_current(p, 1) * (1.0 + p.pmos_sub_ratio);
  total += device_tunneling(p, out ? p.vt0 : p.vdd);
  total += device_tunneling(p, out ? p.vdd : p.vt0) * p.pmos_tunnel_ratio;
  return total;
}

}  // namespace detail

// Leakage (A) of one library cell under a binary input pattern.
inline double gate_leakage_current(const DeviceParams& p, GateKind kind, std::span<const bool> bits) {
  switch (kind) {
    case GateKind::Inv:
      if (bits.size() != 1) break;
      return detail::nand_leakage(p, bits);
    case GateKind::Nand:
      if (bits.empty()) break;
      return detail::nand_leakage(p, bits);
    case GateKind::Nor:
      if (bits.empty()) break;
      return detail::nor_leakage(p, bits);
    case GateKind::Mux2:
      if (bits.size() != 3) break;
      return detail::mux2_leakage(p, bits[kMuxSelect], bits[kMuxData], bits[kMuxConstant]);
    default:
      throw Error("no leakage model for " + std::string(to_string(kind)));
  }
  throw Error("unsupported arity " + std::to_string(bits.size()) + " for " +
              std::string(to_string(kind)));
}

// Pattern index of a bit list: the first input is the most significant bit.
inline std::uint32_t pattern_index(std::span<const bool> bits) {
  std::uint32_t idx = 0;
  for (bool b : bits) idx = (idx << 1) | static_cast<std::uint32_t>(b);
  return idx;
}

inline std::string pattern_string(std::uint32_t pattern, std::size_t arity) {
  std::string s(arity, '0');
  for (std::size_t i = 0; i < arity; ++i) {
    if ((pattern >> (arity - 1 - i)) & 1U) s[i] = '1';
  }
  return s;
}

inline constexpr std::size_t kMaxTableArity = 6;

// Per-cell leakage current in nA, keyed by (kind, arity, input pattern).
class LeakageTable {
 public:
  enum class Source { File, Analytic };
  using Key = std::pair<GateKind, std::size_t>;

  Source source = Source::Analytic;

  void set(GateKind kind, std::size_t arity, std::uint32_t pattern, double leak_na) {
    if (arity == 0 || arity > 16) throw Error("unsupported arity " + std::to_string(arity));
    if (!(leak_na >= 0.0) || !std::isfinite(leak_na)) {
      throw Error("leakage must be finite and >= 0");
    }
    auto& row = rows_[{kind, arity}];
    if (row.empty()) row.assign(std::size_t{1} << arity, kMissing());
    if (pattern >= row.size()) throw Error("pattern out of range");
    row[pattern] = leak_na;
  }

  double get(GateKind kind, std::size_t arity, std::uint32_t pattern) const {
    auto it = rows_.find({kind, arity});
    if (it == rows_.end() || pattern >= it->second.size() || std::isnan(it->second[pattern])) {
      throw Error("leakage table has no entry for " + std::string(to_string(kind)) + " " +
                  pattern_string(pattern, arity));
    }
    return it->second[pattern];
  }

  // All 2^arity patterns of (kind, arity) present.
  bool complete(GateKind kind, std::size_t arity) const {
    auto it = rows_.find({kind, arity});
    if (it == rows_.end()) return false;
    for (double v : it->second) {
      if (std::isnan(v)) return false;
    }
    return true;
  }

  void require(const Circuit& c) const {
    for (const Gate& g : c.gates()) {
      if (!complete(g.kind, g.inputs.size())) {
        throw Error("leakage table incomplete for " + std::string(to_string(g.kind)) + "/" +
                    std::to_string(g.inputs.size()) + " used by '" + c.line_name(g.output) + "'");
      }
    }
  }

  // Row of a complete (kind, arity); empty span if absent.
  std::span<const double> row(GateKind kind, std::size_t arity) const {
    auto it = rows_.find({kind, arity});
    if (it == rows_.end()) return {};
    return it->second;
  }

  const std::map<Key, std::vector<double>>& rows() const { return rows_; }

  void scale(double factor) {
    for (auto& [key, row] : rows_) {
      for (double& v : row) v *= factor;
    }
  }

  bool operator==(const LeakageTable& o) const {
    if (rows_.size() != o.rows_.size()) return false;
    for (const auto& [key, row] : rows_) {
      auto it = o.rows_.find(key);
      if (it == o.rows_.end() || it->second.size() != row.size()) return false;
      for (std::size_t i = 0; i < row.size(); ++i) {
        bool a = std::isnan(row[i]), b = std::isnan(it->second[i]);
        if (a != b || (!a && row[i] != it->second[i])) return false;
      }
    }
    return true;
  }

 private:
  static double kMissing() { return std::numeric_limits<double>::quiet_NaN(); }
  std::map<Key, std::vector<double>> rows_;
};

// CSV `kind,arity,pattern,leak_nA`; pattern is a 0/1 string, first input first.
inline LeakageTable parse_leakage_table(std::string_view text) {
  LeakageTable t;
  t.source = LeakageTable::Source::File;
  std::size_t lineno = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto eol = text.find('\n', pos);
    auto raw = text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++lineno;
    if (auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    auto row = detail::trim(raw);
    if (row.empty()) continue;
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
      auto comma = row.find(',', start);
      cells.emplace_back(detail::trim(row.substr(start, comma == std::string_view::npos
                                                            ? std::string_view::npos
                                                            : comma - start)));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (cells.size() != 4) throw ParseError(lineno, "expected kind,arity,pattern,leak_nA");
    if (detail::upper(cells[0]) == "KIND") continue;
    auto kind = gate_kind_from_string(cells[0]);
    if (!kind) throw ParseError(lineno, "unknown gate kind '" + cells[0] + "'");
    std::size_t arity = 0;
    double leak = 0.0;
    try {
      arity = std::stoul(cells[1]);
      std::size_t used = 0;
      leak = std::stod(cells[3], &used);
      if (used != cells[3].size()) throw std::invalid_argument(cells[3]);
    } catch (const std::exception&) {
      throw ParseError(lineno, "bad number");
    }
    if (cells[2].size() != arity) throw ParseError(lineno, "pattern length differs from arity");
    std::uint32_t pattern = 0;
    for (char ch : cells[2]) {
      if (ch != '0' && ch != '1') throw ParseError(lineno, "pattern must be a 0/1 string");
      pattern = (pattern << 1) | static_cast<std::uint32_t>(ch == '1');
    }
    try {
      t.set(*kind, arity, pattern, leak);
    } catch (const Error& e) {
      throw ParseError(lineno, e.what());
    }
  }
  return t;
}

inline std::string format_leakage_table(const LeakageTable& t) {
  std::string out = "kind,arity,pattern,leak_nA\n";
  char num[64];
  for (const auto& [key, row] : t.rows()) {
    for (std::uint32_t p = 0; p < row.size(); ++p) {
      if (std::isnan(row[p])) continue;
      std::snprintf(num, sizeof num, "%.17g", row[p]);
      out += std::string(to_string(key.first)) + "," + std::to_string(key.second) + "," +
             pattern_string(p, key.second) + "," + num + "\n";
    }
  }
  return out;
}

// Analytic table (nA) for the listed cells.
inline LeakageTable build_leakage_table(const DeviceParams& p,
                                        std::span<const std::pair<GateKind, std::size_t>> kinds) {
  p.validate();
  LeakageTable t;
  t.source = LeakageTable::Source::Analytic;
  for (auto [kind, arity] : kinds) {
    if (arity == 0 || arity > kMaxTableArity) {
      throw Error("unsupported arity " + std::to_string(arity) + " for " +
                  std::string(to_string(kind)));
    }
    for (std::uint32_t pat = 0; pat < (1U << arity); ++pat) {
      std::array<bool, kMaxTableArity> bits{};
      for (std::size_t i = 0; i < arity; ++i) bits[i] = (pat >> (arity - 1 - i)) & 1U;
      std::span<const bool> view(bits.data(), arity);
      t.set(kind, arity, pat, gate_leakage_current(p, kind, view) * 1e9);
    }
  }
  return t;
}

// Measured NAND2 leakage at 45 nm, 0.9 V, indexed by pattern AB.
inline constexpr std::array<double, 4> kNand2AnchorNa{78.0, 73.0, 264.0, 408.0};

// Every cell the mapper and the mux pass can produce, up to kMaxTableArity.
inline std::vector<std::pair<GateKind, std::size_t>> library_cells() {
  std::vector<std::pair<GateKind, std::size_t>> cells{{GateKind::Inv, 1}, {GateKind::Mux2, 3}};
  for (std::size_t a = 2; a <= kMaxTableArity; ++a) {
    cells.emplace_back(GateKind::Nand, a);
    cells.emplace_back(GateKind::Nor, a);
  }
  return cells;
}

// Scale factor mapping the analytic NAND2 row onto the anchor values in the
// least-squares sense on a log scale (geometric mean of the ratios).
inline double nand2_calibration_factor(const DeviceParams& p) {
  std::array<std::pair<GateKind, std::size_t>, 1> nand2{{{GateKind::Nand, 2}}};
  auto raw = build_leakage_table(p, nand2);
  double log_sum = 0.0;
  for (std::uint32_t pat = 0; pat < 4; ++pat) {
    log_sum += std::log(kNand2AnchorNa[pat] / raw.get(GateKind::Nand, 2, pat));
  }
  return std::exp(log_sum / 4.0);
}

// Analytic table for the whole library, scaled onto the NAND2 anchor.
inline LeakageTable calibrated_leakage_table(const DeviceParams& p) {
  auto cells = library_cells();
  auto t = build_leakage_table(p, cells);
  t.scale(nand2_calibration_factor(p));
  return t;
}

// The bundled default: calibrated analytic values with the NAND2 rows
// replaced by the measured ones.
inline LeakageTable bundled_leakage_table(const DeviceParams& p = {}) {
  auto t = calibrated_leakage_table(p);
  for (std::uint32_t pat = 0; pat < 4; ++pat) t.set(GateKind::Nand, 2, pat, kNand2AnchorNa[pat]);
  t.source = LeakageTable::Source::File;
  return t;
}

namespace detail {

inline std::uint32_t gate_pattern(const Circuit& c, const Assignment& a, const Gate& g) {
  std::uint32_t idx = 0;
  for (LineId in : g.inputs) {
    Logic3 v = a[in];
    if (!is_binary(v)) throw Error("X on '" + c.line_name(in) + "' during leakage lookup");
    idx = (idx << 1) | static_cast<std::uint32_t>(v == Logic3::One);
  }
  return idx;
}

}  // namespace detail

// Total leakage current (nA) of the circuit under a binary assignment.
inline double total_leakage(const Circuit& c, const Assignment& a, const LeakageTable& t) {
  double sum = 0.0;
  for (const Gate& g : c.gates()) {
    sum += t.get(g.kind, g.inputs.size(), detail::gate_pattern(c, a, g));
  }
  return sum;
}

// Static power in microwatts: sum of gate leakage currents times Vdd.
inline double static_power(const Circuit& c, const Assignment& a, const LeakageTable& t, double vdd) {
  return total_leakage(c, a, t) * vdd * 1e-3;
}

}  // namespace scanpower
