#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "scanpower/bench.hpp"
#include "scanpower/netlist.hpp"

namespace scanpower {

// Gate delays in arbitrary time units. Unit delay by default.
struct DelayModel {
  std::map<GateKind, double> delay{{GateKind::Nand, 1.0}, {GateKind::Nor, 1.0},
                                   {GateKind::Inv, 1.0},  {GateKind::And, 1.0},
                                   {GateKind::Or, 1.0},   {GateKind::Xor, 1.0},
                                   {GateKind::Xnor, 1.0}, {GateKind::Buf, 1.0}};
  double mux_delay = 1.0;

  double of(GateKind kind) const {
    if (kind == GateKind::Mux2) return mux_delay;
    auto it = delay.find(kind);
    if (it == delay.end()) throw Error("no delay for " + std::string(to_string(kind)));
    return it->second;
  }
};

// Delay table file: CSV `kind,delay`, optional header, '#' comments. Kinds
// use the .bench keywords; MUX2 sets the mux delay.
inline DelayModel parse_delay_table(std::string_view text, DelayModel base = {}) {
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
    auto comma = row.find(',');
    if (comma == std::string_view::npos) throw ParseError(lineno, "expected kind,delay");
    auto key = detail::trim(row.substr(0, comma));
    auto val = std::string(detail::trim(row.substr(comma + 1)));
    if (detail::upper(key) == "KIND") continue;
    auto kind = gate_kind_from_string(key);
    if (!kind) throw ParseError(lineno, "unknown gate kind '" + std::string(key) + "'");
    double d = 0.0;
    try {
      std::size_t used = 0;
      d = std::stod(val, &used);
      if (used != val.size()) throw std::invalid_argument(val);
    } catch (const std::exception&) {
      throw ParseError(lineno, "bad delay '" + val + "'");
    }
    if (!(d >= 0.0)) throw ParseError(lineno, "delays must be nonnegative");
    if (*kind == GateKind::Mux2) {
      base.mux_delay = d;
    } else {
      base.delay[*kind] = d;
    }
  }
  return base;
}

// Latest arrival time of every line; inputs arrive at 0.
inline std::vector<double> arrival_times(const Circuit& c, const DelayModel& d) {
  std::vector<double> at(c.line_count(), 0.0);
  for (GateId g : c.topo_order()) {
    const Gate& gate = c.gate(g);
    double latest = 0.0;
    for (LineId in : gate.inputs) latest = std::max(latest, at[in]);
    at[gate.output] = latest + d.of(gate.kind);
  }
  return at;
}

// Longest input-to-output path delay, where outputs are the primary outputs
// and the scan-cell data inputs. 0 for a circuit without gates.
inline double critical_path_delay(const Circuit& c, const DelayModel& d) {
  auto at = arrival_times(c, d);
  double worst = 0.0;
  for (LineId o : c.primary_outputs()) worst = std::max(worst, at[o]);
  for (LineId o : c.pseudo_outputs()) worst = std::max(worst, at[o]);
  return worst;
}

// Tries an isolation mux on each pseudo-input in scan-chain order and keeps
// it only if the critical-path delay stays exactly the same.
inline Circuit add_muxes(const Circuit& c, const DelayModel& d) {
  if (!c.is_mapped()) throw NetlistError("add_muxes expects a mapped circuit");
  const double reference = critical_path_delay(c, d);
  Circuit current = c;
  for (LineId q : c.scan_chain_order()) {
    Circuit trial = current;
    trial.insert_mux(q);
    trial.finalize();
    if (critical_path_delay(trial, d) == reference) current = std::move(trial);
  }
  current.mark_mux_pass_applied();
  current.finalize();
  return current;
}

}  // namespace scanpower
