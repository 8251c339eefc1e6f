#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "scanpower/error.hpp"
#include "scanpower/netlist.hpp"

namespace scanpower {

enum class Logic3 : std::uint8_t { Zero, One, X };

constexpr Logic3 to_logic(bool b) { return b ? Logic3::One : Logic3::Zero; }
constexpr bool is_binary(Logic3 v) { return v != Logic3::X; }
constexpr Logic3 invert(Logic3 v) {
  return v == Logic3::X ? Logic3::X : (v == Logic3::One ? Logic3::Zero : Logic3::One);
}
constexpr char to_char(Logic3 v) { return v == Logic3::Zero ? '0' : v == Logic3::One ? '1' : 'X'; }

// Three-valued gate evaluation. A controlling input fixes the output even
// when other inputs are X. Mux2 pins are (select, data, constant).
inline Logic3 eval_gate(GateKind kind, std::span<const Logic3> in) {
  auto require = [&](bool ok) {
    if (!ok) {
      throw Error("arity " + std::to_string(in.size()) + " does not fit " +
                  std::string(to_string(kind)));
    }
  };
  auto all_and = [&]() {
    bool any_x = false;
    for (Logic3 v : in) {
      if (v == Logic3::Zero) return Logic3::Zero;
      any_x |= v == Logic3::X;
    }
    return any_x ? Logic3::X : Logic3::One;
  };
  auto all_or = [&]() {
    bool any_x = false;
    for (Logic3 v : in) {
      if (v == Logic3::One) return Logic3::One;
      any_x |= v == Logic3::X;
    }
    return any_x ? Logic3::X : Logic3::Zero;
  };
  switch (kind) {
    case GateKind::Nand: require(!in.empty()); return invert(all_and());
    case GateKind::And: require(!in.empty()); return all_and();
    case GateKind::Nor: require(!in.empty()); return invert(all_or());
    case GateKind::Or: require(!in.empty()); return all_or();
    case GateKind::Inv: require(in.size() == 1); return invert(in[0]);
    case GateKind::Buf: require(in.size() == 1); return in[0];
    case GateKind::Xor:
    case GateKind::Xnor: {
      require(in.size() >= 2);
      bool parity = kind == GateKind::Xnor;
      for (Logic3 v : in) {
        if (v == Logic3::X) return Logic3::X;
        parity ^= v == Logic3::One;
      }
      return to_logic(parity);
    }
    case GateKind::Mux2: {
      require(in.size() == 3);
      Logic3 sel = in[kMuxSelect];
      if (sel == Logic3::Zero) return in[kMuxData];
      if (sel == Logic3::One) return in[kMuxConstant];
      return in[kMuxData] == in[kMuxConstant] ? in[kMuxData] : Logic3::X;
    }
  }
  return Logic3::X;
}

// Values over every line of one circuit, indexed by LineId.
struct Assignment {
  std::vector<Logic3> values;
  bool simulated = false;

  Assignment() = default;
  explicit Assignment(std::size_t lines) : values(lines, Logic3::X) {}

  Logic3 operator[](LineId line) const { return values[line]; }
  Logic3& operator[](LineId line) { return values[line]; }
  std::size_t size() const { return values.size(); }
  bool operator==(const Assignment&) const = default;
};

// Forward evaluation in topological order. Input-role lines keep their value
// from `inputs` (X where unassigned); every gate output is recomputed.
inline Assignment simulate(const Circuit& c, const Assignment& inputs) {
  if (inputs.size() != c.line_count()) throw Error("assignment does not match circuit size");
  Assignment out(c.line_count());
  for (LineId line = 0; line < c.line_count(); ++line) {
    if (c.is_input(line)) out[line] = inputs[line];
  }
  std::vector<Logic3> buf;
  for (GateId g : c.topo_order()) {
    const Gate& gate = c.gate(g);
    buf.clear();
    for (LineId in : gate.inputs) buf.push_back(out[in]);
    out[gate.output] = eval_gate(gate.kind, buf);
  }
  out.simulated = true;
  return out;
}

namespace detail {

// Binary 64-lane simulation. Input-role words must be set by the caller.
inline void simulate_words(const Circuit& c, std::vector<std::uint64_t>& w) {
  for (GateId g : c.topo_order()) {
    const Gate& gate = c.gate(g);
    const auto& in = gate.inputs;
    std::uint64_t v = 0;
    switch (gate.kind) {
      case GateKind::Nand:
      case GateKind::And:
        v = ~std::uint64_t{0};
        for (LineId l : in) v &= w[l];
        if (gate.kind == GateKind::Nand) v = ~v;
        break;
      case GateKind::Nor:
      case GateKind::Or:
        v = 0;
        for (LineId l : in) v |= w[l];
        if (gate.kind == GateKind::Nor) v = ~v;
        break;
      case GateKind::Inv: v = ~w[in[0]]; break;
      case GateKind::Buf: v = w[in[0]]; break;
      case GateKind::Xor:
      case GateKind::Xnor:
        v = 0;
        for (LineId l : in) v ^= w[l];
        if (gate.kind == GateKind::Xnor) v = ~v;
        break;
      case GateKind::Mux2: {
        std::uint64_t sel = w[in[kMuxSelect]];
        v = (sel & w[in[kMuxConstant]]) | (~sel & w[in[kMuxData]]);
        break;
      }
    }
    w[gate.output] = v;
  }
}

}  // namespace detail

// C_Li = unit_cap * (gate-input pins driven + 1). The optional per-kind
// internal capacitance feeds the internal-node term of the dynamic power,
// with the internal switching activity taken equal to the output's.
struct CapacitanceModel {
  double unit_cap = 1e-15;                   // F
  std::map<GateKind, double> internal_cap;   // F per gate; empty: term off
  double vth = 0.32;                         // V, internal swing is vdd - vth

  double load(const Circuit& c, GateId g) const {
    return unit_cap * static_cast<double>(c.fanout_pins(c.gate(g).output) + 1);
  }
  double internal(GateKind kind) const {
    auto it = internal_cap.find(kind);
    return it == internal_cap.end() ? 0.0 : it->second;
  }
};

// Switched capacitance accumulated over cycle pairs.
struct SwitchedCap {
  double load = 0.0;      // sum of alpha_i * C_Li
  double internal = 0.0;  // sum of alpha_i * C_int,i

  SwitchedCap& operator+=(const SwitchedCap& o) {
    load += o.load;
    internal += o.internal;
    return *this;
  }
};

// Sums the load of every gate output that differs between two binary,
// simulated assignments.
inline SwitchedCap weighted_activity(const Circuit& c, const Assignment& before,
                                     const Assignment& after, const CapacitanceModel& cap) {
  SwitchedCap sum;
  for (GateId g = 0; g < c.gate_count(); ++g) {
    LineId out = c.gate(g).output;
    if (!is_binary(before[out]) || !is_binary(after[out])) {
      throw Error("switching activity undefined: '" + c.line_name(out) + "' is X");
    }
    if (before[out] != after[out]) {
      sum.load += cap.load(c, g);
      sum.internal += cap.internal(c.gate(g).kind);
    }
  }
  return sum;
}

// Load plus internal-node switching power, short-circuit current ignored (W).
inline double dynamic_power(const SwitchedCap& activity, double vdd, double freq, double vth = 0.0) {
  if (activity.load < 0.0 || activity.internal < 0.0) throw Error("negative switching activity");
  return 0.5 * freq * (vdd * vdd * activity.load + vdd * (vdd - vth) * activity.internal);
}

// Energy per cycle: dynamic power divided by the clock frequency (W/Hz).
inline double dynamic_power_per_hz(const SwitchedCap& activity, double vdd, double vth = 0.0) {
  return dynamic_power(activity, vdd, 1.0, vth);
}

}  // namespace scanpower
