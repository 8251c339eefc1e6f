#pragma once

#include <string>
#include <vector>

#include "scanpower/netlist.hpp"

namespace scanpower {

// Maps every gate onto the Nand/Nor/Inv library:
//   And -> Nand + Inv        Or -> Nor + Inv        Buf -> Inv + Inv
//   Xor(a,b) -> four Nand2   Xnor -> Xor + Inv
// Multi-input And/Or/Nand/Nor stay n-ary; wider Xor/Xnor become a chain of
// two-input Xors. Single-input Nand/Nor become an Inv. Existing line ids,
// names and the input/output lists are preserved, so only new intermediate
// lines (named "<out>$<k>") are appended.
inline Circuit tech_map(const Circuit& c) {
  if (c.scan_enable() != kNoLine || !c.multiplexed().empty()) {
    throw NetlistError("tech_map expects a circuit without isolation muxes");
  }
  Circuit m(c.name());
  for (LineId line = 0; line < c.line_count(); ++line) m.add_line(c.line_name(line), c.role(line));
  for (LineId in : c.primary_inputs()) m.add_primary_input(in);
  for (LineId out : c.primary_outputs()) m.add_primary_output(out);
  for (std::size_t i = 0; i < c.pseudo_inputs().size(); ++i) {
    m.add_scan_cell(c.pseudo_inputs()[i], c.pseudo_outputs()[i]);
  }
  std::vector<LineId> order(c.scan_chain_order().begin(), c.scan_chain_order().end());
  m.set_scan_chain_order(std::move(order));

  for (const Gate& g : c.gates()) {
    int counter = 0;
    auto fresh = [&]() {
      while (true) {
        std::string name = c.line_name(g.output) + "$" + std::to_string(++counter);
        if (!m.find_line(name)) return m.add_line(std::move(name));
      }
    };
    auto xor2 = [&](LineId a, LineId b, LineId out) {
      LineId n1 = fresh(), n2 = fresh(), n3 = fresh();
      m.add_gate(GateKind::Nand, {a, b}, n1);
      m.add_gate(GateKind::Nand, {a, n1}, n2);
      m.add_gate(GateKind::Nand, {b, n1}, n3);
      m.add_gate(GateKind::Nand, {n2, n3}, out);
    };
    auto xor_chain = [&](LineId out) {
      LineId acc = g.inputs[0];
      for (std::size_t i = 1; i < g.inputs.size(); ++i) {
        LineId dst = i + 1 == g.inputs.size() ? out : fresh();
        xor2(acc, g.inputs[i], dst);
        acc = dst;
      }
    };

    switch (g.kind) {
      case GateKind::Inv:
      case GateKind::Mux2:
        m.add_gate(g.kind, g.inputs, g.output);
        break;
      case GateKind::Nand:
      case GateKind::Nor:
        if (g.inputs.size() == 1) {
          m.add_gate(GateKind::Inv, g.inputs, g.output);
        } else {
          m.add_gate(g.kind, g.inputs, g.output);
        }
        break;
      case GateKind::And:
      case GateKind::Or: {
        LineId mid = fresh();
        if (g.inputs.size() == 1) {
          m.add_gate(GateKind::Inv, g.inputs, mid);
        } else {
          m.add_gate(g.kind == GateKind::And ? GateKind::Nand : GateKind::Nor, g.inputs, mid);
        }
        m.add_gate(GateKind::Inv, {mid}, g.output);
        break;
      }
      case GateKind::Buf: {
        LineId mid = fresh();
        m.add_gate(GateKind::Inv, g.inputs, mid);
        m.add_gate(GateKind::Inv, {mid}, g.output);
        break;
      }
      case GateKind::Xor:
        xor_chain(g.output);
        break;
      case GateKind::Xnor: {
        LineId mid = fresh();
        xor_chain(mid);
        m.add_gate(GateKind::Inv, {mid}, g.output);
        break;
      }
    }
  }
  m.finalize();
  return m;
}

}  // namespace scanpower
