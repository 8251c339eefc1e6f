#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "scanpower/error.hpp"

namespace scanpower {

using LineId = std::uint32_t;
using GateId = std::uint32_t;

inline constexpr LineId kNoLine = std::numeric_limits<LineId>::max();
inline constexpr GateId kNoGate = std::numeric_limits<GateId>::max();

// Nand, Nor, Inv and Mux2 form the mapped library. The remaining kinds only
// exist between parsing and technology mapping.
enum class GateKind : std::uint8_t { Nand, Nor, Inv, Mux2, And, Or, Xor, Xnor, Buf };

constexpr std::string_view to_string(GateKind kind) {
  switch (kind) {
    case GateKind::Nand: return "NAND";
    case GateKind::Nor: return "NOR";
    case GateKind::Inv: return "NOT";
    case GateKind::Mux2: return "MUX2";
    case GateKind::And: return "AND";
    case GateKind::Or: return "OR";
    case GateKind::Xor: return "XOR";
    case GateKind::Xnor: return "XNOR";
    case GateKind::Buf: return "BUFF";
  }
  return "?";
}

inline std::optional<GateKind> gate_kind_from_string(std::string_view text) {
  std::string upper(text);
  std::transform(upper.begin(), upper.end(), upper.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  if (upper == "NAND") return GateKind::Nand;
  if (upper == "NOR") return GateKind::Nor;
  if (upper == "NOT" || upper == "INV") return GateKind::Inv;
  if (upper == "MUX2" || upper == "MUX") return GateKind::Mux2;
  if (upper == "AND") return GateKind::And;
  if (upper == "OR") return GateKind::Or;
  if (upper == "XOR") return GateKind::Xor;
  if (upper == "XNOR") return GateKind::Xnor;
  if (upper == "BUFF" || upper == "BUF") return GateKind::Buf;
  return std::nullopt;
}

constexpr bool is_library_kind(GateKind kind) {
  return kind == GateKind::Nand || kind == GateKind::Nor || kind == GateKind::Inv ||
         kind == GateKind::Mux2;
}

// 0 for Nand/And, 1 for Nor/Or; nothing for the rest.
constexpr std::optional<bool> controlling_value(GateKind kind) {
  switch (kind) {
    case GateKind::Nand:
    case GateKind::And: return false;
    case GateKind::Nor:
    case GateKind::Or: return true;
    default: return std::nullopt;
  }
}

// Mux2 pin order.
inline constexpr std::size_t kMuxSelect = 0;
inline constexpr std::size_t kMuxData = 1;
inline constexpr std::size_t kMuxConstant = 2;

enum class LineRole : std::uint8_t {
  Gate,          // driven by a gate output
  PrimaryInput,
  PseudoInput,   // scan-cell output feeding the combinational part
  ScanEnable,    // shift-enable, 1 while shifting
  MuxConstant,   // tie-off leg of an inserted isolation mux
};

struct Gate {
  GateKind kind;
  std::vector<LineId> inputs;
  LineId output;
};

// Combinational part of a full-scan circuit. Flip-flops are cut: each one
// contributes a pseudo-input (its Q) and a pseudo-output (its D).
//
// Build with add_line/add_gate/add_* and call finalize(); queries other than
// the raw lists require a finalized circuit. Copies are independent values,
// so passes transform a copy and finalize it again.
class Circuit {
 public:
  explicit Circuit(std::string name = {}) : name_(std::move(name)) {}

  const std::string& name() const { return name_; }
  void set_name(std::string name) { name_ = std::move(name); }

  LineId add_line(std::string name, LineRole role = LineRole::Gate) {
    if (line_index_.count(name) != 0) throw NetlistError("duplicate line name '" + name + "'");
    auto id = static_cast<LineId>(line_names_.size());
    line_index_.emplace(name, id);
    line_names_.push_back(std::move(name));
    roles_.push_back(role);
    finalized_ = false;
    return id;
  }

  GateId add_gate(GateKind kind, std::vector<LineId> inputs, LineId output) {
    auto id = static_cast<GateId>(gates_.size());
    gates_.push_back(Gate{kind, std::move(inputs), output});
    finalized_ = false;
    return id;
  }

  void add_primary_input(LineId line) {
    roles_.at(line) = LineRole::PrimaryInput;
    primary_inputs_.push_back(line);
    finalized_ = false;
  }
  void add_primary_output(LineId line) {
    primary_outputs_.push_back(line);
    finalized_ = false;
  }
  // One scan cell: q feeds the logic, d is captured.
  void add_scan_cell(LineId q, LineId d) {
    roles_.at(q) = LineRole::PseudoInput;
    pseudo_inputs_.push_back(q);
    pseudo_outputs_.push_back(d);
    scan_chain_order_.push_back(q);
    finalized_ = false;
  }
  void set_scan_chain_order(std::vector<LineId> order) {
    scan_chain_order_ = std::move(order);
    finalized_ = false;
  }
  void set_gate_inputs(GateId gate, std::vector<LineId> inputs) {
    gates_.at(gate).inputs = std::move(inputs);
    finalized_ = false;
  }

  // Inserts an isolation mux on pseudo-input `q`: every consumer of q is
  // rewired to the mux output, which selects q in normal mode and a tie-off
  // constant while shift-enable is 1. Returns the mux gate id.
  GateId insert_mux(LineId q) {
    if (roles_.at(q) != LineRole::PseudoInput) {
      throw NetlistError("'" + line_names_[q] + "' is not a pseudo-input");
    }
    if (std::find(multiplexed_.begin(), multiplexed_.end(), q) != multiplexed_.end()) {
      throw NetlistError("'" + line_names_[q] + "' is already multiplexed");
    }
    if (scan_enable_ == kNoLine) scan_enable_ = add_line(fresh_name("scan_enable"), LineRole::ScanEnable);
    LineId constant = add_line(fresh_name(line_names_[q] + "$c"), LineRole::MuxConstant);
    LineId out = add_line(fresh_name(line_names_[q] + "$m"), LineRole::Gate);
    for (auto& g : gates_) std::replace(g.inputs.begin(), g.inputs.end(), q, out);
    std::replace(primary_outputs_.begin(), primary_outputs_.end(), q, out);
    std::replace(pseudo_outputs_.begin(), pseudo_outputs_.end(), q, out);
    multiplexed_.push_back(q);
    mux_constants_.push_back(constant);
    return add_gate(GateKind::Mux2, {scan_enable_, q, constant}, out);
  }

  // Marks that the mux-insertion pass ran, even if it kept no mux. Changes
  // which inputs count as freely assignable.
  void mark_mux_pass_applied() { mux_pass_applied_ = true; }
  bool mux_pass_applied() const { return mux_pass_applied_; }

  // Validates all structural invariants and builds the derived indices.
  void finalize();
  bool finalized() const { return finalized_; }

  // ---- queries ----
  std::size_t line_count() const { return line_names_.size(); }
  std::size_t gate_count() const { return gates_.size(); }
  const std::string& line_name(LineId line) const { return line_names_.at(line); }
  std::optional<LineId> find_line(std::string_view name) const {
    auto it = line_index_.find(std::string(name));
    if (it == line_index_.end()) return std::nullopt;
    return it->second;
  }
  LineRole role(LineId line) const { return roles_.at(line); }
  bool is_input(LineId line) const { return roles_.at(line) != LineRole::Gate; }

  const std::vector<Gate>& gates() const { return gates_; }
  const Gate& gate(GateId id) const { return gates_.at(id); }

  GateId driver(LineId line) const { return checked().driver_.at(line); }
  // Distinct gates reading `line`, ascending id.
  std::span<const GateId> fanout(LineId line) const { return checked().fanout_.at(line); }
  // Gate input pins reading `line`.
  std::size_t fanout_pins(LineId line) const { return checked().fanout_pins_.at(line); }
  std::size_t max_fanout() const {
    std::size_t best = 0;
    for (const auto& f : checked().fanout_) best = std::max(best, f.size());
    return best;
  }
  // Gates in topological order (fanins first).
  std::span<const GateId> topo_order() const { return checked().topo_; }

  std::span<const LineId> primary_inputs() const { return primary_inputs_; }
  std::span<const LineId> primary_outputs() const { return primary_outputs_; }
  std::span<const LineId> pseudo_inputs() const { return pseudo_inputs_; }
  std::span<const LineId> pseudo_outputs() const { return pseudo_outputs_; }
  std::span<const LineId> scan_chain_order() const { return scan_chain_order_; }
  std::span<const LineId> multiplexed() const { return multiplexed_; }
  bool is_multiplexed(LineId q) const {
    return std::find(multiplexed_.begin(), multiplexed_.end(), q) != multiplexed_.end();
  }

  LineId scan_enable() const { return scan_enable_; }
  // Tie-off line of the mux on multiplexed pseudo-input q.
  LineId mux_constant(LineId q) const {
    for (std::size_t i = 0; i < multiplexed_.size(); ++i) {
      if (multiplexed_[i] == q) return mux_constants_[i];
    }
    throw NetlistError("'" + line_names_.at(q) + "' is not multiplexed");
  }
  // Pseudo-input whose mux owns tie-off line `constant`.
  LineId multiplexed_source(LineId constant) const {
    for (std::size_t i = 0; i < mux_constants_.size(); ++i) {
      if (mux_constants_[i] == constant) return multiplexed_[i];
    }
    throw NetlistError("'" + line_names_.at(constant) + "' is not a mux tie-off");
  }

  // Lines the scan-mode pattern may drive: primary inputs, then the tie-off
  // leg of every multiplexed pseudo-input in insertion order.
  std::vector<LineId> controlled_inputs() const {
    std::vector<LineId> out(primary_inputs_.begin(), primary_inputs_.end());
    out.insert(out.end(), mux_constants_.begin(), mux_constants_.end());
    return out;
  }
  bool is_controlled(LineId line) const {
    auto r = roles_.at(line);
    return r == LineRole::PrimaryInput || r == LineRole::MuxConstant;
  }

  // Only Nand, Nor, Inv and Mux2 present.
  bool is_mapped() const {
    return std::all_of(gates_.begin(), gates_.end(),
                       [](const Gate& g) { return is_library_kind(g.kind); });
  }

 private:
  const Circuit& checked() const {
    if (!finalized_) throw NetlistError("circuit '" + name_ + "' is not finalized");
    return *this;
  }

  std::string fresh_name(std::string base) const {
    if (line_index_.count(base) == 0) return base;
    for (int i = 1;; ++i) {
      std::string candidate = base + "_" + std::to_string(i);
      if (line_index_.count(candidate) == 0) return candidate;
    }
  }

  std::string name_;
  std::vector<std::string> line_names_;
  std::vector<LineRole> roles_;
  std::unordered_map<std::string, LineId> line_index_;
  std::vector<Gate> gates_;
  std::vector<LineId> primary_inputs_;
  std::vector<LineId> primary_outputs_;
  std::vector<LineId> pseudo_inputs_;
  std::vector<LineId> pseudo_outputs_;
  std::vector<LineId> scan_chain_order_;
  std::vector<LineId> multiplexed_;
  std::vector<LineId> mux_constants_;
  LineId scan_enable_ = kNoLine;
  bool mux_pass_applied_ = false;

  // derived
  bool finalized_ = false;
  std::vector<GateId> driver_;
  std::vector<std::vector<GateId>> fanout_;
  std::vector<std::size_t> fanout_pins_;
  std::vector<GateId> topo_;
};

// Topological order of the gates of `c` (fanins before fanouts). Ties are
// broken by gate id. Throws NetlistError naming a gate on a cycle.
inline std::vector<GateId> levelize(const Circuit& c) {
  const auto& gates = c.gates();
  std::vector<GateId> driver(c.line_count(), kNoGate);
  for (GateId g = 0; g < gates.size(); ++g) driver[gates[g].output] = g;

  std::vector<std::size_t> pending(gates.size(), 0);
  std::vector<std::vector<GateId>> readers(c.line_count());
  for (GateId g = 0; g < gates.size(); ++g) {
    for (LineId in : gates[g].inputs) {
      if (driver[in] != kNoGate) {
        ++pending[g];
        readers[in].push_back(g);
      }
    }
  }
  std::vector<GateId> order;
  order.reserve(gates.size());
  for (GateId g = 0; g < gates.size(); ++g) {
    if (pending[g] == 0) order.push_back(g);
  }
  for (std::size_t head = 0; head < order.size(); ++head) {
    GateId g = order[head];
    for (GateId reader : readers[gates[g].output]) {
      if (--pending[reader] == 0) order.push_back(reader);
    }
  }
  if (order.size() != gates.size()) {
    for (GateId g = 0; g < gates.size(); ++g) {
      if (pending[g] != 0) {
        throw NetlistError("combinational cycle through '" + c.line_name(gates[g].output) + "'");
      }
    }
  }
  return order;
}

inline void Circuit::finalize() {
  const std::size_t n = line_names_.size();
  auto check_line = [&](LineId line, const char* what) {
    if (line >= n) throw NetlistError(std::string("dangling line id in ") + what);
  };

  driver_.assign(n, kNoGate);
  for (GateId g = 0; g < gates_.size(); ++g) {
    const Gate& gate = gates_[g];
    check_line(gate.output, "gate output");
    for (LineId in : gate.inputs) check_line(in, "gate input");
    if (roles_[gate.output] != LineRole::Gate) {
      throw NetlistError("input line '" + line_names_[gate.output] + "' is also driven by a gate");
    }
    if (driver_[gate.output] != kNoGate) {
      throw NetlistError("line '" + line_names_[gate.output] + "' has more than one driver");
    }
    driver_[gate.output] = g;

    std::size_t arity = gate.inputs.size();
    bool ok = true;
    switch (gate.kind) {
      case GateKind::Inv:
      case GateKind::Buf: ok = arity == 1; break;
      case GateKind::Mux2: ok = arity == 3; break;
      case GateKind::Xor:
      case GateKind::Xnor: ok = arity >= 2; break;
      default: ok = arity >= 1; break;
    }
    if (!ok) {
      throw NetlistError("gate driving '" + line_names_[gate.output] + "' has invalid arity " +
                         std::to_string(arity) + " for " + std::string(to_string(gate.kind)));
    }
  }
  for (LineId line = 0; line < n; ++line) {
    if (roles_[line] == LineRole::Gate && driver_[line] == kNoGate) {
      throw NetlistError("line '" + line_names_[line] + "' has no driver");
    }
  }
  for (LineId line : primary_outputs_) check_line(line, "primary outputs");
  for (LineId line : pseudo_outputs_) check_line(line, "pseudo-outputs");

  auto sorted = [](std::vector<LineId> v) {
    std::sort(v.begin(), v.end());
    return v;
  };
  if (sorted(scan_chain_order_) != sorted(pseudo_inputs_)) {
    throw NetlistError("scan chain order is not a permutation of the pseudo-inputs");
  }
  for (LineId q : multiplexed_) {
    if (roles_.at(q) != LineRole::PseudoInput) {
      throw NetlistError("multiplexed line '" + line_names_[q] + "' is not a pseudo-input");
    }
  }

  fanout_.assign(n, {});
  fanout_pins_.assign(n, 0);
  for (GateId g = 0; g < gates_.size(); ++g) {
    for (LineId in : gates_[g].inputs) {
      ++fanout_pins_[in];
      auto& f = fanout_[in];
      if (f.empty() || f.back() != g) f.push_back(g);
    }
  }
  topo_ = levelize(*this);
  finalized_ = true;
}

}  // namespace scanpower
