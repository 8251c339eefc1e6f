#pragma once

// Reader and writer for the ISCAS `.bench` netlist dialect:
//
//   # comment
//   INPUT(G0)
//   OUTPUT(G17)
//   G5 = DFF(G10)
//   G14 = NOT(G0)
//
// Keywords are case-insensitive; NOT/INV and BUF/BUFF are synonyms.

#include <cctype>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "scanpower/error.hpp"
#include "scanpower/netlist.hpp"

namespace scanpower {

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

inline std::string upper(std::string_view s) {
  std::string out(s);
  for (auto& ch : out) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
  return out;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// "KEYWORD(a, b, c)" -> keyword and argument list.
inline bool split_call(std::string_view text, std::string& keyword, std::vector<std::string>& args) {
  auto open = text.find('(');
  auto close = text.rfind(')');
  if (open == std::string_view::npos || close == std::string_view::npos || close < open) return false;
  if (!trim(text.substr(close + 1)).empty()) return false;
  keyword = std::string(trim(text.substr(0, open)));
  args.clear();
  std::string_view inner = text.substr(open + 1, close - open - 1);
  if (trim(inner).empty()) return !keyword.empty();
  std::size_t start = 0;
  while (true) {
    auto comma = inner.find(',', start);
    auto piece = trim(inner.substr(start, comma == std::string_view::npos ? std::string_view::npos
                                                                          : comma - start));
    if (piece.empty()) return false;
    args.emplace_back(piece);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return !keyword.empty();
}

}  // namespace detail

// Parses `.bench` source into an unmapped, finalized circuit. DFF declaration
// order becomes the scan chain order.
inline Circuit parse_bench(std::string_view text, std::string name = {}) {
  struct LineInfo {
    std::size_t defined_at = 0;     // 0: not yet defined
    std::size_t first_use = 0;
  };
  struct PendingGate {
    GateKind kind;
    std::vector<LineId> inputs;
    LineId output;
    std::size_t source_line;
  };

  Circuit c(std::move(name));
  std::vector<LineInfo> info;
  std::vector<PendingGate> pending;
  std::vector<std::pair<LineId, LineId>> scan_cells;
  std::vector<LineId> outputs;
  std::vector<LineId> inputs;

  auto line_for = [&](const std::string& signal, std::size_t at) -> LineId {
    if (auto id = c.find_line(signal)) return *id;
    LineId id = c.add_line(signal);
    info.push_back(LineInfo{0, at});
    return id;
  };
  auto use = [&](const std::string& signal, std::size_t at) {
    LineId id = line_for(signal, at);
    if (info[id].first_use == 0) info[id].first_use = at;
    return id;
  };
  auto define = [&](const std::string& signal, std::size_t at) {
    LineId id = line_for(signal, at);
    if (info[id].defined_at != 0) {
      throw ParseError(at, "duplicate driver for '" + signal + "' (first driven on line " +
                               std::to_string(info[id].defined_at) + ")");
    }
    info[id].defined_at = at;
    return id;
  };

  std::size_t lineno = 0;
  std::size_t pos = 0;
  std::string keyword;
  std::vector<std::string> args;
  while (pos <= text.size()) {
    auto eol = text.find('\n', pos);
    std::string_view raw = text.substr(pos, eol == std::string_view::npos ? std::string_view::npos
                                                                          : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++lineno;
    if (auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    std::string_view stmt = detail::trim(raw);
    if (stmt.empty()) continue;

    auto eq = stmt.find('=');
    if (eq == std::string_view::npos) {
      if (!detail::split_call(stmt, keyword, args) || args.size() != 1) {
        throw ParseError(lineno, "malformed statement '" + std::string(stmt) + "'");
      }
      auto kw = detail::upper(keyword);
      if (kw == "INPUT") {
        inputs.push_back(define(args[0], lineno));
      } else if (kw == "OUTPUT") {
        outputs.push_back(use(args[0], lineno));
      } else {
        throw ParseError(lineno, "unknown declaration '" + keyword + "'");
      }
      continue;
    }

    std::string target(detail::trim(stmt.substr(0, eq)));
    if (target.empty()) throw ParseError(lineno, "missing signal name before '='");
    if (!detail::split_call(stmt.substr(eq + 1), keyword, args) || args.empty()) {
      throw ParseError(lineno, "malformed gate '" + std::string(stmt) + "'");
    }
    auto kw = detail::upper(keyword);
    if (kw == "DFF") {
      if (args.size() != 1) throw ParseError(lineno, "DFF takes exactly one input");
      LineId q = define(target, lineno);
      LineId d = use(args[0], lineno);
      scan_cells.emplace_back(q, d);
      continue;
    }
    auto kind = gate_kind_from_string(keyword);
    if (!kind) throw ParseError(lineno, "unknown gate keyword '" + keyword + "'");
    std::size_t arity = args.size();
    bool arity_ok = (*kind == GateKind::Inv || *kind == GateKind::Buf) ? arity == 1
                    : *kind == GateKind::Mux2                           ? arity == 3
                    : (*kind == GateKind::Xor || *kind == GateKind::Xnor) ? arity >= 2
                                                                          : arity >= 1;
    if (!arity_ok) {
      throw ParseError(lineno, std::string(to_string(*kind)) + " with " + std::to_string(arity) +
                                   " inputs");
    }
    LineId out = define(target, lineno);
    std::vector<LineId> ins;
    for (const auto& a : args) ins.push_back(use(a, lineno));
    pending.push_back(PendingGate{*kind, std::move(ins), out, lineno});
  }

  for (LineId id = 0; id < info.size(); ++id) {
    if (info[id].defined_at == 0) {
      throw ParseError(info[id].first_use, "undefined signal '" + c.line_name(id) + "'");
    }
  }
  for (LineId in : inputs) c.add_primary_input(in);
  for (LineId out : outputs) c.add_primary_output(out);
  for (auto [q, d] : scan_cells) c.add_scan_cell(q, d);
  for (auto& g : pending) c.add_gate(g.kind, std::move(g.inputs), g.output);

  try {
    c.finalize();
  } catch (const NetlistError& e) {
    // Attribute cycles to the statement of a gate on the cycle.
    std::string msg = e.what();
    for (const auto& g : pending) {
      if (msg.find("'" + c.line_name(g.output) + "'") != std::string::npos) {
        throw ParseError(g.source_line, msg);
      }
    }
    throw ParseError(lineno, msg);
  }
  return c;
}

inline Circuit read_bench(const std::string& path) {
  std::string stem = path;
  if (auto slash = stem.find_last_of("/\\"); slash != std::string::npos) stem = stem.substr(slash + 1);
  if (auto dot = stem.rfind('.'); dot != std::string::npos) stem = stem.substr(0, dot);
  return parse_bench(detail::read_file(path), stem);
}

// Serializes a circuit in the same dialect. Scan-enable and mux tie-off lines
// are emitted as INPUTs, so only mux-free circuits round-trip exactly.
inline std::string write_bench(const Circuit& c) {
  std::ostringstream out;
  out << "# " << (c.name().empty() ? "circuit" : c.name()) << "\n";
  out << "# " << c.primary_inputs().size() << " inputs, " << c.primary_outputs().size()
      << " outputs, " << c.pseudo_inputs().size() << " D-type flipflops, " << c.gate_count()
      << " gates\n\n";
  for (LineId in : c.primary_inputs()) out << "INPUT(" << c.line_name(in) << ")\n";
  for (LineId line = 0; line < c.line_count(); ++line) {
    auto r = c.role(line);
    if (r == LineRole::ScanEnable || r == LineRole::MuxConstant) {
      out << "INPUT(" << c.line_name(line) << ")  # scan-mode control\n";
    }
  }
  out << "\n";
  for (LineId o : c.primary_outputs()) out << "OUTPUT(" << c.line_name(o) << ")\n";
  out << "\n";
  // Scan cells in chain order so the default order survives a round trip.
  auto ppi = c.pseudo_inputs();
  auto ppo = c.pseudo_outputs();
  for (LineId q : c.scan_chain_order()) {
    auto idx = static_cast<std::size_t>(std::find(ppi.begin(), ppi.end(), q) - ppi.begin());
    out << c.line_name(q) << " = DFF(" << c.line_name(ppo[idx]) << ")\n";
  }
  out << "\n";
  for (GateId g : c.topo_order()) {
    const Gate& gate = c.gate(g);
    out << c.line_name(gate.output) << " = " << to_string(gate.kind) << "(";
    for (std::size_t i = 0; i < gate.inputs.size(); ++i) {
      out << (i ? ", " : "") << c.line_name(gate.inputs[i]);
    }
    out << ")\n";
  }
  return out.str();
}

// Scan-order override: one pseudo-input name per line, scan-in end first.
inline std::vector<LineId> parse_scan_order(const Circuit& c, std::string_view text) {
  std::vector<LineId> order;
  std::vector<bool> seen(c.line_count(), false);
  std::size_t lineno = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto eol = text.find('\n', pos);
    auto raw = text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++lineno;
    if (auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    auto name = detail::trim(raw);
    if (name.empty()) continue;
    auto id = c.find_line(name);
    if (!id || c.role(*id) != LineRole::PseudoInput) {
      throw ParseError(lineno, "'" + std::string(name) + "' is not a pseudo-input");
    }
    if (seen[*id]) throw ParseError(lineno, "'" + std::string(name) + "' listed twice");
    seen[*id] = true;
    order.push_back(*id);
  }
  if (order.size() != c.pseudo_inputs().size()) {
    throw ParseError(lineno, "scan order lists " + std::to_string(order.size()) + " of " +
                                 std::to_string(c.pseudo_inputs().size()) + " pseudo-inputs");
  }
  return order;
}

inline Circuit with_scan_order(Circuit c, std::vector<LineId> order) {
  c.set_scan_chain_order(std::move(order));
  c.finalize();
  return c;
}

}  // namespace scanpower
