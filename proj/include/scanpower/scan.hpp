#pragma once

// Scan-shift replay: drives the combinational part cycle by cycle while test
// vectors are shifted in, and accumulates the switched capacitance.
//
// Conventions:
//  * chain position 0 is the scan-in end; scan_chain_order()[p] is the
//    pseudo-input at position p
//  * vector bit 0 is shifted in first and ends at the tail (position L-1)
//  * the chain starts all-zero; each vector starts from the previous one
//  * every vector costs L shift cycles plus one capture cycle, and the
//    capture cycle is counted in every mode; it includes the switch back
//    to shift mode, so shift-cycle totals only see chain movement
//  * flip-flop internal transitions are not part of the sum

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "scanpower/bench.hpp"
#include "scanpower/simulate.hpp"

namespace scanpower {

using TestVector = std::vector<bool>;

enum class ScanMode {
  Traditional,   // inputs float with the chain, primary inputs held at 0
  InputControl,  // primary inputs held at the pattern
  Proposed,      // primary inputs and mux tie-offs held at the pattern
};

constexpr std::string_view to_string(ScanMode mode) {
  switch (mode) {
    case ScanMode::Traditional: return "traditional";
    case ScanMode::InputControl: return "input_control";
    case ScanMode::Proposed: return "proposed";
  }
  return "?";
}

namespace detail {

inline Logic3 held_value(const Circuit& c, const Assignment& pattern, LineId line) {
  Logic3 v = pattern[line];
  if (!is_binary(v)) throw Error("pattern leaves controlled input '" + c.line_name(line) + "' at X");
  return v;
}

}  // namespace detail

// Input-role values for one cycle. `chain` is indexed by scan position and
// may contain X. Shift-enable is 1 only while shifting in proposed mode.
inline Assignment scan_inputs(const Circuit& c, ScanMode mode, const Assignment& pattern,
                              std::span<const Logic3> chain, bool shifting) {
  if (chain.size() != c.scan_chain_order().size()) throw Error("chain state has wrong length");
  if (mode != ScanMode::Traditional && pattern.size() != c.line_count()) {
    throw Error("pattern does not match circuit size");
  }
  Assignment a(c.line_count());
  for (std::size_t p = 0; p < chain.size(); ++p) a[c.scan_chain_order()[p]] = chain[p];
  if (c.scan_enable() != kNoLine) {
    a[c.scan_enable()] = to_logic(shifting && mode == ScanMode::Proposed);
  }
  for (LineId pi : c.primary_inputs()) {
    a[pi] = mode == ScanMode::Traditional ? Logic3::Zero : detail::held_value(c, pattern, pi);
  }
  for (LineId q : c.multiplexed()) {
    LineId tie = c.mux_constant(q);
    a[tie] = mode == ScanMode::Proposed ? detail::held_value(c, pattern, tie) : Logic3::Zero;
  }
  return a;
}

// Steady scan-mode assignment with every chain cell at `chain_value`.
inline Assignment scan_steady_state(const Circuit& c, ScanMode mode, const Assignment& pattern,
                                    Logic3 chain_value) {
  std::vector<Logic3> chain(c.scan_chain_order().size(), chain_value);
  return simulate(c, scan_inputs(c, mode, pattern, chain, true));
}

struct ShiftActivity {
  SwitchedCap shift;
  SwitchedCap capture;
  std::size_t shift_cycles = 0;
  std::size_t capture_cycles = 0;

  SwitchedCap total() const {
    SwitchedCap t = shift;
    t += capture;
    return t;
  }
  std::size_t cycles() const { return shift_cycles + capture_cycles; }
};

inline ShiftActivity scan_shift_activity(const Circuit& c, std::span<const TestVector> vectors,
                                         ScanMode mode, const Assignment& pattern,
                                         const CapacitanceModel& cap) {
  const std::size_t length = c.scan_chain_order().size();
  for (const auto& v : vectors) {
    if (v.size() != length) {
      throw Error("test vector of length " + std::to_string(v.size()) + " for a chain of " +
                  std::to_string(length));
    }
  }
  ShiftActivity result;
  std::vector<Logic3> chain(length, Logic3::Zero);
  Assignment prev = simulate(c, scan_inputs(c, mode, pattern, chain, true));
  for (const auto& v : vectors) {
    for (std::size_t bit = 0; bit < length; ++bit) {
      for (std::size_t p = length - 1; p > 0; --p) chain[p] = chain[p - 1];
      chain[0] = to_logic(v[bit]);
      Assignment next = simulate(c, scan_inputs(c, mode, pattern, chain, true));
      result.shift += weighted_activity(c, prev, next, cap);
      ++result.shift_cycles;
      prev = std::move(next);
    }
    // Capture, then the return to shift mode with the chain unchanged; both
    // edges are charged to the capture cycle.
    Assignment captured = simulate(c, scan_inputs(c, mode, pattern, chain, false));
    Assignment restored = simulate(c, scan_inputs(c, mode, pattern, chain, true));
    result.capture += weighted_activity(c, prev, captured, cap);
    result.capture += weighted_activity(c, captured, restored, cap);
    ++result.capture_cycles;
    prev = std::move(restored);
  }
  return result;
}

// Test-vector file: one 0/1 string per line in scan-in order; '#' comments.
inline std::vector<TestVector> parse_vectors(std::string_view text, std::size_t length) {
  std::vector<TestVector> out;
  std::size_t lineno = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto eol = text.find('\n', pos);
    auto raw = text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++lineno;
    if (auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    auto bits = detail::trim(raw);
    if (bits.empty()) continue;
    if (bits.size() != length) {
      throw ParseError(lineno, "vector has " + std::to_string(bits.size()) + " bits, chain has " +
                                   std::to_string(length));
    }
    TestVector v;
    v.reserve(length);
    for (char ch : bits) {
      if (ch != '0' && ch != '1') throw ParseError(lineno, "vector bits must be 0 or 1");
      v.push_back(ch == '1');
    }
    out.push_back(std::move(v));
  }
  return out;
}

inline std::string format_vectors(std::span<const TestVector> vectors) {
  std::string out;
  for (const auto& v : vectors) {
    for (bool b : v) out += b ? '1' : '0';
    out += '\n';
  }
  return out;
}

}  // namespace scanpower
