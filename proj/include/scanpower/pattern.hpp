#pragma once

// Search for a scan-mode pattern on the controlled inputs that blocks the
// transitions coming out of the non-multiplexed scan cells, steered toward
// low leakage by the leakage observability of each line.

#include <algorithm>
#include <array>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "scanpower/leakage.hpp"
#include "scanpower/netlist.hpp"
#include "scanpower/observability.hpp"
#include "scanpower/scan.hpp"
#include "scanpower/simulate.hpp"

namespace scanpower {

struct SearchConfig {
  std::size_t backtrack_limit = 1000;  // per justification objective
  std::size_t fill_trials = 1000;
  std::uint64_t seed = 1;
  // Add the fanout of a gate to the transition set even after blocking it.
  bool literal_step_f = false;
};

struct Objective {
  LineId line;
  Logic3 value;
};

// Transition nodes and the gates where they may still be stopped.
struct TransitionFrontier {
  std::vector<LineId> tns;      // ascending; lines with an open target gate
  std::vector<GateId> tgs;      // output load descending, then gate id
  std::vector<bool> reached;    // every line a transition reaches, by LineId
};

// Scan-mode starting point of the search: shift-enable 1, controlled inputs
// and the chain at X.
inline Assignment scan_search_start(const Circuit& c) {
  Assignment a(c.line_count());
  if (c.scan_enable() != kNoLine) a[c.scan_enable()] = Logic3::One;
  return simulate(c, a);
}

// Propagates transitions from `seeds` to a fixpoint. Inverting or
// non-blocking cells (Inv, Buf, Xor, Xnor) and `forced` gates pass them on;
// a gate with an input at its controlling value stops them; a gate whose
// other inputs are all non-controlling passes them on; anything else is open
// and lands in the TGS.
inline TransitionFrontier update_frontier(const Circuit& c, const Assignment& a,
                                          std::span<const LineId> seeds,
                                          const std::vector<bool>& forced = {},
                                          const CapacitanceModel& cap = {}) {
  TransitionFrontier f;
  f.reached.assign(c.line_count(), false);
  std::vector<bool> open(c.gate_count(), false);
  std::vector<LineId> work;
  auto reach = [&](LineId line) {
    if (!f.reached[line]) {
      f.reached[line] = true;
      work.push_back(line);
    }
  };
  for (LineId s : seeds) reach(s);

  while (!work.empty()) {
    LineId tn = work.back();
    work.pop_back();
    for (GateId g : c.fanout(tn)) {
      const Gate& gate = c.gate(g);
      if (!forced.empty() && forced[g]) {
        reach(gate.output);
        continue;
      }
      auto cv = controlling_value(gate.kind);
      if (!cv) {
        // Mux2 holding a constant leg stops the transition.
        if (gate.kind == GateKind::Mux2 && is_binary(a[gate.output])) continue;
        reach(gate.output);
        continue;
      }
      const Logic3 ctrl = to_logic(*cv);
      bool blocked = false;
      bool all_non_controlling = true;
      for (LineId in : gate.inputs) {
        if (a[in] == ctrl) blocked = true;
        if (in != tn && a[in] != invert(ctrl)) all_non_controlling = false;
      }
      if (blocked) continue;
      if (all_non_controlling) {
        reach(gate.output);
      } else {
        open[g] = true;
      }
    }
  }

  // A gate opened early may have been passed through later via another tn.
  for (GateId g = 0; g < c.gate_count(); ++g) {
    if (!open[g]) continue;
    if (f.reached[c.gate(g).output]) {
      open[g] = false;
      continue;
    }
    f.tgs.push_back(g);
  }
  std::stable_sort(f.tgs.begin(), f.tgs.end(), [&](GateId x, GateId y) {
    double cx = cap.load(c, x), cy = cap.load(c, y);
    if (cx != cy) return cx > cy;
    return x < y;
  });
  for (LineId line = 0; line < c.line_count(); ++line) {
    if (!f.reached[line]) continue;
    for (GateId g : c.fanout(line)) {
      if (open[g]) {
        f.tns.push_back(line);
        break;
      }
    }
  }
  return f;
}

namespace detail {

// X lines with an all-X path back to an unassigned controlled input.
inline std::vector<bool> controllable_lines(const Circuit& c, const Assignment& a) {
  std::vector<bool> ok(c.line_count(), false);
  for (LineId line = 0; line < c.line_count(); ++line) {
    ok[line] = c.is_controlled(line) && a[line] == Logic3::X;
  }
  for (GateId g : c.topo_order()) {
    const Gate& gate = c.gate(g);
    if (a[gate.output] != Logic3::X) continue;
    if (gate.kind == GateKind::Mux2) {
      Logic3 sel = a[gate.inputs[kMuxSelect]];
      LineId leg = sel == Logic3::One    ? gate.inputs[kMuxConstant]
                   : sel == Logic3::Zero ? gate.inputs[kMuxData]
                                         : kNoLine;
      ok[gate.output] = leg != kNoLine && ok[leg];
      continue;
    }
    for (LineId in : gate.inputs) {
      if (ok[in]) {
        ok[gate.output] = true;
        break;
      }
    }
  }
  return ok;
}

// Directive: to set a line to 1 pick the lowest observability, to set it
// to 0 the highest. Without observabilities, or on ties, the lowest id wins.
inline LineId pick_by_observability(std::span<const LineId> candidates, Logic3 needed,
                                    std::span<const double> lo) {
  LineId best = kNoLine;
  for (LineId cand : candidates) {
    if (best == kNoLine) {
      best = cand;
      continue;
    }
    if (lo.empty()) {
      best = std::min(best, cand);
      continue;
    }
    double a = lo[cand], b = lo[best];
    bool better = needed == Logic3::One ? a < b : a > b;
    if (better || (a == b && cand < best)) best = cand;
  }
  return best;
}

}  // namespace detail

// Maps an objective to one controlled-input decision by walking back
// through X lines. `lo` may be empty to disable the observability directive.
inline std::optional<Objective> backtrace(const Circuit& c, const Assignment& a, Objective objective,
                                          std::span<const double> lo) {
  const auto ok = detail::controllable_lines(c, a);
  LineId line = objective.line;
  Logic3 value = objective.value;
  std::vector<LineId> candidates;
  while (true) {
    if (!ok[line]) return std::nullopt;
    if (c.is_controlled(line)) return Objective{line, value};
    const Gate& gate = c.gate(c.driver(line));
    candidates.clear();
    switch (gate.kind) {
      case GateKind::Inv:
        line = gate.inputs[0];
        value = invert(value);
        continue;
      case GateKind::Buf:
        line = gate.inputs[0];
        continue;
      case GateKind::Mux2:
        line = a[gate.inputs[kMuxSelect]] == Logic3::One ? gate.inputs[kMuxConstant]
                                                         : gate.inputs[kMuxData];
        continue;
      case GateKind::Xor:
      case GateKind::Xnor: {
        bool parity = (value == Logic3::One) ^ (gate.kind == GateKind::Xnor);
        LineId pick = kNoLine;
        for (LineId in : gate.inputs) {
          if (pick == kNoLine && ok[in]) {
            pick = in;
          } else if (a[in] == Logic3::One) {
            parity = !parity;
          }
        }
        line = pick;
        value = to_logic(parity);
        continue;
      }
      case GateKind::Nand:
      case GateKind::Nor:
      case GateKind::And:
      case GateKind::Or: {
        bool inverting = gate.kind == GateKind::Nand || gate.kind == GateKind::Nor;
        Logic3 needed = inverting ? invert(value) : value;
        for (LineId in : gate.inputs) {
          if (ok[in]) candidates.push_back(in);
        }
        line = detail::pick_by_observability(candidates, needed, lo);
        value = needed;
        continue;
      }
    }
  }
}

// PODEM over the controlled inputs. On success `a` holds the extended,
// simulated assignment; on failure it is left exactly as it was.
inline bool justify(const Circuit& c, Assignment& a, Objective objective, std::span<const double> lo,
                    const SearchConfig& cfg) {
  if (a[objective.line] == objective.value) return true;
  if (a[objective.line] != Logic3::X) return false;

  struct Decision {
    LineId line;
    Logic3 value;
    bool flipped;
  };
  const Assignment saved = a;
  std::vector<Decision> stack;
  std::size_t backtracks = 0;

  while (true) {
    Logic3 now = a[objective.line];
    if (now == objective.value) return true;
    if (now == Logic3::X) {
      if (auto d = backtrace(c, a, objective, lo)) {
        stack.push_back({d->line, d->value, false});
        a[d->line] = d->value;
        a = simulate(c, a);
        continue;
      }
    }
    while (!stack.empty() && stack.back().flipped) {
      a[stack.back().line] = Logic3::X;
      stack.pop_back();
    }
    if (stack.empty() || ++backtracks > cfg.backtrack_limit) {
      a = saved;
      return false;
    }
    auto& top = stack.back();
    top.value = invert(top.value);
    top.flipped = true;
    a[top.line] = top.value;
    a = simulate(c, a);
  }
}

struct BlockingRecord {
  GateId gate;
  bool blocked;
  LineId side_input;  // kNoLine when not blocked
};

struct PatternResult {
  Assignment pattern;   // controlled inputs only; X where unassigned
  std::vector<BlockingRecord> report;
  std::size_t iterations = 0;
};

// Extracts the controlled-input values of a simulated assignment.
inline Assignment controlled_part(const Circuit& c, const Assignment& a) {
  Assignment p(c.line_count());
  for (LineId in : c.controlled_inputs()) p[in] = a[in];
  return p;
}

// Blocks scan transitions gate by gate, largest output load first. `lo` may be
// empty, which gives the undirected input-control baseline.
inline PatternResult find_controlled_input_pattern(const Circuit& c, std::span<const double> lo,
                                                   const SearchConfig& cfg,
                                                   const CapacitanceModel& cap = {}) {
  PatternResult result;
  Assignment a = scan_search_start(c);
  std::vector<LineId> seeds;
  for (LineId q : c.pseudo_inputs()) {
    if (!c.is_multiplexed(q)) seeds.push_back(q);
  }
  std::vector<bool> forced(c.gate_count(), false);
  const std::size_t budget = std::max<std::size_t>(1, c.gate_count() * std::max<std::size_t>(1, c.max_fanout()));

  auto frontier = update_frontier(c, a, seeds, forced, cap);
  std::vector<LineId> candidates;
  while (!frontier.tgs.empty()) {
    if (++result.iterations > budget) {
      throw Error("pattern search exceeded its iteration budget on '" + c.name() + "'");
    }
    const GateId target = frontier.tgs.front();
    const Gate& gate = c.gate(target);
    const Logic3 cv = to_logic(*controlling_value(gate.kind));

    candidates.clear();
    for (LineId in : gate.inputs) {
      if (a[in] == Logic3::X && !frontier.reached[in]) candidates.push_back(in);
    }
    // Try side inputs in directive order.
    std::vector<LineId> ordered;
    while (!candidates.empty()) {
      LineId pick = detail::pick_by_observability(candidates, cv, lo);
      ordered.push_back(pick);
      candidates.erase(std::find(candidates.begin(), candidates.end(), pick));
    }
    BlockingRecord rec{target, false, kNoLine};
    for (LineId side : ordered) {
      if (justify(c, a, {side, cv}, lo, cfg)) {
        rec.blocked = true;
        rec.side_input = side;
        break;
      }
    }
    if (!rec.blocked || cfg.literal_step_f) forced[target] = true;
    result.report.push_back(rec);
    frontier = update_frontier(c, a, seeds, forced, cap);
  }
  result.pattern = controlled_part(c, a);
  return result;
}

namespace detail {

// Leakage (nA) of 64 candidate patterns at once: mean over the all-0 and
// all-1 chain states.
inline void chain_averaged_leakage(const Circuit& c, const LeakageTable& t,
                                   std::vector<std::uint64_t>& w, std::array<double, 64>& out) {
  std::array<double, 64> part{};
  out.fill(0.0);
  for (int chain = 0; chain < 2; ++chain) {
    for (LineId q : c.pseudo_inputs()) w[q] = chain ? ~std::uint64_t{0} : 0;
    simulate_words(c, w);
    for (std::size_t lane = 0; lane < 64; ++lane) {
      double sum = 0.0;
      for (const Gate& g : c.gates()) {
        std::uint32_t idx = 0;
        for (LineId in : g.inputs) idx = (idx << 1) | ((w[in] >> lane) & 1U);
        sum += t.get(g.kind, g.inputs.size(), idx);
      }
      part[lane] = sum;
    }
    for (std::size_t lane = 0; lane < 64; ++lane) out[lane] += 0.5 * part[lane];
  }
}

}  // namespace detail

// Scan-mode leakage (nA) of a full controlled-input pattern, averaged over
// the all-0 and all-1 chain states.
inline double scan_mode_leakage(const Circuit& c, const Assignment& pattern, const LeakageTable& t,
                                ScanMode mode = ScanMode::Proposed) {
  double sum = 0.0;
  for (Logic3 chain : {Logic3::Zero, Logic3::One}) {
    sum += total_leakage(c, scan_steady_state(c, mode, pattern, chain), t);
  }
  return 0.5 * sum;
}

// Completes the X controlled inputs of `partial` with the lowest-leakage of
// cfg.fill_trials seeded random completions. When 2^(#X) <= fill_trials every
// completion is tried instead. Ties go to the earliest trial.
inline Assignment fill_dont_cares(const Circuit& c, const Assignment& partial, const LeakageTable& t,
                                  const SearchConfig& cfg) {
  if (cfg.fill_trials == 0) throw Error("fill_trials must be >= 1");
  t.require(c);
  std::vector<LineId> free;
  for (LineId in : c.controlled_inputs()) {
    if (partial[in] == Logic3::X) free.push_back(in);
  }
  if (free.empty()) return partial;

  const bool exhaustive = free.size() < 63 && (std::uint64_t{1} << free.size()) <= cfg.fill_trials;
  const std::uint64_t trials = exhaustive ? (std::uint64_t{1} << free.size()) : cfg.fill_trials;
  std::mt19937_64 rng(cfg.seed);

  std::vector<std::uint64_t> w(c.line_count(), 0);
  for (LineId in : c.controlled_inputs()) {
    if (partial[in] == Logic3::One) w[in] = ~std::uint64_t{0};
  }
  if (c.scan_enable() != kNoLine) w[c.scan_enable()] = ~std::uint64_t{0};

  std::array<double, 64> leak{};
  double best_leak = std::numeric_limits<double>::infinity();
  std::vector<bool> best_bits(free.size(), false);
  std::vector<std::uint64_t> lane_words(free.size());
  for (std::uint64_t base = 0; base < trials; base += 64) {
    const std::size_t lanes = static_cast<std::size_t>(std::min<std::uint64_t>(64, trials - base));
    std::fill(lane_words.begin(), lane_words.end(), 0);
    for (std::size_t lane = 0; lane < lanes; ++lane) {
      for (std::size_t j = 0; j < free.size(); ++j) {
        bool bit = exhaustive ? (((base + lane) >> j) & 1U) : (rng() & 1U);
        lane_words[j] |= std::uint64_t{bit} << lane;
      }
    }
    for (std::size_t j = 0; j < free.size(); ++j) w[free[j]] = lane_words[j];
    detail::chain_averaged_leakage(c, t, w, leak);
    for (std::size_t lane = 0; lane < lanes; ++lane) {
      if (leak[lane] < best_leak) {
        best_leak = leak[lane];
        for (std::size_t j = 0; j < free.size(); ++j) best_bits[j] = (lane_words[j] >> lane) & 1U;
      }
    }
  }
  Assignment out = partial;
  for (std::size_t j = 0; j < free.size(); ++j) out[free[j]] = to_logic(best_bits[j]);
  return out;
}

// Permutes the inputs of every Nand/Nor gate to the order with the smallest
// summed table leakage over `states`; the identity wins ties. Gates seeing X
// in any state are left alone. The logic function is unchanged.
inline Circuit reorder_inputs(const Circuit& c, std::span<const Assignment> states,
                              const LeakageTable& t) {
  Circuit out = c;
  std::vector<std::size_t> perm;
  std::vector<std::vector<bool>> bits(states.size());
  for (GateId g = 0; g < c.gate_count(); ++g) {
    const Gate& gate = c.gate(g);
    if (gate.kind != GateKind::Nand && gate.kind != GateKind::Nor) continue;
    const std::size_t n = gate.inputs.size();
    bool binary = true;
    for (std::size_t s = 0; s < states.size() && binary; ++s) {
      bits[s].assign(n, false);
      for (std::size_t i = 0; i < n; ++i) {
        Logic3 v = states[s][gate.inputs[i]];
        if (!is_binary(v)) {
          binary = false;
          break;
        }
        bits[s][i] = v == Logic3::One;
      }
    }
    if (!binary) continue;

    auto cost = [&](const std::vector<std::size_t>& p) {
      double sum = 0.0;
      for (const auto& b : bits) {
        std::uint32_t idx = 0;
        for (std::size_t i = 0; i < n; ++i) idx = (idx << 1) | static_cast<std::uint32_t>(b[p[i]]);
        sum += t.get(gate.kind, n, idx);
      }
      return sum;
    };
    perm.resize(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::vector<std::size_t> best = perm;
    double best_cost = cost(perm);
    while (std::next_permutation(perm.begin(), perm.end())) {
      double v = cost(perm);
      if (v < best_cost) {
        best_cost = v;
        best = perm;
      }
    }
    std::vector<LineId> rewired(n);
    for (std::size_t i = 0; i < n; ++i) rewired[i] = gate.inputs[best[i]];
    if (rewired != gate.inputs) out.set_gate_inputs(g, std::move(rewired));
  }
  out.finalize();
  return out;
}

inline Circuit reorder_inputs(const Circuit& c, const Assignment& state, const LeakageTable& t) {
  return reorder_inputs(c, std::span<const Assignment>(&state, 1), t);
}

// Pattern file: `name=0|1|X` per controlled input. Tie-off lines are named
// after the pseudo-input they isolate.
inline std::string format_pattern(const Circuit& c, const Assignment& pattern) {
  std::string out;
  for (LineId in : c.controlled_inputs()) {
    LineId named = c.role(in) == LineRole::MuxConstant ? c.multiplexed_source(in) : in;
    out += c.line_name(named) + "=" + to_char(pattern[in]) + "\n";
  }
  return out;
}

// Blocking report: CSV `gate_id,blocked,assigned_side_input`; gates are named
// by their output line.
inline std::string format_blocking_report(const Circuit& c, std::span<const BlockingRecord> report) {
  std::string out = "gate_id,blocked,assigned_side_input\n";
  for (const auto& r : report) {
    out += c.line_name(c.gate(r.gate).output) + "," + (r.blocked ? "1" : "0") + "," +
           (r.side_input == kNoLine ? std::string() : c.line_name(r.side_input)) + "\n";
  }
  return out;
}

}  // namespace scanpower
