#pragma once

// Leakage observability of every line: the mean total leakage over the
// input population restricted to line = 1, minus the same mean for line = 0.
//
// Population. Before the mux pass, every primary and pseudo-input is
// enumerated. After it, only controlled inputs are enumerated and shift-enable
// is 1; the scan chain, which the pattern cannot drive, is crossed with the
// two chain states all-0 and all-1. A line that never takes one of the two
// values in the population has observability 0 and is flagged stuck.

#include <algorithm>
#include <array>
#include <cstdint>
#include <string>
#include <random>
#include <span>
#include <vector>

#include "scanpower/leakage.hpp"
#include "scanpower/netlist.hpp"
#include "scanpower/simulate.hpp"

namespace scanpower {

struct ObservabilityMode {
  enum class Kind { Exhaustive, Sampled };
  Kind kind = Kind::Exhaustive;
  std::size_t samples = 4096;  // per (line, value) when sampled
  std::uint64_t seed = 1;

  static ObservabilityMode exhaustive() { return {}; }
  static ObservabilityMode sampled(std::size_t n, std::uint64_t seed) {
    return {Kind::Sampled, n, seed};
  }
};

inline constexpr std::size_t kMaxExhaustiveInputs = 20;

struct ObservabilityPopulation {
  std::vector<LineId> inputs;  // enumerated independently
  bool chain_states = false;   // crossed with all-0 / all-1 chain
};

inline ObservabilityPopulation observability_population(const Circuit& c) {
  ObservabilityPopulation pop;
  if (c.mux_pass_applied()) {
    pop.inputs = c.controlled_inputs();
    pop.chain_states = !c.pseudo_inputs().empty();
  } else {
    pop.inputs.assign(c.primary_inputs().begin(), c.primary_inputs().end());
    pop.inputs.insert(pop.inputs.end(), c.pseudo_inputs().begin(), c.pseudo_inputs().end());
  }
  return pop;
}

struct LeakageObservability {
  std::vector<double> value;  // nA per line
  std::vector<bool> stuck;

  double operator[](LineId line) const { return value[line]; }
  std::size_t size() const { return value.size(); }
};

namespace detail {

class ObservabilityAccumulator {
 public:
  ObservabilityAccumulator(const Circuit& c, const LeakageTable& t)
      : c_(c), sum_(2 * c.line_count(), 0.0), count_(2 * c.line_count(), 0) {
    t.require(c);
    for (const Gate& g : c.gates()) rows_.push_back(t.row(g.kind, g.inputs.size()));
  }

  // Per-lane total leakage (nA) of a simulated batch.
  void lane_leakage(const std::vector<std::uint64_t>& w, std::array<double, 64>& leak) const {
    leak.fill(0.0);
    for (std::size_t lane = 0; lane < 64; ++lane) {
      double sum = 0.0;
      for (GateId g = 0; g < c_.gate_count(); ++g) {
        std::uint32_t idx = 0;
        for (LineId in : c_.gate(g).inputs) idx = (idx << 1) | ((w[in] >> lane) & 1U);
        sum += rows_[g][idx];
      }
      leak[lane] = sum;
    }
  }

  // Adds lanes [0, lanes) to every line; `cap` limits samples per bucket.
  void add(const std::vector<std::uint64_t>& w, const std::array<double, 64>& leak,
           std::size_t lanes, std::size_t cap) {
    for (LineId line = 0; line < c_.line_count(); ++line) {
      const std::uint64_t word = w[line];
      for (std::size_t lane = 0; lane < lanes; ++lane) {
        std::size_t bucket = 2 * line + ((word >> lane) & 1U);
        if (count_[bucket] >= cap) continue;
        sum_[bucket] += leak[lane];
        ++count_[bucket];
      }
    }
  }

  bool saturated(std::size_t cap) const {
    for (std::size_t n : count_) {
      if (n < cap) return false;
    }
    return true;
  }

  LeakageObservability result() const {
    LeakageObservability lo;
    lo.value.assign(c_.line_count(), 0.0);
    lo.stuck.assign(c_.line_count(), false);
    for (LineId line = 0; line < c_.line_count(); ++line) {
      std::size_t n0 = count_[2 * line], n1 = count_[2 * line + 1];
      if (n0 == 0 || n1 == 0) {
        lo.stuck[line] = true;
        continue;
      }
      lo.value[line] = sum_[2 * line + 1] / static_cast<double>(n1) -
                       sum_[2 * line] / static_cast<double>(n0);
    }
    return lo;
  }

 private:
  const Circuit& c_;
  std::vector<std::span<const double>> rows_;
  std::vector<double> sum_;
  std::vector<std::size_t> count_;
};

}  // namespace detail

inline LeakageObservability leakage_observability(const Circuit& c, const LeakageTable& t,
                                                  ObservabilityMode mode = {}) {
  if (!c.is_mapped()) throw NetlistError("leakage observability expects a mapped circuit");
  const auto pop = observability_population(c);
  const std::size_t m = pop.inputs.size();
  detail::ObservabilityAccumulator acc(c, t);
  std::vector<std::uint64_t> w(c.line_count(), 0);
  std::array<double, 64> leak{};
  const std::uint64_t ones = ~std::uint64_t{0};

  auto load_common = [&]() {
    if (c.scan_enable() != kNoLine) w[c.scan_enable()] = ones;
  };

  if (mode.kind == ObservabilityMode::Kind::Exhaustive) {
    if (m > kMaxExhaustiveInputs) {
      throw Error("exhaustive observability refused: " + std::to_string(m) +
                  " controlled inputs exceed " + std::to_string(kMaxExhaustiveInputs));
    }
    const std::uint64_t members = (std::uint64_t{1} << m) << (pop.chain_states ? 1 : 0);
    for (std::uint64_t base = 0; base < members; base += 64) {
      const std::size_t lanes = static_cast<std::size_t>(std::min<std::uint64_t>(64, members - base));
      for (std::size_t j = 0; j < m; ++j) {
        std::uint64_t word = 0;
        for (std::size_t lane = 0; lane < lanes; ++lane) word |= (((base + lane) >> j) & 1U) << lane;
        w[pop.inputs[j]] = word;
      }
      if (pop.chain_states) {
        std::uint64_t word = 0;
        for (std::size_t lane = 0; lane < lanes; ++lane) word |= (((base + lane) >> m) & 1U) << lane;
        for (LineId q : c.pseudo_inputs()) w[q] = word;
      }
      load_common();
      detail::simulate_words(c, w);
      acc.lane_leakage(w, leak);
      acc.add(w, leak, lanes, static_cast<std::size_t>(-1));
    }
    return acc.result();
  }

  // Sampled: each (line, value) bucket takes the first `samples` members of
  // one seeded stream that agree with it; the rest are skipped.
  const std::size_t n = mode.samples;
  if (n == 0) throw Error("sampled observability needs at least one sample");
  std::mt19937_64 rng(mode.seed);
  const std::size_t max_batches = 64 * ((n + 63) / 64);
  for (std::size_t batch = 0; batch < max_batches && !acc.saturated(n); ++batch) {
    for (LineId in : pop.inputs) w[in] = rng();
    if (pop.chain_states) {
      std::uint64_t word = rng();
      for (LineId q : c.pseudo_inputs()) w[q] = word;
    }
    load_common();
    detail::simulate_words(c, w);
    acc.lane_leakage(w, leak);
    acc.add(w, leak, 64, n);
  }
  return acc.result();
}

}  // namespace scanpower
