#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "eaclab/circuit.hpp"
#include "eaclab/ov.hpp"
#include "eaclab/scalar.hpp"

namespace testutil {

using eaclab::BigFloat;
using eaclab::Circuit;
using eaclab::Gate;
using eaclab::GateOp;
using eaclab::Rational;

// Deterministic across platforms: splitmix64 stream, no std distributions.
struct Rng {
  uint64_t state;
  explicit Rng(uint64_t seed) : state(seed) {}
  uint64_t next() {
    state += 0x9e3779b97f4a7c15ull;
    uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }
  double unit() { return static_cast<double>(next() >> 11) * 0x1p-53; }
  double sym() { return 2.0 * unit() - 1.0; }
  int below(int n) { return static_cast<int>(next() % static_cast<uint64_t>(n)); }
  bool chance(double p) { return unit() < p; }
};

template <class S>
S rel_err(const S& got, const S& want) {
  S diff = got - want;
  if (diff < S(0)) diff = S(0) - diff;
  S mag = want < S(0) ? S(0) - want : want;
  if (mag < S(1)) mag = S(1);
  return diff / mag;
}

// Random eACs whose every gate stays well defined and moderately sized on all
// of [-1, 1]^n: ln sees x^2 + 1, div denominators are x^2 + 1, exp arguments
// are squashed through x / (x^2 + 1).
struct CircuitGen {
  Rng rng;
  int inputs;
  bool allow_exp_ln;

  CircuitGen(uint64_t seed, int n, bool exp_ln) : rng(seed), inputs(n), allow_exp_ln(exp_ln) {}

  Circuit generate(int target_ops) {
    Circuit c;
    c.input_arity = inputs;
    std::vector<double> bound;
    auto push = [&](Gate g, double b) {
      c.gates.push_back(std::move(g));
      bound.push_back(b);
      return static_cast<int>(c.gates.size()) - 1;
    };
    for (int i = 0; i < inputs; ++i) push(Gate::input(i), 1.0);
    int one = push(Gate::constant("1"), 1.0);
    push(Gate::constant("0.5"), 0.5);
    push(Gate::constant("-2"), 2.0);

    int ops = 0;
    auto pick = [&]() { return rng.below(static_cast<int>(c.gates.size())); };
    constexpr double kCap = 1e4;
    while (ops < target_ops) {
      int a = pick(), b = pick();
      switch (rng.below(allow_exp_ln ? 8 : 4)) {
        case 0:
          if (bound[a] + bound[b] > kCap) break;
          push(Gate::add(a, b), bound[a] + bound[b]);
          ++ops;
          break;
        case 1:
          if (bound[a] + bound[b] > kCap) break;
          push(Gate::sub(a, b), bound[a] + bound[b]);
          ++ops;
          break;
        case 2:
        case 3:
          if (bound[a] * bound[b] > kCap) break;
          push(Gate::mul(a, b), bound[a] * bound[b]);
          ++ops;
          break;
        case 4: {  // a / (b^2 + 1)
          if (bound[b] * bound[b] > kCap) break;
          int sq = push(Gate::mul(b, b), bound[b] * bound[b]);
          int den = push(Gate::add(sq, one), bound[b] * bound[b] + 1);
          push(Gate::div(a, den), bound[a]);
          ops += 3;
          break;
        }
        case 5:
        case 6: {  // exp(a / (a^2 + 1))
          if (bound[a] * bound[a] > kCap) break;
          int sq = push(Gate::mul(a, a), bound[a] * bound[a]);
          int den = push(Gate::add(sq, one), bound[a] * bound[a] + 1);
          int arg = push(Gate::div(a, den), 0.5);
          push(Gate::exp(arg), std::exp(0.5));
          ops += 4;
          break;
        }
        case 7: {  // ln(a^2 + 1 + 1)
          if (bound[a] * bound[a] > kCap) break;
          int sq = push(Gate::mul(a, a), bound[a] * bound[a]);
          int arg = push(Gate::add(sq, one), bound[a] * bound[a] + 1);
          int arg2 = push(Gate::add(arg, one), bound[a] * bound[a] + 2);
          push(Gate::ln(arg2), std::log(kCap + 2));
          ops += 4;
          break;
        }
      }
    }
    c.outputs = {static_cast<int32_t>(c.gates.size()) - 1};
    return c;
  }
};

// Second straight-line interpreter, independent of eaclab::evaluate: memoized
// recursion from the outputs instead of a forward sweep.
inline double interpret_gate(const Circuit& c, const std::vector<double>& x, int g,
                             std::vector<double>& memo, std::vector<char>& have) {
  if (have[static_cast<size_t>(g)]) return memo[static_cast<size_t>(g)];
  const Gate& gate = c.gates[static_cast<size_t>(g)];
  double v = 0;
  switch (gate.op) {
    case GateOp::Const: v = eaclab::double_from_decimal(gate.literal); break;
    case GateOp::Input: v = x[static_cast<size_t>(gate.a)]; break;
    case GateOp::Add:
      v = interpret_gate(c, x, gate.a, memo, have) + interpret_gate(c, x, gate.b, memo, have);
      break;
    case GateOp::Sub:
      v = interpret_gate(c, x, gate.a, memo, have) - interpret_gate(c, x, gate.b, memo, have);
      break;
    case GateOp::Mul:
      v = interpret_gate(c, x, gate.a, memo, have) * interpret_gate(c, x, gate.b, memo, have);
      break;
    case GateOp::Div:
      v = interpret_gate(c, x, gate.a, memo, have) / interpret_gate(c, x, gate.b, memo, have);
      break;
    case GateOp::Exp: v = std::exp(interpret_gate(c, x, gate.a, memo, have)); break;
    case GateOp::Ln: v = std::log(interpret_gate(c, x, gate.a, memo, have)); break;
  }
  memo[static_cast<size_t>(g)] = v;
  have[static_cast<size_t>(g)] = 1;
  return v;
}

inline std::vector<double> interpret(const Circuit& c, const std::vector<double>& x) {
  std::vector<double> memo(c.gates.size());
  std::vector<char> have(c.gates.size(), 0);
  std::vector<double> out;
  for (int32_t o : c.outputs) out.push_back(interpret_gate(c, x, o, memo, have));
  return out;
}

inline eaclab::OVInstance random_ov(Rng& rng, int k, int d,
                                    const std::vector<int>& sizes, double density) {
  eaclab::OVInstance ins = eaclab::OVInstance::empty(k, d);
  for (int s = 0; s < k; ++s)
    for (int v = 0; v < sizes[static_cast<size_t>(s)]; ++v) {
      std::vector<int> coords(static_cast<size_t>(d));
      for (int j = 0; j < d; ++j) coords[static_cast<size_t>(j)] = rng.chance(density) ? 1 : 0;
      ins.push(s, coords);
    }
  return ins;
}

// Independent k-OV enumerator: recursion over raw coordinates, no bit tricks.
inline bool ov_rec(const eaclab::OVInstance& ins, int set, std::vector<int>& picked) {
  if (set == ins.k) {
    for (int j = 0; j < ins.d; ++j) {
      bool zero = false;
      for (int s = 0; s < ins.k; ++s)
        if (ins.coord(s, picked[static_cast<size_t>(s)], j) == 0) zero = true;
      if (!zero) return false;
    }
    return true;
  }
  for (size_t v = 0; v < ins.sets[static_cast<size_t>(set)].size(); ++v) {
    picked[static_cast<size_t>(set)] = static_cast<int>(v);
    if (ov_rec(ins, set + 1, picked)) return true;
  }
  return false;
}

inline bool ov_oracle(const eaclab::OVInstance& ins) {
  for (const auto& set : ins.sets)
    if (set.empty()) return false;
  std::vector<int> picked(static_cast<size_t>(ins.k), 0);
  return ov_rec(ins, 0, picked);
}

}  // namespace testutil
