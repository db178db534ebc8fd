#pragma once

#include <span>
#include <utility>

#include "eaclab/circuit.hpp"
#include "eaclab/eval.hpp"

namespace eaclab {

// Reverse-mode derivative circuit. Output 0 computes the source value, outputs
// 1..n the partial derivatives with respect to each input. The transform is
// purely structural; the emitted size satisfies
//   circuit_size(circuit) <= 6 * source_size + input_arity + 2.
struct GradientCircuit {
  Circuit circuit;
  int source_size = 0;
};

GradientCircuit gradient_circuit(const ValidatedCircuit& vc);

// Dual-number forward pass: returns (value, directional derivative along the
// `direction`-th basis vector). Independent oracle for gradient_circuit.
template <class S>
std::pair<S, S> forward_mode_eval(const ValidatedCircuit& vc,
                                  std::span<const S> inputs, int direction) {
  const Circuit& c = vc.circuit();
  if (static_cast<int>(inputs.size()) != c.input_arity)
    throw Error(ErrorCode::DimensionMismatch, "input arity mismatch");
  if (c.outputs.size() != 1)
    throw Error(ErrorCode::MultipleOutputs, "single-output circuit required");
  static_assert(ScalarOps<S>::has_exp_ln,
                "forward mode needs a scalar with exp/ln");
  std::vector<S> v(c.gates.size()), t(c.gates.size());
  for (size_t i = 0; i < c.gates.size(); ++i) {
    const Gate& g = c.gates[i];
    const int gi = static_cast<int>(i);
    switch (g.op) {
      case GateOp::Const:
        v[i] = ScalarOps<S>::from_decimal(g.literal);
        t[i] = S(0);
        break;
      case GateOp::Input:
        v[i] = inputs[static_cast<size_t>(g.a)];
        t[i] = S(g.a == direction ? 1 : 0);
        break;
      case GateOp::Add:
        v[i] = v[g.a] + v[g.b];
        t[i] = t[g.a] + t[g.b];
        break;
      case GateOp::Sub:
        v[i] = v[g.a] - v[g.b];
        t[i] = t[g.a] - t[g.b];
        break;
      case GateOp::Mul:
        v[i] = v[g.a] * v[g.b];
        t[i] = t[g.a] * v[g.b] + v[g.a] * t[g.b];
        break;
      case GateOp::Div: {
        if (v[g.b] == S(0))
          throw Error(ErrorCode::DivisionByZero, "zero denominator", gi);
        v[i] = v[g.a] / v[g.b];
        t[i] = (t[g.a] - v[i] * t[g.b]) / v[g.b];
        break;
      }
      case GateOp::Exp:
        v[i] = ScalarOps<S>::exp(v[g.a]);
        t[i] = t[g.a] * v[i];
        break;
      case GateOp::Ln:
        if (v[g.a] <= S(0))
          throw Error(ErrorCode::LnNonPositive, "ln of non-positive value", gi);
        v[i] = ScalarOps<S>::ln(v[g.a]);
        t[i] = t[g.a] / v[g.a];
        break;
    }
    if (!ScalarOps<S>::is_finite(v[i]) || !ScalarOps<S>::is_finite(t[i]))
      throw Error(ErrorCode::Overflow, "non-finite dual value", gi);
  }
  size_t out = static_cast<size_t>(c.outputs[0]);
  return {v[out], t[out]};
}

template <class S>
std::pair<S, S> forward_mode_eval(const ValidatedCircuit& vc,
                                  const std::vector<S>& inputs, int direction) {
  return forward_mode_eval<S>(vc, std::span<const S>(inputs), direction);
}

// h = 1e-5 * max(1, |x|): the usual truncation/round-off balance at Float64.
inline double fd_default_step(double x) {
  return 1e-5 * std::max(1.0, std::fabs(x));
}

// Central difference (F(x + h e_i) - F(x - h e_i)) / 2h on output 0.
template <class S>
S finite_difference(const ValidatedCircuit& vc, std::span<const S> inputs,
                    int index, const S& step) {
  if (vc.circuit().outputs.size() != 1)
    throw Error(ErrorCode::MultipleOutputs, "single-output circuit required");
  std::vector<S> x(inputs.begin(), inputs.end());
  x[static_cast<size_t>(index)] = inputs[static_cast<size_t>(index)] + step;
  S up = evaluate<S>(vc, std::span<const S>(x)).outputs[0];
  x[static_cast<size_t>(index)] = inputs[static_cast<size_t>(index)] - step;
  S down = evaluate<S>(vc, std::span<const S>(x)).outputs[0];
  return (up - down) / (S(2) * step);
}

template <class S>
S finite_difference(const ValidatedCircuit& vc, const std::vector<S>& inputs,
                    int index, const S& step) {
  return finite_difference<S>(vc, std::span<const S>(inputs), index, step);
}

}  // namespace eaclab
