#pragma once

#include <span>
#include <vector>

#include "eaclab/circuit.hpp"
#include "eaclab/scalar.hpp"

namespace eaclab {

template <class S>
struct EvalTrace {
  std::vector<S> values;   // one entry per gate, in sequence order
  std::vector<S> outputs;  // values at the declared output indices
};

namespace detail {

// Rational mode carries Exp/Ln of constant-valued operands through BigFloat
// at the configured precision; the result (a dyadic rational) is exact again.
inline Rational rational_exp(const Rational& v) {
  return to_rational(ScalarOps<BigFloat>::exp(to_bigfloat(v)));
}
inline Rational rational_ln(const Rational& v) {
  return to_rational(ScalarOps<BigFloat>::ln(to_bigfloat(v)));
}

}  // namespace detail

template <class S>
EvalTrace<S> evaluate(const ValidatedCircuit& vc, std::span<const S> inputs) {
  const Circuit& c = vc.circuit();
  if (static_cast<int>(inputs.size()) != c.input_arity)
    throw Error(ErrorCode::DimensionMismatch,
                "expected " + std::to_string(c.input_arity) + " inputs, got " +
                    std::to_string(inputs.size()));
  if constexpr (!ScalarOps<S>::has_exp_ln) {
    if (vc.exp_ln_on_variables())
      throw Error(ErrorCode::UnsupportedMode,
                  "rational mode requires exp/ln-free-on-variables circuits");
  }
  EvalTrace<S> trace;
  trace.values.reserve(c.gates.size());
  for (size_t i = 0; i < c.gates.size(); ++i) {
    const Gate& g = c.gates[i];
    const int gi = static_cast<int>(i);
    S v;
    switch (g.op) {
      case GateOp::Const: v = ScalarOps<S>::from_decimal(g.literal); break;
      case GateOp::Input: v = inputs[static_cast<size_t>(g.a)]; break;
      case GateOp::Add: v = trace.values[g.a] + trace.values[g.b]; break;
      case GateOp::Sub: v = trace.values[g.a] - trace.values[g.b]; break;
      case GateOp::Mul: v = trace.values[g.a] * trace.values[g.b]; break;
      case GateOp::Div: {
        const S& den = trace.values[g.b];
        if (den == S(0)) throw Error(ErrorCode::DivisionByZero, "zero denominator", gi);
        v = trace.values[g.a] / den;
        break;
      }
      case GateOp::Exp: {
        const S& arg = trace.values[g.a];
        if constexpr (ScalarOps<S>::has_exp_ln) {
          v = ScalarOps<S>::exp(arg);
        } else {
          v = detail::rational_exp(arg);
        }
        break;
      }
      case GateOp::Ln: {
        const S& arg = trace.values[g.a];
        if (arg <= S(0))
          throw Error(ErrorCode::LnNonPositive, "ln of non-positive value", gi);
        if constexpr (ScalarOps<S>::has_exp_ln) {
          v = ScalarOps<S>::ln(arg);
        } else {
          v = detail::rational_ln(arg);
        }
        break;
      }
    }
    if (!ScalarOps<S>::is_finite(v))
      throw Error(ErrorCode::Overflow,
                  std::string("non-finite value in mode ") + ScalarOps<S>::name(), gi);
    trace.values.push_back(std::move(v));
  }
  trace.outputs.reserve(c.outputs.size());
  for (int32_t out : c.outputs) trace.outputs.push_back(trace.values[static_cast<size_t>(out)]);
  return trace;
}

template <class S>
EvalTrace<S> evaluate(const ValidatedCircuit& vc, const std::vector<S>& inputs) {
  return evaluate<S>(vc, std::span<const S>(inputs));
}

}  // namespace eaclab
