#include "eaclab/fold.hpp"

#include <optional>
#include <vector>

#include "eaclab/scalar.hpp"

namespace eaclab {

Circuit constant_fold(const ValidatedCircuit& vc) {
  Circuit c = vc.circuit();
  std::vector<std::optional<Rational>> val(c.gates.size());

  auto emit = [&](size_t i, const Rational& v) {
    val[i] = v;
    c.gates[i] = Gate::constant(exact_decimal(v));
  };

  for (size_t i = 0; i < c.gates.size(); ++i) {
    const Gate g = c.gates[i];
    switch (g.op) {
      case GateOp::Const:
        val[i] = rational_from_decimal(g.literal);
        break;
      case GateOp::Input:
        break;
      case GateOp::Add:
      case GateOp::Sub:
      case GateOp::Mul: {
        if (!val[g.a] || !val[g.b]) break;
        const Rational &a = *val[g.a], &b = *val[g.b];
        emit(i, g.op == GateOp::Add ? a + b : g.op == GateOp::Sub ? a - b : a * b);
        break;
      }
      case GateOp::Div: {
        if (!val[g.a] || !val[g.b]) break;
        const Rational &a = *val[g.a], &b = *val[g.b];
        if (b == 0)
          throw Error(ErrorCode::DivisionByZero, "constant zero denominator",
                      static_cast<int>(i));
        Rational q = a / b;
        if (has_finite_decimal(q)) {
          emit(i, q);
        } else {
          emit(i, to_rational(to_bigfloat(a) / to_bigfloat(b)));
        }
        break;
      }
      case GateOp::Exp: {
        if (!val[g.a]) break;
        emit(i, to_rational(ScalarOps<BigFloat>::exp(to_bigfloat(*val[g.a]))));
        break;
      }
      case GateOp::Ln: {
        if (!val[g.a]) break;
        if (*val[g.a] <= 0)
          throw Error(ErrorCode::LnNonPositive, "ln of non-positive constant",
                      static_cast<int>(i));
        emit(i, to_rational(ScalarOps<BigFloat>::ln(to_bigfloat(*val[g.a]))));
        break;
      }
    }
  }
  return c;
}

}  // namespace eaclab
