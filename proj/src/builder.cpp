#include "eaclab/builder.hpp"

namespace eaclab {

CircuitBuilder::CircuitBuilder(int input_arity) {
  c_.input_arity = input_arity;
  input_pool_.assign(static_cast<size_t>(input_arity), -1);
}

int CircuitBuilder::push(Gate g, std::optional<Rational> value) {
  if (gate_op_is_arith(g.op)) ++arith_size_;
  c_.gates.push_back(std::move(g));
  cval_.push_back(std::move(value));
  return static_cast<int>(c_.gates.size()) - 1;
}

int CircuitBuilder::input(int index) {
  int& slot = input_pool_.at(static_cast<size_t>(index));
  if (slot < 0) slot = push(Gate::input(index));
  return slot;
}

int CircuitBuilder::constant(const Rational& v) {
  std::string lit = exact_decimal(v);
  auto it = const_pool_.find(lit);
  if (it != const_pool_.end()) return it->second;
  int g = push(Gate::constant(lit), v);
  const_pool_.emplace(std::move(lit), g);
  return g;
}

int CircuitBuilder::constant_decimal(const std::string& literal) {
  // Normalize through the exact rational value so equal constants pool.
  return constant(rational_from_decimal(literal));
}

int CircuitBuilder::add(int a, int b) {
  if (is_const(a) && is_const(b)) return constant(const_value(a) + const_value(b));
  if (is_const_value(a, 0)) return b;
  if (is_const_value(b, 0)) return a;
  return push(Gate::add(a, b));
}

int CircuitBuilder::sub(int a, int b) {
  if (is_const(a) && is_const(b)) return constant(const_value(a) - const_value(b));
  if (is_const_value(b, 0)) return a;
  return push(Gate::sub(a, b));
}

int CircuitBuilder::mul(int a, int b) {
  if (is_const(a) && is_const(b)) return constant(const_value(a) * const_value(b));
  if (is_const_value(a, 0) || is_const_value(b, 0)) return zero();
  if (is_const_value(a, 1)) return b;
  if (is_const_value(b, 1)) return a;
  return push(Gate::mul(a, b));
}

int CircuitBuilder::div(int a, int b) {
  if (is_const(b)) {
    if (const_value(b) == 0)
      throw Error(ErrorCode::DivConstantZero, "division by constant zero");
    if (is_const(a)) {
      Rational q = const_value(a) / const_value(b);
      if (has_finite_decimal(q)) return constant(q);
    }
    if (const_value(b) == 1) return a;
  }
  return push(Gate::div(a, b));
}

int CircuitBuilder::exp(int a) {
  if (is_const_value(a, 0)) return one();
  if (is_const(a))
    return constant(to_rational(ScalarOps<BigFloat>::exp(to_bigfloat(const_value(a)))));
  return push(Gate::exp(a));
}

int CircuitBuilder::ln(int a) {
  if (is_const(a)) {
    if (const_value(a) <= 0)
      throw Error(ErrorCode::LnConstantNonPositive, "ln of non-positive constant");
    if (const_value(a) == 1) return zero();
    return constant(to_rational(ScalarOps<BigFloat>::ln(to_bigfloat(const_value(a)))));
  }
  return push(Gate::ln(a));
}

}  // namespace eaclab
