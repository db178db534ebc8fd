#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace eaclab {

enum class GateOp : uint8_t { Const, Input, Add, Sub, Mul, Div, Exp, Ln };

const char* gate_op_name(GateOp op);
bool gate_op_is_arith(GateOp op);   // counts toward circuit size
int gate_op_operands(GateOp op);    // 0 for Const/Input, 1 for Exp/Ln, 2 otherwise

// One straight-line-program step. Operand indices refer to earlier gates.
// Input gates carry the input index in `a`; Const gates carry a decimal
// literal that is parsed per numeric mode so a circuit file means the same
// numbers in every mode.
struct Gate {
  GateOp op = GateOp::Const;
  int32_t a = -1;
  int32_t b = -1;
  std::string literal;

  bool operator==(const Gate&) const = default;

  static Gate constant(std::string lit) { return {GateOp::Const, -1, -1, std::move(lit)}; }
  static Gate input(int32_t i) { return {GateOp::Input, i, -1, {}}; }
  static Gate add(int32_t a, int32_t b) { return {GateOp::Add, a, b, {}}; }
  static Gate sub(int32_t a, int32_t b) { return {GateOp::Sub, a, b, {}}; }
  static Gate mul(int32_t a, int32_t b) { return {GateOp::Mul, a, b, {}}; }
  static Gate div(int32_t a, int32_t b) { return {GateOp::Div, a, b, {}}; }
  static Gate exp(int32_t a) { return {GateOp::Exp, a, -1, {}}; }
  static Gate ln(int32_t a) { return {GateOp::Ln, a, -1, {}}; }
};

struct Circuit {
  int input_arity = 0;
  std::vector<Gate> gates;
  std::vector<int32_t> outputs;

  bool operator==(const Circuit&) const = default;
};

// Number of arithmetic operation gates; Const and Input gates are free.
int circuit_size(const Circuit& c);

enum class ErrorCode {
  ForwardReference,
  BadInputIndex,
  BadOutputIndex,
  SyntaxError,
  DuplicateGateId,
  DivisionByZero,
  LnNonPositive,
  Overflow,
  MultipleOutputs,
  LnConstantNonPositive,
  DivConstantZero,
  QuadraticityCheckFailed,
  HardmaxNotCompilable,
  GapHypothesisUnverifiable,
  SigmaZeroAtC,
  IndivisibleHeads,
  DimensionMismatch,
  BadExponent,
  NonPositiveDerivative,
  NonInvertibleSigmaValue,
  NonFiniteInput,
  UnsupportedMode,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, int gate = -1, int line = -1);
  ErrorCode code() const { return code_; }
  int gate() const { return gate_; }
  int line() const { return line_; }

 private:
  ErrorCode code_;
  int gate_;
  int line_;
};

// A circuit whose topology, operand ranges, output indices and constant
// literals have all been checked. Carries the per-gate constant-dependence
// analysis used by the rational mode and the elimination pass.
class ValidatedCircuit {
 public:
  const Circuit& circuit() const { return c_; }
  int input_arity() const { return c_.input_arity; }
  int gate_count() const { return static_cast<int>(c_.gates.size()); }
  int size() const { return size_; }

  // True iff the gate's value does not depend on any input.
  bool gate_is_constant(int g) const { return const_gate_[static_cast<size_t>(g)]; }
  // True iff some Exp/Ln gate has a non-constant operand; such circuits are
  // rejected in Rational mode.
  bool exp_ln_on_variables() const { return exp_ln_on_vars_; }

 private:
  friend ValidatedCircuit validate(Circuit c);
  Circuit c_;
  std::vector<bool> const_gate_;
  bool exp_ln_on_vars_ = false;
  int size_ = 0;
};

// Certifies a circuit or throws Error at the first violation.
ValidatedCircuit validate(Circuit c);

}  // namespace eaclab
