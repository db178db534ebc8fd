#include "eaclab/circuit.hpp"

#include "eaclab/scalar.hpp"

namespace eaclab {

const char* gate_op_name(GateOp op) {
  switch (op) {
    case GateOp::Const: return "const";
    case GateOp::Input: return "input";
    case GateOp::Add: return "add";
    case GateOp::Sub: return "sub";
    case GateOp::Mul: return "mul";
    case GateOp::Div: return "div";
    case GateOp::Exp: return "exp";
    case GateOp::Ln: return "ln";
  }
  return "?";
}

bool gate_op_is_arith(GateOp op) {
  return op != GateOp::Const && op != GateOp::Input;
}

int gate_op_operands(GateOp op) {
  switch (op) {
    case GateOp::Const:
    case GateOp::Input: return 0;
    case GateOp::Exp:
    case GateOp::Ln: return 1;
    default: return 2;
  }
}

int circuit_size(const Circuit& c) {
  int s = 0;
  for (const Gate& g : c.gates)
    if (gate_op_is_arith(g.op)) ++s;
  return s;
}

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::ForwardReference: return "ForwardReference";
    case ErrorCode::BadInputIndex: return "BadInputIndex";
    case ErrorCode::BadOutputIndex: return "BadOutputIndex";
    case ErrorCode::SyntaxError: return "SyntaxError";
    case ErrorCode::DuplicateGateId: return "DuplicateGateId";
    case ErrorCode::DivisionByZero: return "DivisionByZero";
    case ErrorCode::LnNonPositive: return "LnNonPositive";
    case ErrorCode::Overflow: return "Overflow";
    case ErrorCode::MultipleOutputs: return "MultipleOutputs";
    case ErrorCode::LnConstantNonPositive: return "LnConstantNonPositive";
    case ErrorCode::DivConstantZero: return "DivConstantZero";
    case ErrorCode::QuadraticityCheckFailed: return "QuadraticityCheckFailed";
    case ErrorCode::HardmaxNotCompilable: return "HardmaxNotCompilable";
    case ErrorCode::GapHypothesisUnverifiable: return "GapHypothesisUnverifiable";
    case ErrorCode::SigmaZeroAtC: return "SigmaZeroAtC";
    case ErrorCode::IndivisibleHeads: return "IndivisibleHeads";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::BadExponent: return "BadExponent";
    case ErrorCode::NonPositiveDerivative: return "NonPositiveDerivative";
    case ErrorCode::NonInvertibleSigmaValue: return "NonInvertibleSigmaValue";
    case ErrorCode::NonFiniteInput: return "NonFiniteInput";
    case ErrorCode::UnsupportedMode: return "UnsupportedMode";
  }
  return "?";
}

namespace {
std::string compose_message(ErrorCode code, const std::string& message, int gate, int line) {
  std::string out = error_code_name(code);
  out += ": ";
  out += message;
  if (gate >= 0) out += " (gate g" + std::to_string(gate) + ")";
  if (line >= 0) out += " (line " + std::to_string(line) + ")";
  return out;
}
}  // namespace

Error::Error(ErrorCode code, const std::string& message, int gate, int line)
    : std::runtime_error(compose_message(code, message, gate, line)),
      code_(code),
      gate_(gate),
      line_(line) {}

ValidatedCircuit validate(Circuit c) {
  const int n = static_cast<int>(c.gates.size());
  std::vector<bool> is_const(static_cast<size_t>(n), false);
  bool exp_ln_on_vars = false;
  for (int i = 0; i < n; ++i) {
    const Gate& g = c.gates[static_cast<size_t>(i)];
    switch (g.op) {
      case GateOp::Const:
        if (!is_decimal_literal(g.literal))
          throw Error(ErrorCode::SyntaxError, "bad constant literal '" + g.literal + "'", i);
        is_const[static_cast<size_t>(i)] = true;
        break;
      case GateOp::Input:
        if (g.a < 0 || g.a >= c.input_arity)
          throw Error(ErrorCode::BadInputIndex,
                      "input index " + std::to_string(g.a) + " outside arity " +
                          std::to_string(c.input_arity),
                      i);
        break;
      default: {
        const int ops = gate_op_operands(g.op);
        const int32_t refs[2] = {g.a, g.b};
        bool all_const = true;
        for (int k = 0; k < ops; ++k) {
          if (refs[k] < 0 || refs[k] >= i)
            throw Error(ErrorCode::ForwardReference,
                        "operand g" + std::to_string(refs[k]) +
                            " is not an earlier gate",
                        i);
          all_const = all_const && is_const[static_cast<size_t>(refs[k])];
        }
        is_const[static_cast<size_t>(i)] = all_const;
        if ((g.op == GateOp::Exp || g.op == GateOp::Ln) && !all_const)
          exp_ln_on_vars = true;
        break;
      }
    }
  }
  for (int32_t out : c.outputs)
    if (out < 0 || out >= n)
      throw Error(ErrorCode::BadOutputIndex,
                  "output g" + std::to_string(out) + " of " + std::to_string(n) +
                      " gates");
  ValidatedCircuit vc;
  vc.size_ = circuit_size(c);
  vc.c_ = std::move(c);
  vc.const_gate_ = std::move(is_const);
  vc.exp_ln_on_vars_ = exp_ln_on_vars;
  return vc;
}

}  // namespace eaclab
