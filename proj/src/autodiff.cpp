#include "eaclab/autodiff.hpp"

namespace eaclab {

namespace {

constexpr int kZero = -1;  // adjoint not yet touched; reads as literal 0

struct Emitter {
  Circuit out;
  int const0 = -1;
  int const1 = -1;

  int push(Gate g) {
    out.gates.push_back(std::move(g));
    return static_cast<int>(out.gates.size()) - 1;
  }
  int zero() {
    if (const0 < 0) const0 = push(Gate::constant("0"));
    return const0;
  }
  int one() {
    if (const1 < 0) const1 = push(Gate::constant("1"));
    return const1;
  }
};

}  // namespace

GradientCircuit gradient_circuit(const ValidatedCircuit& vc) {
  const Circuit& src = vc.circuit();
  if (src.outputs.size() != 1)
    throw Error(ErrorCode::MultipleOutputs,
                "gradient transform requires exactly one output, got " +
                    std::to_string(src.outputs.size()));

  Emitter em;
  em.out.input_arity = src.input_arity;
  // Forward copy: gate i of the source is gate i of the result.
  em.out.gates = src.gates;

  const int n_gates = static_cast<int>(src.gates.size());
  std::vector<int> adj(static_cast<size_t>(n_gates), kZero);
  adj[static_cast<size_t>(src.outputs[0])] = em.one();

  // Accumulate `delta` (negated if `negative`) into the adjoint slot of gate
  // `target`. Contributions arrive in gate-sequence order and are
  // left-associated, which keeps the transform deterministic.
  auto accumulate = [&](int target, int delta, bool negative) {
    int& slot = adj[static_cast<size_t>(target)];
    if (slot == kZero) {
      slot = negative ? em.push(Gate::sub(em.zero(), delta)) : delta;
    } else {
      slot = negative ? em.push(Gate::sub(slot, delta))
                      : em.push(Gate::add(slot, delta));
    }
  };

  // Reverse pass in anti-topological order.
  for (int i = n_gates - 1; i >= 0; --i) {
    const int a = adj[static_cast<size_t>(i)];
    if (a == kZero) continue;  // gate does not reach the output
    const Gate& g = src.gates[static_cast<size_t>(i)];
    switch (g.op) {
      case GateOp::Const:
      case GateOp::Input:
        break;
      case GateOp::Add:
        accumulate(g.a, a, false);
        accumulate(g.b, a, false);
        break;
      case GateOp::Sub:
        accumulate(g.a, a, false);
        accumulate(g.b, a, true);
        break;
      case GateOp::Mul:
        accumulate(g.a, em.push(Gate::mul(a, g.b)), false);
        accumulate(g.b, em.push(Gate::mul(a, g.a)), false);
        break;
      case GateOp::Div: {
        // d(u/v)/du = 1/v, d(u/v)/dv = -u/v^2 = -(u/v)/v; gate i is u/v.
        int over_v = em.push(Gate::div(a, g.b));
        accumulate(g.a, over_v, false);
        accumulate(g.b, em.push(Gate::mul(over_v, i)), true);
        break;
      }
      case GateOp::Exp:
        // Reuses the forward Exp gate: d exp(u)/du = exp(u) = gate i.
        accumulate(g.a, em.push(Gate::mul(a, i)), false);
        break;
      case GateOp::Ln:
        accumulate(g.a, em.push(Gate::div(a, g.a)), false);
        break;
    }
  }

  // Outputs: source value, then one derivative per input index. Inputs that
  // never influence the output get a literal constant-zero derivative.
  em.out.outputs.push_back(src.outputs[0]);
  std::vector<int> per_input(static_cast<size_t>(src.input_arity), kZero);
  for (int i = 0; i < n_gates; ++i) {
    const Gate& g = src.gates[static_cast<size_t>(i)];
    if (g.op != GateOp::Input || adj[static_cast<size_t>(i)] == kZero) continue;
    int& slot = per_input[static_cast<size_t>(g.a)];
    slot = (slot == kZero) ? adj[static_cast<size_t>(i)]
                           : em.push(Gate::add(slot, adj[static_cast<size_t>(i)]));
  }
  for (int idx = 0; idx < src.input_arity; ++idx) {
    int slot = per_input[static_cast<size_t>(idx)];
    em.out.outputs.push_back(slot == kZero ? em.zero() : slot);
  }

  GradientCircuit result;
  result.source_size = vc.size();
  result.circuit = std::move(em.out);
  return result;
}

}  // namespace eaclab
