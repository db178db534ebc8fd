#include "eaclab/elim2.hpp"

#include <algorithm>

#include "eaclab/builder.hpp"
#include "eaclab/eval.hpp"

namespace eaclab {

namespace {

constexpr int kNone = -1;  // series slot holding a literal zero

struct Series {
  Rational c0;
  int c1 = kNone;
  int c2 = kNone;
};

// Deterministic generator for check points (dyadic values in [-1, 1]).
struct Rng {
  uint64_t s;
  uint64_t next() {
    s += 0x9e3779b97f4a7c15ull;
    uint64_t z = s;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }
  double unit() { return static_cast<double>(next() >> 11) * 0x1p-53; }
  double sym() { return 2.0 * unit() - 1.0; }
};

class Eliminator {
 public:
  explicit Eliminator(const ValidatedCircuit& vc)
      : vc_(vc), b_(vc.input_arity()) {}

  EliminationResult run() {
    const Circuit& src = vc_.circuit();
    series_.reserve(src.gates.size());
    for (size_t i = 0; i < src.gates.size(); ++i)
      series_.push_back(compile_gate(static_cast<int>(i)));

    EliminationResult result;
    result.source_size = vc_.size();
    std::vector<int32_t> outs;
    for (int32_t o : src.outputs) {
      const Series& s = series_[static_cast<size_t>(o)];
      OutputParts p;
      p.c0 = s.c0;
      p.c1 = static_cast<int32_t>(materialize(s.c1));
      p.c2 = static_cast<int32_t>(materialize(s.c2));
      outs.push_back(p.c2);
      result.parts.push_back(std::move(p));
    }
    b_.set_outputs(std::move(outs));
    result.ac = b_.take();
    return result;
  }

 private:
  int materialize(int slot) { return slot == kNone ? b_.zero() : slot; }

  int scale(int slot, const Rational& k) {
    if (slot == kNone || k == 0) return kNone;
    if (k == 1) return slot;
    return b_.mul(slot, constant_for(k));
  }
  int plus(int x, int y) {
    if (x == kNone) return y;
    if (y == kNone) return x;
    return b_.add(x, y);
  }
  int minus(int x, int y) {
    if (y == kNone) return x;
    if (x == kNone) return b_.neg(y);
    return b_.sub(x, y);
  }
  int times(int x, int y) {
    if (x == kNone || y == kNone) return kNone;
    return b_.mul(x, y);
  }
  int constant_for(const Rational& k) {
    // Constants without a finite decimal form round through BigFloat.
    if (has_finite_decimal(k)) return b_.constant(k);
    return b_.constant(to_rational(to_bigfloat(k)));
  }

  static Rational fold_exp(const Rational& v) {
    if (v == 0) return Rational(1);
    return to_rational(ScalarOps<BigFloat>::exp(to_bigfloat(v)));
  }
  static Rational fold_ln(const Rational& v) {
    if (v == 1) return Rational(0);
    return to_rational(ScalarOps<BigFloat>::ln(to_bigfloat(v)));
  }

  Series compile_gate(int gi) {
    const Gate& g = vc_.circuit().gates[static_cast<size_t>(gi)];
    switch (g.op) {
      case GateOp::Const:
        return {rational_from_decimal(g.literal), kNone, kNone};
      case GateOp::Input:
        return {Rational(0), b_.input(g.a), kNone};
      case GateOp::Add:
      case GateOp::Sub: {
        const Series& u = series_[static_cast<size_t>(g.a)];
        const Series& v = series_[static_cast<size_t>(g.b)];
        if (g.op == GateOp::Add)
          return {u.c0 + v.c0, plus(u.c1, v.c1), plus(u.c2, v.c2)};
        return {u.c0 - v.c0, minus(u.c1, v.c1), minus(u.c2, v.c2)};
      }
      case GateOp::Mul: {
        const Series& u = series_[static_cast<size_t>(g.a)];
        const Series& v = series_[static_cast<size_t>(g.b)];
        Series w;
        w.c0 = u.c0 * v.c0;
        w.c1 = plus(scale(v.c1, u.c0), scale(u.c1, v.c0));
        w.c2 = plus(plus(scale(u.c2, v.c0), times(u.c1, v.c1)), scale(v.c2, u.c0));
        return w;
      }
      case GateOp::Div: {
        const Series& u = series_[static_cast<size_t>(g.a)];
        const Series& v = series_[static_cast<size_t>(g.b)];
        if (v.c0 == 0)
          throw Error(ErrorCode::DivConstantZero,
                      "denominator has zero constant part", gi);
        Rational inv = Rational(1) / v.c0;
        Rational u0p = u.c0 * inv;
        int u1p = scale(u.c1, inv), u2p = scale(u.c2, inv);
        int v1p = scale(v.c1, inv), v2p = scale(v.c2, inv);
        Series w;
        w.c0 = u0p;
        w.c1 = minus(u1p, scale(v1p, u0p));
        w.c2 = plus(minus(u2p, times(u1p, v1p)),
                    scale(minus(times(v1p, v1p), v2p), u0p));
        return w;
      }
      case GateOp::Exp: {
        const Series& u = series_[static_cast<size_t>(g.a)];
        Rational e0 = fold_exp(u.c0);
        Series w;
        w.c0 = e0;
        w.c1 = scale(u.c1, e0);
        w.c2 = scale(plus(u.c2, scale(times(u.c1, u.c1), Rational(1) / 2)), e0);
        return w;
      }
      case GateOp::Ln: {
        const Series& u = series_[static_cast<size_t>(g.a)];
        if (u.c0 <= 0)
          throw Error(ErrorCode::LnConstantNonPositive,
                      "ln operand has non-positive constant part", gi);
        Rational inv = Rational(1) / u.c0;
        int t = scale(u.c1, inv);
        Series w;
        w.c0 = fold_ln(u.c0);
        w.c1 = t;
        w.c2 = minus(scale(u.c2, inv), scale(times(t, t), Rational(1) / 2));
        return w;
      }
    }
    throw Error(ErrorCode::SyntaxError, "unreachable gate kind", gi);
  }

  const ValidatedCircuit& vc_;
  CircuitBuilder b_;
  std::vector<Series> series_;
};

int append_const(Circuit& c, const Rational& v) {
  Rational r = has_finite_decimal(v) ? v : to_rational(to_bigfloat(v));
  c.gates.push_back(Gate::constant(exact_decimal(r)));
  return static_cast<int>(c.gates.size()) - 1;
}

}  // namespace

Circuit EliminationResult::full_value_circuit() const {
  Circuit c = ac;
  c.outputs.clear();
  for (const OutputParts& p : parts) {
    int32_t g = p.c1;
    if (p.c0 != 0) {
      int cg = append_const(c, p.c0);
      c.gates.push_back(Gate::add(cg, p.c1));
      g = static_cast<int32_t>(c.gates.size()) - 1;
    }
    c.gates.push_back(Gate::add(g, p.c2));
    c.outputs.push_back(static_cast<int32_t>(c.gates.size()) - 1);
  }
  return c;
}

EliminationResult eliminate(const ValidatedCircuit& vc, int check_points,
                            uint64_t check_seed) {
  EliminationResult result = Eliminator(vc).run();
  if (check_points > 0) {
    ValidatedCircuit emitted = validate(result.full_value_circuit());
    Rng rng{check_seed};
    const int n = vc.input_arity();
    const BigFloat tol =
        boost::multiprecision::pow(BigFloat(2), -static_cast<int>(bigfloat_bits()) / 2);
    for (int p = 0; p < check_points; ++p) {
      std::vector<BigFloat> x(static_cast<size_t>(n));
      for (auto& xi : x) xi = to_bigfloat(rng.sym());
      auto want = evaluate<BigFloat>(vc, x).outputs;
      auto got = evaluate<BigFloat>(emitted, x).outputs;
      for (size_t i = 0; i < want.size(); ++i) {
        BigFloat diff = ScalarOps<BigFloat>::abs(want[i] - got[i]);
        BigFloat ref = std::max(BigFloat(1), ScalarOps<BigFloat>::abs(want[i]));
        if (diff > tol * ref)
          throw Error(ErrorCode::QuadraticityCheckFailed,
                      "output " + std::to_string(i) +
                          " deviates from the source at check point " +
                          std::to_string(p));
      }
    }
  }
  return result;
}

QuadraticityReport assert_quadratic(const ValidatedCircuit& vc, int trials,
                                    uint64_t seed) {
  constexpr int kPoints = 9;  // supports difference orders up to 8
  const int n = vc.input_arity();
  Rng rng{seed};
  QuadraticityReport report;
  report.outputs.resize(vc.circuit().outputs.size());
  std::vector<int> detected(vc.circuit().outputs.size(), 0);

  int done = 0, attempts = 0;
  while (done < trials && attempts < trials * 8) {
    ++attempts;
    std::vector<BigFloat> a(static_cast<size_t>(n)), b(static_cast<size_t>(n));
    for (auto& v : a) v = to_bigfloat(rng.sym());
    for (auto& v : b) v = to_bigfloat(rng.sym());
    std::vector<std::vector<BigFloat>> samples;  // [point][output]
    bool ok = true;
    for (int t = 0; t < kPoints && ok; ++t) {
      std::vector<BigFloat> x(static_cast<size_t>(n));
      for (int i = 0; i < n; ++i)
        x[static_cast<size_t>(i)] =
            a[static_cast<size_t>(i)] + BigFloat(t) * b[static_cast<size_t>(i)];
      try {
        samples.push_back(evaluate<BigFloat>(vc, x).outputs);
      } catch (const Error&) {
        ok = false;  // line left the circuit's domain; resample
      }
    }
    if (!ok) continue;
    ++done;
    for (size_t out = 0; out < report.outputs.size(); ++out) {
      std::vector<BigFloat> diff(kPoints);
      BigFloat scale(1);
      for (int t = 0; t < kPoints; ++t) {
        diff[static_cast<size_t>(t)] = samples[static_cast<size_t>(t)][out];
        scale = std::max(scale, ScalarOps<BigFloat>::abs(diff[static_cast<size_t>(t)]));
      }
      const BigFloat tol = scale * boost::multiprecision::pow(
                                       BigFloat(2), -static_cast<int>(bigfloat_bits()) / 2);
      // Degree on this line = highest order with a non-vanishing difference.
      int deg = 0;
      for (int order = 1; order < kPoints; ++order) {
        BigFloat peak(0);
        for (int t = 0; t + order < kPoints; ++t) {
          diff[static_cast<size_t>(t)] =
              diff[static_cast<size_t>(t) + 1] - diff[static_cast<size_t>(t)];
          peak = std::max(peak, ScalarOps<BigFloat>::abs(diff[static_cast<size_t>(t)]));
        }
        if (peak > tol) deg = order;
        diff.resize(static_cast<size_t>(kPoints - order));
      }
      detected[out] = std::max(detected[out], deg);
    }
  }
  report.all_pass = done > 0;
  for (size_t out = 0; out < report.outputs.size(); ++out) {
    report.outputs[out].detected_degree = detected[out];
    report.outputs[out].pass = done > 0 && detected[out] <= 2;
    report.all_pass = report.all_pass && report.outputs[out].pass;
  }
  return report;
}

}  // namespace eaclab
