#include "doctest.h"

#include <boost/multiprecision/mpfr.hpp>

#include "eaclab/circuit.hpp"
#include "eaclab/circuit_io.hpp"
#include "eaclab/eval.hpp"
#include "eaclab/fold.hpp"
#include "helpers.hpp"

using namespace eaclab;
using testutil::CircuitGen;
using testutil::Rng;

namespace {

Circuit exp_ln_x() {
  Circuit c;
  c.input_arity = 1;
  c.gates = {Gate::input(0), Gate::ln(0), Gate::exp(1)};
  c.outputs = {2};
  return c;
}

}  // namespace

TEST_CASE("validate accepts a well-formed circuit") {
  Circuit c;
  c.input_arity = 1;
  c.gates = {Gate::input(0), Gate::exp(0)};
  c.outputs = {1};
  ValidatedCircuit vc = validate(c);
  CHECK(vc.size() == 1);
  CHECK(vc.exp_ln_on_variables());
}

TEST_CASE("validate reports the first violation") {
  SUBCASE("forward reference") {
    Circuit c;
    c.input_arity = 1;
    c.gates = {Gate::add(1, 1), Gate::input(0)};
    c.outputs = {0};
    try {
      validate(c);
      FAIL("expected ForwardReference");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::ForwardReference);
      CHECK(e.gate() == 0);
    }
  }
  SUBCASE("bad output index") {
    Circuit c;
    c.input_arity = 1;
    c.gates = {Gate::input(0), Gate::exp(0), Gate::mul(0, 1)};
    c.outputs = {5};
    CHECK_THROWS_WITH_AS(validate(c), doctest::Contains("BadOutputIndex"), Error);
  }
  SUBCASE("bad input index") {
    Circuit c;
    c.input_arity = 2;
    c.gates = {Gate::input(2)};
    c.outputs = {0};
    try {
      validate(c);
      FAIL("expected BadInputIndex");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::BadInputIndex);
    }
  }
}

TEST_CASE("size counts arithmetic gates only") {
  Circuit c;
  c.input_arity = 2;
  c.gates = {Gate::input(0), Gate::input(1), Gate::add(0, 1)};
  CHECK(circuit_size(c) == 1);

  Circuit d;
  d.input_arity = 1;
  d.gates = {Gate::input(0), Gate::constant("3"), Gate::mul(0, 1), Gate::exp(2)};
  CHECK(circuit_size(d) == 2);

  Circuit e;
  e.input_arity = 3;
  e.gates = {Gate::input(0), Gate::input(1), Gate::input(2)};
  CHECK(circuit_size(e) == 0);
}

TEST_CASE("evaluate: exp(ln(x)) is the identity within mode precision") {
  ValidatedCircuit vc = validate(exp_ln_x());
  auto t = evaluate<double>(vc, std::vector<double>{2.0});
  CHECK(t.outputs[0] == doctest::Approx(2.0).epsilon(1e-15));

  set_bigfloat_bits(256);
  auto tb = evaluate<BigFloat>(vc, std::vector<BigFloat>{BigFloat(2)});
  CHECK(testutil::rel_err(tb.outputs[0], BigFloat(2)) < BigFloat("1e-70"));
}

TEST_CASE("evaluate: x1*x2 + x3") {
  Circuit c;
  c.input_arity = 3;
  c.gates = {Gate::input(0), Gate::input(1), Gate::input(2), Gate::mul(0, 1),
             Gate::add(3, 2)};
  c.outputs = {4};
  auto t = evaluate<double>(validate(c), std::vector<double>{2, 3, 4});
  CHECK(t.outputs[0] == 10.0);
  auto tr = evaluate<Rational>(validate(c), std::vector<Rational>{Rational(2), Rational(3), Rational(4)});
  CHECK(tr.outputs[0] == Rational(10));
}

TEST_CASE("evaluate errors carry the offending gate") {
  Circuit c;
  c.input_arity = 1;
  c.gates = {Gate::input(0), Gate::constant("0"), Gate::div(0, 1)};
  c.outputs = {2};
  try {
    evaluate<double>(validate(c), std::vector<double>{1.0});
    FAIL("expected DivisionByZero");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DivisionByZero);
    CHECK(e.gate() == 2);
  }

  Circuit l;
  l.input_arity = 1;
  l.gates = {Gate::input(0), Gate::ln(0)};
  l.outputs = {1};
  CHECK_THROWS_AS(evaluate<double>(validate(l), std::vector<double>{-1.0}), Error);

  Circuit o;  // exp(exp(exp(x))) overflows Float64 at x = 10
  o.input_arity = 1;
  o.gates = {Gate::input(0), Gate::exp(0), Gate::exp(1), Gate::exp(2)};
  o.outputs = {3};
  try {
    evaluate<double>(validate(o), std::vector<double>{10.0});
    FAIL("expected Overflow");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Overflow);
  }
}

TEST_CASE("rational mode rejects exp/ln on variables at evaluation entry") {
  ValidatedCircuit vc = validate(exp_ln_x());
  CHECK_THROWS_AS(evaluate<Rational>(vc, std::vector<Rational>{Rational(2)}), Error);
}

TEST_CASE("random circuits agree with an independent interpreter") {
  Rng rng(7);
  for (int trial = 0; trial < 40; ++trial) {
    CircuitGen gen(rng.next(), 3, true);
    Circuit c = gen.generate(10 + rng.below(30));
    ValidatedCircuit vc = validate(c);
    std::vector<double> x = {rng.sym(), rng.sym(), rng.sym()};
    auto got = evaluate<double>(vc, x).outputs;
    auto want = testutil::interpret(c, x);
    REQUIRE(got.size() == want.size());
    for (size_t i = 0; i < got.size(); ++i)
      CHECK(testutil::rel_err(got[i], want[i]) < 1e-12);
  }
}

TEST_CASE("rational-mode evaluation tracks BigFloat on exp/ln-free circuits") {
  set_bigfloat_bits(256);
  Rng rng(11);
  const BigFloat tol = boost::multiprecision::pow(BigFloat(2), 1 - 256);
  for (int trial = 0; trial < 20; ++trial) {
    CircuitGen gen(rng.next(), 2, false);
    ValidatedCircuit vc = validate(gen.generate(12));
    std::vector<double> xd = {rng.sym(), rng.sym()};
    std::vector<Rational> xr = {to_rational(xd[0]), to_rational(xd[1])};
    std::vector<BigFloat> xb = {to_bigfloat(xd[0]), to_bigfloat(xd[1])};
    auto vr = evaluate<Rational>(vc, xr).outputs;
    auto vb = evaluate<BigFloat>(vc, xb).outputs;
    for (size_t i = 0; i < vr.size(); ++i)
      CHECK(testutil::rel_err(to_bigfloat(vr[i]), vb[i]) <= tol);
  }
}

TEST_CASE("serialization: canonical text form") {
  Circuit c;
  c.input_arity = 2;
  c.gates = {Gate::input(0), Gate::input(1), Gate::add(0, 1)};
  c.outputs = {2};
  CHECK(serialize(c) ==
        "eac v1 inputs 2\n"
        "g0 = input 0\n"
        "g1 = input 1\n"
        "g2 = add g0 g1\n"
        "outputs g2\n");
}

TEST_CASE("parse round-trips serialize on random circuits") {
  Rng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    CircuitGen gen(rng.next(), 1 + rng.below(4), true);
    Circuit c = gen.generate(1 + rng.below(40));
    Circuit back = parse_circuit(serialize(c));
    CHECK(back == c);
    CHECK(serialize(back) == serialize(c));
  }
}

TEST_CASE("parse: decimal constants round-trip as written") {
  std::string text =
      "eac v1 inputs 0\n"
      "g0 = const 0.500\n"  // trailing zeros preserved
      "g1 = const -1.25e-3\n"
      "g2 = add g0 g1\n"
      "outputs g2\n";
  Circuit c = parse_circuit(text);
  CHECK(c.gates[0].literal == "0.500");
  CHECK(c.gates[1].literal == "-1.25e-3");
  CHECK(serialize(c) == text);
}

TEST_CASE("parse errors carry line numbers") {
  try {
    parse_circuit("eac v1 inputs 1\ng0 = mul g9 g9\noutputs g0\n");
    FAIL("expected SyntaxError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SyntaxError);
    CHECK(e.line() == 2);
  }
  try {
    parse_circuit("eac v1 inputs 1\ng0 = input 0\ng0 = input 0\noutputs g0\n");
    FAIL("expected DuplicateGateId");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DuplicateGateId);
  }
  CHECK_THROWS_AS(parse_circuit("eac v1 inputs 1\ng0 = frob 1\noutputs g0\n"), Error);
}

TEST_CASE("parse accepts comments and blank lines") {
  Circuit c = parse_circuit(
      "# a comment\n"
      "eac v1 inputs 1\n\n"
      "g0 = input 0   # trailing comment\n"
      "outputs g0\n");
  CHECK(c.input_arity == 1);
  CHECK(c.gates.size() == 1);
}

TEST_CASE("constant_fold folds constant subgraphs and nothing else") {
  Circuit c;
  c.input_arity = 1;
  c.gates = {Gate::constant("0"), Gate::exp(0), Gate::input(0), Gate::constant("1"),
             Gate::mul(2, 3)};
  c.outputs = {4, 1};
  Circuit folded = constant_fold(validate(c));
  CHECK(folded.gates[1].op == GateOp::Const);
  CHECK(folded.gates[1].literal == "1");
  CHECK(folded.gates[4].op == GateOp::Mul);  // operand not constant
  CHECK(circuit_size(folded) == 1);
}

TEST_CASE("constant_fold raises on ln of a non-positive constant") {
  Circuit c;
  c.input_arity = 0;
  c.gates = {Gate::constant("-1"), Gate::ln(0)};
  c.outputs = {1};
  try {
    constant_fold(validate(c));
    FAIL("expected LnNonPositive");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::LnNonPositive);
  }
}

TEST_CASE("constant_fold preserves semantics within 2 ulp of the mode") {
  set_bigfloat_bits(256);
  Rng rng(19);
  for (int trial = 0; trial < 25; ++trial) {
    CircuitGen gen(rng.next(), 2, true);
    Circuit c = gen.generate(20);
    // Replace one input with a constant so folding has something to chew on.
    for (auto& g : c.gates)
      if (g.op == GateOp::Input && g.a == 1) g = Gate::constant("0.75");
    ValidatedCircuit vc = validate(c);
    Circuit folded = constant_fold(vc);
    ValidatedCircuit vf = validate(folded);
    std::vector<double> x = {rng.sym(), rng.sym()};
    auto before = evaluate<double>(vc, x).outputs;
    auto after = evaluate<double>(vf, x).outputs;
    for (size_t i = 0; i < before.size(); ++i)
      CHECK(testutil::rel_err(after[i], before[i]) < 1e-13);
  }
}

TEST_CASE("evaluation is deterministic") {
  Rng rng(23);
  CircuitGen gen(5, 3, true);
  Circuit c = gen.generate(60);
  ValidatedCircuit vc = validate(c);
  std::vector<double> x = {0.25, -0.5, 0.125};
  auto a = evaluate<double>(vc, x).outputs;
  auto b = evaluate<double>(vc, x).outputs;
  CHECK(a == b);
}
