#pragma once

#include <cstdint>
#include <vector>

#include "eaclab/circuit.hpp"
#include "eaclab/scalar.hpp"

namespace eaclab {

// Per-output truncated-series parts produced by the elimination pass. The
// constant part c0 is input-independent and folded at compile time; c1 and c2
// are gates of the emitted AC computing the linear and quadratic parts. For a
// homogeneous quadratic output, c2 alone computes the function; in general
// the value is c0 + c1 + c2.
struct OutputParts {
  Rational c0;
  int32_t c1 = -1;
  int32_t c2 = -1;
};

struct EliminationResult {
  Circuit ac;  // gate set within {Const, Input, Add, Sub, Mul}; outputs are c2
  std::vector<OutputParts> parts;
  int source_size = 0;

  // Same gates with outputs computing c0 + c1 + c2 per source output.
  Circuit full_value_circuit() const;
};

// Propagates per-gate (c0, c1, c2) power-series coefficients under the
// substitution x_i <- x_i z, eliminating Exp, Ln and Div. Preconditions: each
// Ln operand has positive constant part and each Div denominator has nonzero
// constant part; violations are compile errors naming the gate. If
// check_points > 0, the emitted circuit is compared against the source on
// that many random points and a mismatch raises QuadraticityCheckFailed.
EliminationResult eliminate(const ValidatedCircuit& vc, int check_points = 0,
                            uint64_t check_seed = 1);

struct QuadraticityReport {
  struct PerOutput {
    bool pass = false;
    int detected_degree = 0;  // smallest degree matching all sampled lines
  };
  std::vector<PerOutput> outputs;
  bool all_pass = false;
};

// Spot check of the theorem's hypothesis: restricts each output to random
// lines x(t) = a + t b and flags outputs whose restriction is not degree <= 2.
QuadraticityReport assert_quadratic(const ValidatedCircuit& vc, int trials,
                                    uint64_t seed = 1);

}  // namespace eaclab
