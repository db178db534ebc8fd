#pragma once

#include "eaclab/circuit.hpp"

namespace eaclab {

// Replaces every gate whose operands are all constant-valued by a Const gate,
// in place (gate indices are preserved). Add/Sub/Mul fold exactly in rational
// arithmetic; Div folds exactly when the quotient has a finite decimal
// representation; Exp, Ln and the remaining Div cases fold through BigFloat
// at the configured precision, whose dyadic result is rendered exactly.
Circuit constant_fold(const ValidatedCircuit& vc);

}  // namespace eaclab
