#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "eaclab/circuit.hpp"
#include "eaclab/scalar.hpp"

namespace eaclab {

// Incremental circuit construction with peephole simplification: constants
// are pooled, arithmetic on constants folds exactly, and 0/1 identities are
// absorbed. Used by the elimination pass and the transformer compiler.
class CircuitBuilder {
 public:
  explicit CircuitBuilder(int input_arity);

  int input(int index);                      // pooled Input gate
  int constant(const Rational& v);           // pooled Const gate (finite decimal)
  int constant(long v) { return constant(Rational(v)); }
  int constant_decimal(const std::string& literal);
  int zero() { return constant(Rational(0)); }
  int one() { return constant(Rational(1)); }

  int add(int a, int b);
  int sub(int a, int b);
  int mul(int a, int b);
  int div(int a, int b);
  int exp(int a);
  int ln(int a);
  int neg(int a) { return sub(zero(), a); }

  bool is_const(int g) const { return cval_[static_cast<size_t>(g)].has_value(); }
  const Rational& const_value(int g) const { return *cval_[static_cast<size_t>(g)]; }
  bool is_const_value(int g, long v) const {
    return is_const(g) && const_value(g) == v;
  }

  int gate_count() const { return static_cast<int>(c_.gates.size()); }
  int arith_size() const { return arith_size_; }

  void set_outputs(std::vector<int32_t> outs) { c_.outputs = std::move(outs); }
  Circuit take() { return std::move(c_); }
  const Circuit& peek() const { return c_; }

 private:
  int push(Gate g, std::optional<Rational> value = std::nullopt);

  Circuit c_;
  std::vector<std::optional<Rational>> cval_;
  std::unordered_map<std::string, int> const_pool_;
  std::vector<int> input_pool_;
  int arith_size_ = 0;
};

}  // namespace eaclab
