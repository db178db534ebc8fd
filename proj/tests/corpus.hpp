#pragma once

#include <string>
#include <vector>

#include "eaclab/circuit.hpp"
#include "eaclab/scalar.hpp"
#include "helpers.hpp"

namespace testutil {

// Explicit quadratic c + l.x + x^T Q x with rational coefficients; the
// independent oracle for the elimination pass.
struct QuadForm {
  int n = 0;
  Rational c;
  std::vector<Rational> lin;               // length n
  std::vector<std::vector<Rational>> quad; // n x n

  explicit QuadForm(int n_) : n(n_), lin(static_cast<size_t>(n_)) {
    quad.assign(static_cast<size_t>(n_), std::vector<Rational>(static_cast<size_t>(n_)));
  }
  bool homogeneous() const {
    if (c != 0) return false;
    for (const auto& v : lin)
      if (v != 0) return false;
    return true;
  }
  Rational eval(const std::vector<Rational>& x) const {
    Rational total = c;
    for (int i = 0; i < n; ++i) total += lin[static_cast<size_t>(i)] * x[static_cast<size_t>(i)];
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        total += quad[static_cast<size_t>(i)][static_cast<size_t>(j)] *
                 x[static_cast<size_t>(i)] * x[static_cast<size_t>(j)];
    return total;
  }
};

// Gate pusher without simplification: corpus circuits keep their exp/ln/div
// detours so the elimination pass has real work to do.
struct RawBuilder {
  eaclab::Circuit c;
  explicit RawBuilder(int arity) { c.input_arity = arity; }
  int push(eaclab::Gate g) {
    c.gates.push_back(std::move(g));
    return static_cast<int>(c.gates.size()) - 1;
  }
  int input(int i) { return push(eaclab::Gate::input(i)); }
  int konst(const std::string& lit) { return push(eaclab::Gate::constant(lit)); }
  int add(int a, int b) { return push(eaclab::Gate::add(a, b)); }
  int sub(int a, int b) { return push(eaclab::Gate::sub(a, b)); }
  int mul(int a, int b) { return push(eaclab::Gate::mul(a, b)); }
  int div(int a, int b) { return push(eaclab::Gate::div(a, b)); }
  int exp(int a) { return push(eaclab::Gate::exp(a)); }
  int ln(int a) { return push(eaclab::Gate::ln(a)); }
  eaclab::Circuit finish(int out) {
    c.outputs = {static_cast<int32_t>(out)};
    return c;
  }
};

struct CorpusItem {
  std::string name;
  eaclab::Circuit circuit;
  QuadForm oracle;
};

namespace corpus_detail {

// Dyadic coefficients keep every elimination constant exactly representable.
inline Rational dyadic(Rng& rng) {
  long num = static_cast<long>(rng.below(17)) - 8;  // -8 .. 8
  long den_pow = rng.below(3);                      // 1, 2, 4
  return Rational(num) / Rational(1L << den_pow);
}

struct QuadBuild {
  RawBuilder b;
  QuadForm form;
  std::vector<int> x;

  explicit QuadBuild(int n) : b(n), form(n) {
    for (int i = 0; i < n; ++i) x.push_back(b.input(i));
  }

  // Homogeneous quadratic with `terms` random x_i x_j products.
  int random_quadratic(Rng& rng, int terms) {
    int acc = -1;
    for (int t = 0; t < terms; ++t) {
      int i = rng.below(form.n), j = rng.below(form.n);
      Rational k = dyadic(rng);
      if (k == 0) k = 1;
      int prod = b.mul(x[static_cast<size_t>(i)], x[static_cast<size_t>(j)]);
      int scaled = b.mul(prod, b.konst(eaclab::exact_decimal(k)));
      form.quad[static_cast<size_t>(i)][static_cast<size_t>(j)] += k;
      acc = acc < 0 ? scaled : b.add(acc, scaled);
    }
    return acc;
  }

  // Homogeneous linear combination (series constant part stays zero).
  int random_linear(Rng& rng, std::vector<Rational>* coeffs = nullptr) {
    int acc = -1;
    for (int i = 0; i < form.n; ++i) {
      Rational k = dyadic(rng);
      if (k == 0) continue;
      int scaled = b.mul(x[static_cast<size_t>(i)], b.konst(eaclab::exact_decimal(k)));
      if (coeffs) (*coeffs)[static_cast<size_t>(i)] += k;
      acc = acc < 0 ? scaled : b.add(acc, scaled);
    }
    if (acc < 0) {
      acc = b.mul(x[0], b.konst("1"));
      if (coeffs) (*coeffs)[0] += 1;
    }
    return acc;
  }
};

}  // namespace corpus_detail

// >= 30 eACs computing quadratics through exp/ln/div detours, paired with
// their explicit quadratic forms. All detours keep exp arguments at constant
// part 0 and ln arguments at constant part 1, so Rational-mode evaluation of
// the eliminated circuits matches the forms exactly.
inline std::vector<CorpusItem> elimination_corpus() {
  using corpus_detail::QuadBuild;
  std::vector<CorpusItem> items;
  Rng rng(20240811);

  // Family 1: ln(exp(q)) wrappers.
  for (int v = 0; v < 7; ++v) {
    int n = 2 + v % 3;
    QuadBuild qb(n);
    int q = qb.random_quadratic(rng, 2 + v);
    int out = qb.b.ln(qb.b.exp(q));
    items.push_back({"ln_exp_" + std::to_string(v), qb.b.finish(out), qb.form});
  }

  // Family 2: q * exp(r) * exp(-r) with linear r.
  for (int v = 0; v < 7; ++v) {
    int n = 2 + v % 3;
    QuadBuild qb(n);
    int q = qb.random_quadratic(rng, 2 + v % 4);
    std::vector<Rational> unused(static_cast<size_t>(n));
    int r = qb.random_linear(rng, &unused);
    int zero = qb.b.konst("0");
    int out = qb.b.mul(qb.b.mul(q, qb.b.exp(r)), qb.b.exp(qb.b.sub(zero, r)));
    items.push_back({"exp_pair_" + std::to_string(v), qb.b.finish(out), qb.form});
  }

  // Family 3: constant-denominator divisions, including exp(0)-built ones.
  const char* denoms[] = {"2", "-4", "0.5", "8", "-0.25", "16", "1.25"};
  for (int v = 0; v < 7; ++v) {
    int n = 2 + v % 3;
    QuadBuild qb(n);
    int q = qb.random_quadratic(rng, 3);
    Rational s = eaclab::rational_from_decimal(denoms[v]);
    int out;
    if (v % 2 == 0) {
      // (q * s) / s
      int num = qb.b.mul(q, qb.b.konst(denoms[v]));
      out = qb.b.div(num, qb.b.konst(denoms[v]));
    } else {
      // q / (exp(0) + (s - 1)): denominator folds to the constant s
      int den = qb.b.add(qb.b.exp(qb.b.konst("0")),
                         qb.b.konst(eaclab::exact_decimal(s - 1)));
      out = qb.b.div(q, den);
      QuadForm scaled(n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          scaled.quad[static_cast<size_t>(i)][static_cast<size_t>(j)] =
              qb.form.quad[static_cast<size_t>(i)][static_cast<size_t>(j)] / s;
      qb.form = scaled;
    }
    items.push_back({"const_div_" + std::to_string(v), qb.b.finish(out), qb.form});
  }

  // Family 4: affine-plus-quadratic values (recovered as c0 + c1 + c2).
  for (int v = 0; v < 6; ++v) {
    int n = 2 + v % 3;
    QuadBuild qb(n);
    int q = qb.random_quadratic(rng, 2);
    int lin = qb.random_linear(rng, &qb.form.lin);
    Rational k = corpus_detail::dyadic(rng) + 1;
    int out = qb.b.add(qb.b.add(q, lin), qb.b.konst(eaclab::exact_decimal(k)));
    qb.form.c += k;
    int r = qb.random_linear(rng, &qb.form.lin);  // extra ln(exp(r)) detour
    out = qb.b.add(out, qb.b.ln(qb.b.exp(r)));
    items.push_back({"affine_" + std::to_string(v), qb.b.finish(out), qb.form});
  }

  // Family 5: ln of exp-products, ln(exp(q1) * exp(q2)) = q1 + q2.
  for (int v = 0; v < 5; ++v) {
    int n = 2 + v % 4;
    QuadBuild qb(n);
    int q1 = qb.random_quadratic(rng, 2);
    int q2 = qb.random_quadratic(rng, 2 + v % 2);
    int out = qb.b.ln(qb.b.mul(qb.b.exp(q1), qb.b.exp(q2)));
    items.push_back({"ln_exp_product_" + std::to_string(v), qb.b.finish(out), qb.form});
  }

  return items;
}

}  // namespace testutil
