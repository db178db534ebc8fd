#include "doctest.h"

#include "eaclab/compile.hpp"
#include "eaclab/eval.hpp"
#include "eaclab/reductions.hpp"
#include "attention_helpers.hpp"

using namespace eaclab;
using testutil::cast_matrix;
using testutil::cast_spec;
using testutil::max_abs_diff;
using testutil::random_matrix;
using testutil::random_transformer;
using testutil::Rng;

namespace {

Mat<BigFloat> run_compiled(const CompiledTransformer& ct, const Mat<double>& x) {
  std::vector<BigFloat> in;
  in.reserve(static_cast<size_t>(x.size()));
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index j = 0; j < x.cols(); ++j) in.push_back(to_bigfloat(x(i, j)));
  auto out = evaluate<BigFloat>(validate(ct.circuit), in).outputs;
  Mat<BigFloat> y(ct.out_rows, ct.out_cols);
  size_t p = 0;
  for (int i = 0; i < ct.out_rows; ++i)
    for (int j = 0; j < ct.out_cols; ++j) y(i, j) = out[p++];
  return y;
}

}  // namespace

TEST_CASE("compiled transformer matches the simulator on random specs") {
  set_bigfloat_bits(256);
  Rng rng(31);
  for (int trial = 0; trial < 8; ++trial) {
    const int n = 1 + rng.below(4), m = 2 + rng.below(3);
    const int l = 1 + rng.below(2), h = 1 + rng.below(2);
    TransformerSpec<double> spec =
        random_transformer(rng, n, m, l, h, Aggregation::Sum, AttentionMode::Softmax);
    CompiledTransformer ct = compile_transformer_to_eac(spec);
    Mat<double> x = random_matrix(rng, n, m);
    Mat<BigFloat> via_circuit = run_compiled(ct, x);
    Mat<BigFloat> via_forward =
        transformer_forward<BigFloat>(cast_matrix<BigFloat>(x), cast_spec<BigFloat>(spec));
    CHECK(max_abs_diff(via_circuit, via_forward) < BigFloat("1e-60"));
  }
}

TEST_CASE("compilation handles concat aggregation and sigmoid GLU MLPs") {
  set_bigfloat_bits(256);
  Rng rng(32);
  TransformerSpec<double> spec = random_transformer(rng, 3, 4, 2, 2, Aggregation::Concat,
                                                    AttentionMode::Softmax, true);
  CompiledTransformer ct = compile_transformer_to_eac(spec);
  Mat<double> x = random_matrix(rng, 3, 4);
  Mat<BigFloat> via_circuit = run_compiled(ct, x);
  Mat<BigFloat> via_forward =
      transformer_forward<BigFloat>(cast_matrix<BigFloat>(x), cast_spec<BigFloat>(spec));
  CHECK(max_abs_diff(via_circuit, via_forward) < BigFloat("1e-60"));
}

TEST_CASE("hardmax specs are not compilable") {
  Rng rng(33);
  TransformerSpec<double> spec =
      random_transformer(rng, 2, 2, 1, 1, Aggregation::Sum, AttentionMode::Hardmax);
  try {
    compile_transformer_to_eac(spec);
    FAIL("expected HardmaxNotCompilable");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::HardmaxNotCompilable);
  }
}

TEST_CASE("row-sum compilation at N = 1 computes exp(ab)/(1 + exp(ab))") {
  set_bigfloat_bits(256);
  RowsumCompiled rc = compile_rowsum_eac(1, 1, 1);
  ValidatedCircuit vf = validate(rc.f);
  // a = b = 0, C = 0, D = 1 -> 1/2
  std::vector<BigFloat> point(static_cast<size_t>(rc.input_count), BigFloat(0));
  point[static_cast<size_t>(rc.input_D(0, 0))] = BigFloat(1);
  CHECK(evaluate<BigFloat>(vf, point).outputs[0] == BigFloat(0.5));
  // general a, b: S = exp(ab)
  point[static_cast<size_t>(rc.input_A(0, 0, 0))] = to_bigfloat(0.75);
  point[static_cast<size_t>(rc.input_B(0, 0, 0))] = to_bigfloat(-0.5);
  BigFloat s = ScalarOps<BigFloat>::exp(to_bigfloat(0.75) * to_bigfloat(-0.5));
  BigFloat want = s / (1 + s);
  CHECK(testutil::rel_err(evaluate<BigFloat>(vf, point).outputs[0], want) < BigFloat("1e-70"));
}

TEST_CASE("row-sum compilation matches the numeric forward pass") {
  set_bigfloat_bits(256);
  Rng rng(34);
  for (int trial = 0; trial < 6; ++trial) {
    const int l = 1 + rng.below(2), h = 1 + rng.below(2), n = 1 + rng.below(4);
    MatMulBatch batch = MatMulBatch::make(l * h, n);
    for (int k = 0; k < l * h; ++k) {
      batch.A[static_cast<size_t>(k)] = random_matrix(rng, n, n, 1.0);
      batch.B[static_cast<size_t>(k)] = random_matrix(rng, n, n, 1.0);
      batch.C[static_cast<size_t>(k)] = random_matrix(rng, n, n, 1.0);
      for (int i = 0; i < n; ++i) batch.D[static_cast<size_t>(k)][i] = rng.sym();
    }
    // Numeric path.
    auto built = build_rowsum_transformer<BigFloat>(batch, l, h);
    Mat<BigFloat> want = transformer_forward<BigFloat>(built.x, built.spec);
    // Circuit path at the same (A, B, C, D) point.
    RowsumCompiled rc = compile_rowsum_eac(l, h, n);
    std::vector<BigFloat> point(static_cast<size_t>(rc.input_count));
    for (int k = 0; k < l * h; ++k)
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          point[static_cast<size_t>(rc.input_A(k, i, j))] =
              to_bigfloat(batch.A[static_cast<size_t>(k)](i, j));
          point[static_cast<size_t>(rc.input_B(k, i, j))] =
              to_bigfloat(batch.B[static_cast<size_t>(k)](i, j));
          point[static_cast<size_t>(rc.input_C(k, i, j))] =
              to_bigfloat(batch.C[static_cast<size_t>(k)](i, j));
        }
        point[static_cast<size_t>(rc.input_D(k, i))] =
            to_bigfloat(batch.D[static_cast<size_t>(k)][i]);
      }
    auto entries = evaluate<BigFloat>(validate(rc.entries), point).outputs;
    for (int i = 0; i < n; ++i) {
      CHECK(testutil::rel_err(entries[static_cast<size_t>(i)], want(i, 0)) < BigFloat("1e-40"));
      CHECK(testutil::rel_err(entries[static_cast<size_t>(n + i)], want(i, i + 1)) <
            BigFloat("1e-40"));
    }
  }
}

TEST_CASE("row-sum circuit size scales like L H N^2 m") {
  // m' = Theta(N) here, so gates per head should grow roughly like N^3.
  double per_unit_small = 0, per_unit_big = 0;
  {
    RowsumCompiled rc = compile_rowsum_eac(1, 2, 4);
    per_unit_small = static_cast<double>(circuit_size(rc.f)) / (2.0 * 4 * 4 * (2 * 4 + 3));
  }
  {
    RowsumCompiled rc = compile_rowsum_eac(2, 2, 8);
    per_unit_big = static_cast<double>(circuit_size(rc.f)) / (4.0 * 8 * 8 * (2 * 8 + 3));
  }
  // The per-unit constant stays in a narrow band as the family grows.
  CHECK(per_unit_big < 4 * per_unit_small);
  CHECK(per_unit_small < 4 * per_unit_big);
}

TEST_CASE("compiled denormalized wrapper evaluates through the ratio MLP") {
  set_bigfloat_bits(256);
  Rng rng(35);
  const int n = 2, d_in = 2, m = 2;
  AttentionHeadSpec<double> head{random_matrix(rng, d_in, m), random_matrix(rng, d_in, m),
                                 random_matrix(rng, d_in, m)};
  auto wrapper = denormalized_wrapper(head, n, d_in);
  CompiledTransformer ct = compile_transformer_to_eac(wrapper.spec);
  Mat<double> x = random_matrix(rng, n, d_in);
  Mat<double> padded = wrapper.pad_input(x);
  Mat<BigFloat> via_circuit = run_compiled(ct, padded);
  AttentionHeadSpec<BigFloat> head_b{cast_matrix<BigFloat>(head.wq),
                                     cast_matrix<BigFloat>(head.wk),
                                     cast_matrix<BigFloat>(head.wv)};
  Mat<BigFloat> want =
      attention_head(cast_matrix<BigFloat>(x), head_b, AttentionMode::Denormalized);
  CHECK(max_abs_diff<BigFloat>(via_circuit.topRows(n), want) < BigFloat("1e-40"));
}
