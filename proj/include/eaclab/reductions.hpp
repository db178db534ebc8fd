#pragma once

#include <functional>
#include <iosfwd>
#include <optional>

#include "eaclab/attention.hpp"
#include "eaclab/autodiff.hpp"
#include "eaclab/compile.hpp"
#include "eaclab/ov.hpp"

namespace eaclab {

// ---------------------------------------------------------------------------
// 3-OV through a transformer
// ---------------------------------------------------------------------------

template <class S>
struct Ov3Construction {
  TransformerSpec<S> spec;  // hardmax, identity MLPs, m = d_in = d_out = 2d+2
  Mat<S> x;                 // (N+1) x (2d+2): rows (a_i, b_i, 1, 0), sentinel (0, 0, 2, 0)
};

// Builds the L x H transformer whose head (h, l) carries c_{h,l}: logits are
// -a_i . b_j . c_{h,l} with a sentinel row/column of zeros, values are the
// last-column vector (1, ..., 1, 2). Requires |A| = |B| and |C| = L * H.
template <class S>
Ov3Construction<S> build_ov3_transformer(const OVInstance& ins, int L, int H) {
  if (ins.k != 3) throw Error(ErrorCode::DimensionMismatch, "instance must have k = 3");
  const int n = static_cast<int>(ins.sets[0].size());
  if (static_cast<int>(ins.sets[1].size()) != n)
    throw Error(ErrorCode::DimensionMismatch, "|A| and |B| must agree");
  if (static_cast<int>(ins.sets[2].size()) != L * H)
    throw Error(ErrorCode::DimensionMismatch, "|C| must equal L * H");
  const int d = ins.d;
  const int m = 2 * d + 2;

  Ov3Construction<S> built;
  TransformerSpec<S>& spec = built.spec;
  spec.N = n + 1;
  spec.m = spec.d_in = spec.d_out = m;
  spec.L = L;
  spec.H = H;
  spec.aggregation = Aggregation::Sum;
  spec.mode = AttentionMode::Hardmax;
  spec.heads.resize(static_cast<size_t>(L));
  spec.mlps.assign(static_cast<size_t>(L), MlpSpec<S>::identity());

  for (int l = 0; l < L; ++l)
    for (int h = 0; h < H; ++h) {
      const int k = l * H + h;
      AttentionHeadSpec<S> head;
      head.wq = Mat<S>::Zero(m, m);
      head.wk = Mat<S>::Zero(m, m);
      head.wv = Mat<S>::Zero(m, m);
      for (int j = 0; j < d; ++j) {
        head.wq(j, j) = S(-1);
        head.wk(d + j, j) = S(ins.coord(2, k, j));
      }
      head.wv(2 * d, m - 1) = S(1);
      spec.heads[static_cast<size_t>(l)].push_back(std::move(head));
    }

  built.x = Mat<S>::Zero(n + 1, m);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) {
      built.x(i, j) = S(ins.coord(0, i, j));
      built.x(i, d + j) = S(ins.coord(1, i, j));
    }
    built.x(i, 2 * d) = S(1);
  }
  built.x(n, 2 * d) = S(2);
  return built;
}

enum class Ov3Path { HardmaxExact, SoftmaxFloat };

struct Ov3Decision {
  bool has_triple = false;
  Rational certificate;          // hardmax path: exact; 2NHL iff no triple
  double certificate_float = 0;  // softmax path sum
  int scale_c = 0;               // softmax path: query scale applied
  double threshold = 0;          // softmax path: decision midpoint
  int L = 0, H = 0;
};

// Decides the instance through the transformer. HardmaxExact evaluates in
// Rational mode and compares the certificate with 2NHL; SoftmaxFloat scales
// queries for target error 1/(10NHL) and decides at the 2NHL - 0.25 midpoint.
// L = 0 picks the default factorization L = 1, H = |C|.
Ov3Decision decide_ov3(const OVInstance& ins, Ov3Path path, int L = 0);

// ---------------------------------------------------------------------------
// Batched matrix products through one transformer
// ---------------------------------------------------------------------------

struct MatMulBatch {
  int LH = 0, N = 0;
  std::vector<Mat<double>> A, B;  // LH pairs of N x N matrices
  std::vector<Mat<double>> C;    // auxiliary shifts, default zero
  std::vector<Vec<double>> D;    // auxiliary vectors, default one

  static MatMulBatch make(int LH, int N);
};

// File format: `mmbatch <LH> <N>` then LH pairs of matrix blocks (A_k, B_k).
void save_batch(std::ostream& os, const MatMulBatch& batch);
void save_batch(const std::string& path, const MatMulBatch& batch);
MatMulBatch load_batch(std::istream& is);
MatMulBatch load_batch(const std::string& path);

// Row-sum transformer family: m' = 2N+3, softmax attention, identity MLPs;
// head k = (h, l) uses extended weights (A_k C_k) and (B_k I) so that with
// S_ki = sum_j exp((A_k B_k^T + C_k)_{ij}) the output has
//   Y[i, 0]   = sum_k S_ki / (1 + S_ki)
//   Y[i, j]   = sum_k D_k[j-1] / (1 + S_ki)     (1 <= j <= N, i < N)
// plus the sentinel row N with denominators N + 1.
template <class S>
struct RowsumConstruction {
  TransformerSpec<S> spec;
  Mat<S> x;
};

template <class S>
RowsumConstruction<S> build_rowsum_transformer(const MatMulBatch& batch, int L, int H) {
  if (L * H != batch.LH)
    throw Error(ErrorCode::DimensionMismatch, "L * H must equal the batch size");
  const int n = batch.N;
  const int mp = 2 * n + 3;
  RowsumConstruction<S> built;
  TransformerSpec<S>& spec = built.spec;
  spec.N = n + 1;
  spec.m = spec.d_in = spec.d_out = mp;
  spec.L = L;
  spec.H = H;
  spec.aggregation = Aggregation::Sum;
  spec.mode = AttentionMode::Softmax;
  spec.heads.resize(static_cast<size_t>(L));
  spec.mlps.assign(static_cast<size_t>(L), MlpSpec<S>::identity());
  for (int l = 0; l < L; ++l)
    for (int h = 0; h < H; ++h) {
      const int k = l * H + h;
      AttentionHeadSpec<S> head;
      head.wq = Mat<S>::Zero(mp, mp);
      head.wk = Mat<S>::Zero(mp, mp);
      head.wv = Mat<S>::Zero(mp, mp);
      for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) {
          head.wq(n + 1 + r, c) = ScalarOps<S>::from_double(batch.A[static_cast<size_t>(k)](r, c));
          head.wq(n + 1 + r, n + c) = ScalarOps<S>::from_double(batch.C[static_cast<size_t>(k)](r, c));
          head.wk(n + 1 + r, c) = ScalarOps<S>::from_double(batch.B[static_cast<size_t>(k)](r, c));
        }
      for (int r = 0; r < n; ++r) head.wk(n + 1 + r, n + r) = S(1);  // identity block
      head.wv(2 * n + 1, 0) = S(1);
      for (int c = 0; c < n; ++c)
        head.wv(2 * n + 2, 1 + c) = ScalarOps<S>::from_double(batch.D[static_cast<size_t>(k)][c]);
      spec.heads[static_cast<size_t>(l)].push_back(std::move(head));
    }
  built.x = Mat<S>::Zero(n + 1, mp);
  for (int i = 0; i < n; ++i) {
    built.x(i, n + 1 + i) = S(1);
    built.x(i, 2 * n + 1) = S(1);
  }
  built.x(n, 2 * n + 2) = S(1);
  return built;
}

// Activation package for the Prop-B.6-style pipeline: sigma and h as values,
// sigma's inverse, and sigma as gates. sigma'(x) = h(sigma(x)).
struct ActivationOps {
  std::function<BigFloat(const BigFloat&)> sigma;
  std::function<BigFloat(const BigFloat&)> sigma_inv;
  std::function<BigFloat(const BigFloat&)> h;
  std::function<int(CircuitBuilder&, int)> emit;
};

ActivationOps logistic_activation();

// Symbolic compilation of the row-sum family: circuit inputs are the entries
// of A_k, B_k, C_k, D_k per head (in that order, row-major), weights per
// Def-style parameterization. `f` sums output column 1, `g` the diagonal
// entries Y[i, i+1]; `entries` exposes those 2N output entries directly.
struct RowsumCompiled {
  Circuit f, g, entries;
  int L = 0, H = 0, N = 0;
  int input_count = 0;

  int input_A(int k, int i, int j) const;
  int input_B(int k, int i, int j) const;
  int input_C(int k, int i, int j) const;
  int input_D(int k, int i) const;
  // Evaluation point (A, B from the batch, C = 0, D = 1), exact per entry.
  std::vector<BigFloat> eval_point(const MatMulBatch& batch) const;
};

RowsumCompiled compile_rowsum_eac(int L, int H, int N,
                                  const ActivationOps* sigmoid_mlp = nullptr);

struct DerivativeBundle {
  std::vector<Mat<BigFloat>> df_dC;  // LH matrices of N x N
  std::vector<Vec<BigFloat>> dg_dD;  // LH vectors of length N
};

struct ExtractStats {
  int transformer_size = 0;  // arithmetic gates of the compiled f circuit
  int grad_f_size = 0;
  int grad_g_size = 0;
  int inputs = 0;
};

// Full gradient pipeline: compile, differentiate f and g with the derivative
// transform, evaluate at (A, B, C = 0, D = 1) in BigFloat, and combine
// ln(df/dC_kij) - 2 ln(dg/dD_ki) into the LH products A_k B_k^T.
std::vector<Mat<BigFloat>> extract_matmuls(const MatMulBatch& batch, int L, int H,
                                           DerivativeBundle* bundle = nullptr,
                                           ExtractStats* stats = nullptr);

// Same recovery through sigmoid-MLP layers: gradients are peeled layer by
// layer, dividing out accumulated sigma' factors via sigma'(x) = h(sigma(x)).
std::vector<Mat<BigFloat>> sigmoid_recover(const MatMulBatch& batch, int L, int H,
                                           const ActivationOps& act = logistic_activation());

}  // namespace eaclab
