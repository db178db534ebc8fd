#include "eaclab/reductions.hpp"

#include <fstream>
#include <sstream>

#include "eaclab/attention_io.hpp"
#include "eaclab/eval.hpp"

namespace eaclab {

Ov3Decision decide_ov3(const OVInstance& ins, Ov3Path path, int L) {
  if (ins.k != 3)
    throw Error(ErrorCode::DimensionMismatch, "instance must have k = 3");
  const int lh = static_cast<int>(ins.sets[2].size());
  if (L <= 0) L = 1;  // default factorization H = |C|, L = 1
  if (lh == 0 || ins.sets[0].empty() || ins.sets[1].empty()) {
    Ov3Decision dec;
    dec.L = L;
    dec.H = 0;
    dec.has_triple = false;
    return dec;
  }
  if (lh % L != 0)
    throw Error(ErrorCode::DimensionMismatch, "|C| must factor as L * H");
  const int H = lh / L;
  const int n = static_cast<int>(ins.sets[0].size());
  const int last = 2 * ins.d + 1;

  Ov3Decision dec;
  dec.L = L;
  dec.H = H;
  if (path == Ov3Path::HardmaxExact) {
    auto built = build_ov3_transformer<Rational>(ins, L, H);
    Mat<Rational> y = transformer_forward<Rational>(built.x, built.spec);
    Rational cert(0);
    for (int i = 0; i < n; ++i) cert += y(i, last);
    dec.certificate = cert;
    dec.has_triple = cert < Rational(2L * n * lh);
  } else {
    auto built = build_ov3_transformer<double>(ins, L, H);
    const double eps = 1.0 / (10.0 * n * lh);
    // The construction has integer logits with row maximum 0 and values in
    // {0, 1, 2}, so the scaling hypotheses hold by construction.
    auto [soft, c] = harden_to_softmax<double>(std::move(built.spec), eps, true);
    Mat<double> y = transformer_forward<double>(built.x, soft);
    double sum = 0;
    for (int i = 0; i < n; ++i) sum += y(i, last);
    dec.certificate_float = sum;
    dec.scale_c = c;
    dec.threshold = 2.0 * n * lh - 0.25;
    dec.has_triple = sum <= dec.threshold;
  }
  return dec;
}

MatMulBatch MatMulBatch::make(int LH, int N) {
  MatMulBatch b;
  b.LH = LH;
  b.N = N;
  b.A.assign(static_cast<size_t>(LH), Mat<double>::Zero(N, N));
  b.B.assign(static_cast<size_t>(LH), Mat<double>::Zero(N, N));
  b.C.assign(static_cast<size_t>(LH), Mat<double>::Zero(N, N));
  b.D.assign(static_cast<size_t>(LH), Vec<double>::Ones(N));
  return b;
}

void save_batch(std::ostream& os, const MatMulBatch& batch) {
  os << "mmbatch " << batch.LH << " " << batch.N << "\n";
  for (int k = 0; k < batch.LH; ++k) {
    save_matrix(os, batch.A[static_cast<size_t>(k)]);
    save_matrix(os, batch.B[static_cast<size_t>(k)]);
  }
}

void save_batch(const std::string& path, const MatMulBatch& batch) {
  std::ofstream f(path);
  if (!f) throw Error(ErrorCode::SyntaxError, "cannot open '" + path + "' for writing");
  save_batch(f, batch);
}

MatMulBatch load_batch(std::istream& is) {
  std::string tok;
  int lh = 0, n = 0;
  if (!(is >> tok) || tok != "mmbatch" || !(is >> lh >> n) || lh < 0 || n < 0)
    throw Error(ErrorCode::SyntaxError, "expected 'mmbatch <LH> <N>'");
  MatMulBatch batch = MatMulBatch::make(lh, n);
  for (int k = 0; k < lh; ++k) {
    batch.A[static_cast<size_t>(k)] = load_matrix(is);
    batch.B[static_cast<size_t>(k)] = load_matrix(is);
    if (batch.A[static_cast<size_t>(k)].rows() != n || batch.A[static_cast<size_t>(k)].cols() != n ||
        batch.B[static_cast<size_t>(k)].rows() != n || batch.B[static_cast<size_t>(k)].cols() != n)
      throw Error(ErrorCode::DimensionMismatch, "batch matrices must be N x N");
  }
  return batch;
}

MatMulBatch load_batch(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorCode::SyntaxError, "cannot open '" + path + "'");
  return load_batch(f);
}

ActivationOps logistic_activation() {
  ActivationOps ops;
  ops.sigma = [](const BigFloat& x) {
    return BigFloat(1) / (BigFloat(1) + ScalarOps<BigFloat>::exp(-x));
  };
  ops.sigma_inv = [](const BigFloat& y) {
    if (!(y > 0 && y < 1))
      throw Error(ErrorCode::NonInvertibleSigmaValue,
                  "value outside the logistic range (0, 1)");
    return ScalarOps<BigFloat>::ln(y) - ScalarOps<BigFloat>::ln(BigFloat(1) - y);
  };
  ops.h = [](const BigFloat& y) { return y * (BigFloat(1) - y); };
  ops.emit = [](CircuitBuilder& b, int x) {
    return b.div(b.one(), b.add(b.one(), b.exp(b.neg(x))));
  };
  return ops;
}

namespace {
int batch_stride(int n) { return 3 * n * n + n; }
}  // namespace

int RowsumCompiled::input_A(int k, int i, int j) const {
  return k * batch_stride(N) + i * N + j;
}
int RowsumCompiled::input_B(int k, int i, int j) const {
  return k * batch_stride(N) + N * N + i * N + j;
}
int RowsumCompiled::input_C(int k, int i, int j) const {
  return k * batch_stride(N) + 2 * N * N + i * N + j;
}
int RowsumCompiled::input_D(int k, int i) const {
  return k * batch_stride(N) + 3 * N * N + i;
}

std::vector<BigFloat> RowsumCompiled::eval_point(const MatMulBatch& batch) const {
  if (batch.N != N || batch.LH != L * H)
    throw Error(ErrorCode::DimensionMismatch, "batch does not match the compilation");
  std::vector<BigFloat> point(static_cast<size_t>(input_count), BigFloat(0));
  for (int k = 0; k < L * H; ++k)
    for (int i = 0; i < N; ++i) {
      for (int j = 0; j < N; ++j) {
        point[static_cast<size_t>(input_A(k, i, j))] =
            to_bigfloat(batch.A[static_cast<size_t>(k)](i, j));
        point[static_cast<size_t>(input_B(k, i, j))] =
            to_bigfloat(batch.B[static_cast<size_t>(k)](i, j));
        // C stays 0: the derivative of f w.r.t. C_kij then reads off
        // exp((A_k B_k^T)_ij) / (1 + S_ki)^2.
      }
      point[static_cast<size_t>(input_D(k, i))] = BigFloat(1);
    }
  return point;
}

RowsumCompiled compile_rowsum_eac(int L, int H, int N, const ActivationOps* sigmoid_mlp) {
  const int lh = L * H;
  const int mp = 2 * N + 3;
  RowsumCompiled out;
  out.L = L;
  out.H = H;
  out.N = N;
  out.input_count = lh * batch_stride(N);

  CircuitBuilder b(out.input_count);
  SymTransformer sym;
  sym.N = N + 1;
  sym.m = sym.d_in = sym.d_out = mp;
  sym.L = L;
  sym.H = H;
  sym.aggregation = Aggregation::Sum;
  sym.mode = AttentionMode::Softmax;
  sym.heads.resize(static_cast<size_t>(L));

  for (int l = 0; l < L; ++l)
    for (int h = 0; h < H; ++h) {
      const int k = l * H + h;
      SymHead head{sym_zero(b, mp, mp), sym_zero(b, mp, mp), sym_zero(b, mp, mp)};
      for (int r = 0; r < N; ++r) {
        for (int c = 0; c < N; ++c) {
          head.wq.at(N + 1 + r, c) = b.input(out.input_A(k, r, c));
          head.wq.at(N + 1 + r, N + c) = b.input(out.input_C(k, r, c));
          head.wk.at(N + 1 + r, c) = b.input(out.input_B(k, r, c));
        }
        head.wk.at(N + 1 + r, N + r) = b.one();
      }
      head.wv.at(2 * N + 1, 0) = b.one();
      for (int c = 0; c < N; ++c)
        head.wv.at(2 * N + 2, 1 + c) = b.input(out.input_D(k, c));
      sym.heads[static_cast<size_t>(l)].push_back(std::move(head));
    }

  if (sigmoid_mlp == nullptr) {
    sym.mlps.assign(static_cast<size_t>(L), SymMlp{});
  } else {
    BigFloat s0 = sigmoid_mlp->sigma(BigFloat(0));
    BigFloat s1 = sigmoid_mlp->sigma(BigFloat(1));
    if (s0 == s1)
      throw Error(ErrorCode::UnsupportedMode,
                  "activation must separate 0 and 1 (sigma(0) != sigma(1))");
    // f2(x) = c1 x + c2 maps sigma(0) -> 0 and sigma(1) -> 1, so the 0/1
    // bookkeeping columns pass through each layer unchanged.
    Rational c1 = to_rational(BigFloat(1) / (s1 - s0));
    Rational c2 = to_rational(-s0 / (s1 - s0));
    SymMlp mlp;
    mlp.kind = MlpKind::Standard;
    mlp.emit_act = sigmoid_mlp->emit;
    mlp.w1 = sym_zero(b, mp + 1, mp);
    for (int i = 0; i < mp; ++i) mlp.w1.at(i, i) = b.one();
    mlp.w2 = sym_zero(b, mp + 1, mp);
    for (int j = 0; j < mp; ++j) {
      if (j <= N) {
        mlp.w2.at(j, j) = b.one();
      } else {
        mlp.w2.at(j, j) = b.constant(c1);
        mlp.w2.at(mp, j) = b.constant(c2);
      }
    }
    sym.mlps.assign(static_cast<size_t>(L), mlp);
  }
  sym.output_mlp = SymMlp{};

  SymMat x(N + 1, mp, b.zero());
  for (int i = 0; i < N; ++i) {
    x.at(i, N + 1 + i) = b.one();
    x.at(i, 2 * N + 1) = b.one();
  }
  x.at(N, 2 * N + 2) = b.one();

  SymMat y = sym_forward(b, sym, x);

  int f_gate = b.zero();
  int g_gate = b.zero();
  std::vector<int32_t> entry_outputs;
  for (int i = 0; i < N; ++i) {
    f_gate = b.add(f_gate, y.at(i, 0));
    entry_outputs.push_back(y.at(i, 0));
  }
  for (int i = 0; i < N; ++i) {
    g_gate = b.add(g_gate, y.at(i, i + 1));
    entry_outputs.push_back(y.at(i, i + 1));
  }

  Circuit base = b.take();
  out.f = base;
  out.f.outputs = {static_cast<int32_t>(f_gate)};
  out.g = base;
  out.g.outputs = {static_cast<int32_t>(g_gate)};
  out.entries = std::move(base);
  out.entries.outputs = std::move(entry_outputs);
  return out;
}

namespace {

DerivativeBundle read_bundle(const RowsumCompiled& compiled,
                             const std::vector<BigFloat>& grad_f_out,
                             const std::vector<BigFloat>& grad_g_out) {
  const int lh = compiled.L * compiled.H, n = compiled.N;
  DerivativeBundle bundle;
  bundle.df_dC.assign(static_cast<size_t>(lh), Mat<BigFloat>(n, n));
  bundle.dg_dD.assign(static_cast<size_t>(lh), Vec<BigFloat>(n));
  for (int k = 0; k < lh; ++k)
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j)
        bundle.df_dC[static_cast<size_t>(k)](i, j) =
            grad_f_out[static_cast<size_t>(1 + compiled.input_C(k, i, j))];
      bundle.dg_dD[static_cast<size_t>(k)][i] =
          grad_g_out[static_cast<size_t>(1 + compiled.input_D(k, i))];
    }
  return bundle;
}

void require_positive(const DerivativeBundle& bundle) {
  for (const auto& m : bundle.df_dC)
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j)
        if (!(m(i, j) > 0))
          throw Error(ErrorCode::NonPositiveDerivative,
                      "df/dC entries must be strictly positive");
  for (const auto& v : bundle.dg_dD)
    for (Eigen::Index i = 0; i < v.size(); ++i)
      if (!(v[i] > 0))
        throw Error(ErrorCode::NonPositiveDerivative,
                    "dg/dD entries must be strictly positive");
}

}  // namespace

std::vector<Mat<BigFloat>> extract_matmuls(const MatMulBatch& batch, int L, int H,
                                           DerivativeBundle* bundle_out,
                                           ExtractStats* stats) {
  if (L * H != batch.LH)
    throw Error(ErrorCode::DimensionMismatch, "L * H must equal the batch size");
  RowsumCompiled compiled = compile_rowsum_eac(L, H, batch.N);
  ValidatedCircuit vf = validate(compiled.f);
  ValidatedCircuit vg = validate(compiled.g);
  GradientCircuit gf = gradient_circuit(vf);
  GradientCircuit gg = gradient_circuit(vg);
  if (stats) {
    stats->transformer_size = vf.size();
    stats->grad_f_size = circuit_size(gf.circuit);
    stats->grad_g_size = circuit_size(gg.circuit);
    stats->inputs = compiled.input_count;
  }
  std::vector<BigFloat> point = compiled.eval_point(batch);
  auto grad_f_out = evaluate<BigFloat>(validate(std::move(gf.circuit)), point).outputs;
  auto grad_g_out = evaluate<BigFloat>(validate(std::move(gg.circuit)), point).outputs;
  DerivativeBundle bundle = read_bundle(compiled, grad_f_out, grad_g_out);
  require_positive(bundle);

  std::vector<Mat<BigFloat>> products;
  products.reserve(static_cast<size_t>(batch.LH));
  for (int k = 0; k < batch.LH; ++k) {
    Mat<BigFloat> p(batch.N, batch.N);
    for (int i = 0; i < batch.N; ++i) {
      BigFloat ln_g = ScalarOps<BigFloat>::ln(bundle.dg_dD[static_cast<size_t>(k)][i]);
      for (int j = 0; j < batch.N; ++j)
        p(i, j) = ScalarOps<BigFloat>::ln(bundle.df_dC[static_cast<size_t>(k)](i, j)) -
                  BigFloat(2) * ln_g;
    }
    products.push_back(std::move(p));
  }
  if (bundle_out) *bundle_out = std::move(bundle);
  return products;
}

std::vector<Mat<BigFloat>> sigmoid_recover(const MatMulBatch& batch, int L, int H,
                                           const ActivationOps& act) {
  if (L * H != batch.LH)
    throw Error(ErrorCode::DimensionMismatch, "L * H must equal the batch size");
  if (act.sigma(BigFloat(0)) == act.sigma(BigFloat(1)))
    throw Error(ErrorCode::UnsupportedMode,
                "activation must separate 0 and 1 (sigma(0) != sigma(1))");
  const int n = batch.N;
  RowsumCompiled compiled = compile_rowsum_eac(L, H, n, &act);
  GradientCircuit gf = gradient_circuit(validate(compiled.f));
  GradientCircuit gg = gradient_circuit(validate(compiled.g));
  std::vector<BigFloat> point = compiled.eval_point(batch);
  auto grad_f_out = evaluate<BigFloat>(validate(std::move(gf.circuit)), point).outputs;
  auto grad_g_out = evaluate<BigFloat>(validate(std::move(gg.circuit)), point).outputs;
  auto y_out = evaluate<BigFloat>(validate(compiled.entries), point).outputs;
  DerivativeBundle bundle = read_bundle(compiled, grad_f_out, grad_g_out);

  // Backward induction over layers: divide out accumulated sigma' factors,
  // recover the layer's products, rebuild its head outputs from row sums, and
  // extend the factors to the previous layer.
  std::vector<BigFloat> acc_f(static_cast<size_t>(n)), acc_g(static_cast<size_t>(n));
  std::vector<BigFloat> cur1(static_cast<size_t>(n)), curd(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    const BigFloat& y1 = y_out[static_cast<size_t>(i)];
    const BigFloat& yd = y_out[static_cast<size_t>(n + i)];
    acc_f[static_cast<size_t>(i)] = act.h(y1);
    acc_g[static_cast<size_t>(i)] = act.h(yd);
    cur1[static_cast<size_t>(i)] = act.sigma_inv(y1);
    curd[static_cast<size_t>(i)] = act.sigma_inv(yd);
  }

  std::vector<Mat<BigFloat>> products(static_cast<size_t>(batch.LH));
  for (int l = L - 1; l >= 0; --l) {
    std::vector<BigFloat> head1(static_cast<size_t>(n), BigFloat(0));
    std::vector<BigFloat> headd(static_cast<size_t>(n), BigFloat(0));
    for (int h = 0; h < H; ++h) {
      const int k = l * H + h;
      Mat<BigFloat> p(n, n);
      for (int i = 0; i < n; ++i) {
        BigFloat inner_g = bundle.dg_dD[static_cast<size_t>(k)][i] / acc_g[static_cast<size_t>(i)];
        if (!(inner_g > 0))
          throw Error(ErrorCode::NonPositiveDerivative, "peeled dg/dD must be positive");
        BigFloat ln_g = ScalarOps<BigFloat>::ln(inner_g);
        for (int j = 0; j < n; ++j) {
          BigFloat inner_f =
              bundle.df_dC[static_cast<size_t>(k)](i, j) / acc_f[static_cast<size_t>(i)];
          if (!(inner_f > 0))
            throw Error(ErrorCode::NonPositiveDerivative, "peeled df/dC must be positive");
          p(i, j) = ScalarOps<BigFloat>::ln(inner_f) - BigFloat(2) * ln_g;
        }
      }
      // Row sums give this head's contribution at the evaluation point.
      for (int i = 0; i < n; ++i) {
        BigFloat s(0);
        for (int j = 0; j < n; ++j) s += ScalarOps<BigFloat>::exp(p(i, j));
        head1[static_cast<size_t>(i)] += s / (1 + s);
        headd[static_cast<size_t>(i)] += BigFloat(1) / (1 + s);
      }
      products[static_cast<size_t>(k)] = std::move(p);
    }
    if (l == 0) break;
    for (int i = 0; i < n; ++i) {
      BigFloat sig_prev1 = cur1[static_cast<size_t>(i)] - head1[static_cast<size_t>(i)];
      BigFloat sig_prevd = curd[static_cast<size_t>(i)] - headd[static_cast<size_t>(i)];
      acc_f[static_cast<size_t>(i)] *= act.h(sig_prev1);
      acc_g[static_cast<size_t>(i)] *= act.h(sig_prevd);
      cur1[static_cast<size_t>(i)] = act.sigma_inv(sig_prev1);
      curd[static_cast<size_t>(i)] = act.sigma_inv(sig_prevd);
    }
  }
  return products;
}

}  // namespace eaclab
