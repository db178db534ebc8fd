#include "eaclab/compile.hpp"

namespace eaclab {

SymMat sym_constants(CircuitBuilder& b, const Mat<double>& m) {
  SymMat s(static_cast<int>(m.rows()), static_cast<int>(m.cols()));
  for (int i = 0; i < s.rows; ++i)
    for (int j = 0; j < s.cols; ++j) s.at(i, j) = b.constant(to_rational(m(i, j)));
  return s;
}

SymMat sym_zero(CircuitBuilder& b, int rows, int cols) {
  return SymMat(rows, cols, b.zero());
}

SymMat sym_matmul(CircuitBuilder& b, const SymMat& a, const SymMat& c) {
  if (a.cols != c.rows) throw Error(ErrorCode::DimensionMismatch, "symbolic matmul");
  SymMat out(a.rows, c.cols);
  for (int i = 0; i < a.rows; ++i)
    for (int j = 0; j < c.cols; ++j) {
      int acc = b.zero();
      for (int k = 0; k < a.cols; ++k) acc = b.add(acc, b.mul(a.at(i, k), c.at(k, j)));
      out.at(i, j) = acc;
    }
  return out;
}

SymMat sym_matmul_nt(CircuitBuilder& b, const SymMat& a, const SymMat& c) {
  if (a.cols != c.cols) throw Error(ErrorCode::DimensionMismatch, "symbolic matmul_nt");
  SymMat out(a.rows, c.rows);
  for (int i = 0; i < a.rows; ++i)
    for (int j = 0; j < c.rows; ++j) {
      int acc = b.zero();
      for (int k = 0; k < a.cols; ++k) acc = b.add(acc, b.mul(a.at(i, k), c.at(j, k)));
      out.at(i, j) = acc;
    }
  return out;
}

void sym_add_into(CircuitBuilder& b, SymMat& acc, const SymMat& delta) {
  if (acc.rows != delta.rows || delta.cols > acc.cols)
    throw Error(ErrorCode::DimensionMismatch, "symbolic add");
  for (int i = 0; i < delta.rows; ++i)
    for (int j = 0; j < delta.cols; ++j)
      acc.at(i, j) = b.add(acc.at(i, j), delta.at(i, j));
}

namespace {

int sym_sigma(CircuitBuilder& b, Activation act, int x) {
  if (act != Activation::Sigmoid)
    throw Error(ErrorCode::UnsupportedMode,
                "only sigmoid activations are eAC-expressible");
  return b.div(b.one(), b.add(b.one(), b.exp(b.neg(x))));
}

// (row 1) * w for a weight with row-dim width+1.
std::vector<int> sym_affine(CircuitBuilder& b, const std::vector<int>& row,
                            const SymMat& w) {
  if (static_cast<int>(row.size()) + 1 != w.rows)
    throw Error(ErrorCode::DimensionMismatch, "symbolic MLP weight rows");
  std::vector<int> out(static_cast<size_t>(w.cols));
  for (int j = 0; j < w.cols; ++j) {
    int acc = b.zero();
    for (size_t i = 0; i < row.size(); ++i)
      acc = b.add(acc, b.mul(row[i], w.at(static_cast<int>(i), j)));
    acc = b.add(acc, w.at(w.rows - 1, j));  // bias times the appended 1
    out[static_cast<size_t>(j)] = acc;
  }
  return out;
}

SymMat sym_mlp_rows(CircuitBuilder& b, const SymMat& x, const SymMlp& mlp) {
  if (mlp.kind == MlpKind::Identity) return x;
  SymMat out;
  for (int i = 0; i < x.rows; ++i) {
    std::vector<int> row(static_cast<size_t>(x.cols));
    for (int j = 0; j < x.cols; ++j) row[static_cast<size_t>(j)] = x.at(i, j);
    std::vector<int> r;
    switch (mlp.kind) {
      case MlpKind::Standard: {
        std::vector<int> hidden = sym_affine(b, row, mlp.w1);
        for (int& h : hidden)
          h = mlp.emit_act ? mlp.emit_act(b, h) : sym_sigma(b, mlp.act, h);
        r = sym_affine(b, hidden, mlp.w2);
        break;
      }
      case MlpKind::Glu: {
        std::vector<int> gate = sym_affine(b, row, mlp.w0);
        std::vector<int> hidden = sym_affine(b, row, mlp.w1);
        for (size_t k = 0; k < gate.size(); ++k) {
          int s = mlp.emit_act ? mlp.emit_act(b, hidden[k])
                               : sym_sigma(b, mlp.act, hidden[k]);
          gate[k] = b.mul(gate[k], s);
        }
        r = sym_affine(b, gate, mlp.w2);
        break;
      }
      case MlpKind::Ratio: {
        r.resize(static_cast<size_t>(mlp.ratio_len));
        for (int j = 0; j < mlp.ratio_len; ++j)
          r[static_cast<size_t>(j)] =
              b.div(row[static_cast<size_t>(mlp.ratio_start + j)],
                    row[static_cast<size_t>(mlp.ratio_denom)]);
        break;
      }
      default:
        throw Error(ErrorCode::UnsupportedMode, "unknown MLP kind");
    }
    if (i == 0) out = SymMat(x.rows, static_cast<int>(r.size()));
    for (int j = 0; j < out.cols; ++j) out.at(i, j) = r[static_cast<size_t>(j)];
  }
  return out;
}

}  // namespace

SymMat sym_attention_head(CircuitBuilder& b, const SymMat& x, const SymHead& head,
                          AttentionMode mode) {
  if (mode == AttentionMode::Hardmax)
    throw Error(ErrorCode::HardmaxNotCompilable,
                "hardmax attention is discontinuous and has no eAC");
  SymMat q = sym_matmul(b, x, head.wq);
  SymMat k = sym_matmul(b, x, head.wk);
  SymMat v = sym_matmul(b, x, head.wv);
  SymMat logits = sym_matmul_nt(b, q, k);
  SymMat p(logits.rows, logits.cols);
  for (int i = 0; i < logits.rows; ++i) {
    for (int j = 0; j < logits.cols; ++j) p.at(i, j) = b.exp(logits.at(i, j));
    if (mode == AttentionMode::Softmax) {
      int total = b.zero();
      for (int j = 0; j < logits.cols; ++j) total = b.add(total, p.at(i, j));
      for (int j = 0; j < logits.cols; ++j) p.at(i, j) = b.div(p.at(i, j), total);
    }
  }
  return sym_matmul(b, p, v);
}

SymMat sym_forward(CircuitBuilder& b, const SymTransformer& spec, const SymMat& x) {
  if (x.rows != spec.N || x.cols != spec.d_in)
    throw Error(ErrorCode::DimensionMismatch, "input is not N x d_in");
  if (spec.d_in > spec.m)
    throw Error(ErrorCode::DimensionMismatch, "d_in exceeds embedding dimension");
  int head_dim = spec.m;
  if (spec.aggregation == Aggregation::Concat) {
    if (spec.H <= 0 || spec.m % spec.H != 0)
      throw Error(ErrorCode::IndivisibleHeads, "H must divide m for concatenation");
    head_dim = spec.m / spec.H;
  }
  SymMat cur = x;
  for (int l = 0; l < spec.L; ++l) {
    SymMat agg = sym_zero(b, spec.N, spec.m);
    for (int h = 0; h < spec.H; ++h) {
      SymMat out = sym_attention_head(b, cur, spec.heads[l][h], spec.mode);
      if (out.cols != head_dim)
        throw Error(ErrorCode::DimensionMismatch, "head output width mismatch");
      if (spec.aggregation == Aggregation::Sum) {
        sym_add_into(b, agg, out);
      } else {
        for (int i = 0; i < spec.N; ++i)
          for (int j = 0; j < head_dim; ++j) agg.at(i, h * head_dim + j) = out.at(i, j);
      }
    }
    sym_add_into(b, agg, cur);  // residual; zero-padded when cur is narrower
    cur = sym_mlp_rows(b, agg, spec.mlps[l]);
  }
  SymMat out = sym_mlp_rows(b, cur, spec.output_mlp);
  if (out.cols != spec.d_out)
    throw Error(ErrorCode::DimensionMismatch, "output width is not d_out");
  return out;
}

SymMlp sym_mlp_from(CircuitBuilder& b, const MlpSpec<double>& mlp) {
  SymMlp out;
  out.kind = mlp.kind;
  out.act = mlp.act;
  out.ratio_start = mlp.ratio_start;
  out.ratio_len = mlp.ratio_len;
  out.ratio_denom = mlp.ratio_denom;
  if (mlp.kind == MlpKind::Glu) out.w0 = sym_constants(b, mlp.w0);
  if (mlp.kind == MlpKind::Glu || mlp.kind == MlpKind::Standard) {
    out.w1 = sym_constants(b, mlp.w1);
    out.w2 = sym_constants(b, mlp.w2);
  }
  return out;
}

SymTransformer sym_from_spec(CircuitBuilder& b, const TransformerSpec<double>& spec) {
  SymTransformer sym;
  sym.N = spec.N;
  sym.m = spec.m;
  sym.d_in = spec.d_in;
  sym.d_out = spec.d_out;
  sym.L = spec.L;
  sym.H = spec.H;
  sym.aggregation = spec.aggregation;
  sym.mode = spec.mode;
  sym.heads.resize(static_cast<size_t>(spec.L));
  for (int l = 0; l < spec.L; ++l)
    for (int h = 0; h < spec.H; ++h)
      sym.heads[static_cast<size_t>(l)].push_back(
          {sym_constants(b, spec.heads[l][h].wq), sym_constants(b, spec.heads[l][h].wk),
           sym_constants(b, spec.heads[l][h].wv)});
  for (int l = 0; l < spec.L; ++l)
    sym.mlps.push_back(sym_mlp_from(b, spec.mlps[l]));
  sym.output_mlp = sym_mlp_from(b, spec.output_mlp);
  return sym;
}

CompiledTransformer compile_transformer_to_eac(const TransformerSpec<double>& spec) {
  CircuitBuilder b(spec.N * spec.d_in);
  SymMat x(spec.N, spec.d_in);
  for (int i = 0; i < spec.N; ++i)
    for (int j = 0; j < spec.d_in; ++j) x.at(i, j) = b.input(i * spec.d_in + j);
  SymTransformer sym = sym_from_spec(b, spec);
  SymMat y = sym_forward(b, sym, x);
  std::vector<int32_t> outs;
  outs.reserve(static_cast<size_t>(y.rows) * y.cols);
  for (int i = 0; i < y.rows; ++i)
    for (int j = 0; j < y.cols; ++j) outs.push_back(y.at(i, j));
  b.set_outputs(std::move(outs));
  CompiledTransformer result;
  result.out_rows = y.rows;
  result.out_cols = y.cols;
  result.circuit = b.take();
  return result;
}

}  // namespace eaclab
