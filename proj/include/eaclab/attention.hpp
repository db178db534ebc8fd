#pragma once

#include <Eigen/Dense>
#include <boost/multiprecision/eigen.hpp>
#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include "eaclab/circuit.hpp"
#include "eaclab/scalar.hpp"

namespace eaclab {

template <class S>
using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
template <class S>
using Vec = Eigen::Matrix<S, Eigen::Dynamic, 1>;

enum class Aggregation { Sum, Concat };
enum class AttentionMode { Softmax, Hardmax, Denormalized };
enum class Activation { ReLU, Sigmoid, Custom };
enum class MlpKind { Identity, Glu, Standard, Ratio };

// Row-wise linear embeddings Q(X) = X Wq etc. All three weights share the
// input dimension (rows) and embedding dimension (cols).
template <class S>
struct AttentionHeadSpec {
  Mat<S> wq, wk, wv;
};

template <class S>
struct MlpSpec {
  MlpKind kind = MlpKind::Identity;
  Mat<S> w0, w1, w2;  // bias handled by an appended 1 (weights carry m+1 rows)
  Activation act = Activation::ReLU;
  std::function<S(const S&)> custom;
  // Ratio kind: v -> (v[start + j] / v[denom]) for j in [0, len)
  int ratio_start = 0, ratio_len = 0, ratio_denom = 0;

  static MlpSpec identity() { return {}; }
};

template <class S>
struct TransformerSpec {
  int N = 0, m = 0, d_in = 0, d_out = 0, L = 0, H = 0;
  Aggregation aggregation = Aggregation::Sum;
  AttentionMode mode = AttentionMode::Softmax;
  std::vector<std::vector<AttentionHeadSpec<S>>> heads;  // [L][H]
  std::vector<MlpSpec<S>> mlps;                          // [L]
  MlpSpec<S> output_mlp;
};

template <class S>
S sigma_apply(Activation act, const std::function<S(const S&)>& custom, const S& x) {
  switch (act) {
    case Activation::ReLU:
      return x > S(0) ? x : S(0);
    case Activation::Sigmoid:
      if constexpr (ScalarOps<S>::has_exp_ln) {
        return S(1) / (S(1) + ScalarOps<S>::exp(S(0) - x));
      } else {
        throw Error(ErrorCode::UnsupportedMode, "sigmoid needs exp");
      }
    case Activation::Custom:
      return custom(x);
  }
  throw Error(ErrorCode::UnsupportedMode, "unknown activation");
}

// softmax(v)_i = exp(v_i - max v) / sum_j exp(v_j - max v); the max shift is
// mathematically a no-op and keeps scaled logits finite in Float64.
template <class S>
Vec<S> softmax_row(const Vec<S>& v) {
  static_assert(ScalarOps<S>::has_exp_ln, "softmax needs a scalar with exp");
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (!ScalarOps<S>::is_finite(v[i]))
      throw Error(ErrorCode::NonFiniteInput, "non-finite softmax input");
  S peak = v.maxCoeff();
  Vec<S> e(v.size());
  S total(0);
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    e[i] = ScalarOps<S>::exp(v[i] - peak);
    total += e[i];
  }
  return e / total;
}

template <class S>
S default_tie_eps(const Vec<S>& v) {
  if constexpr (ScalarOps<S>::has_exp_ln) {
    // 1e-9 * max(1, |max v|) in float modes.
    S peak = ScalarOps<S>::abs(v.maxCoeff());
    S one(1);
    return ScalarOps<S>::from_double(1e-9) * (peak > one ? peak : one);
  } else {
    return S(0);  // exact ties in Rational mode
  }
}

// Uniform mass over entries within tie_eps of the row maximum.
template <class S>
Vec<S> hardmax_row(const Vec<S>& v, const S& tie_eps) {
  S peak = v.maxCoeff();
  int count = 0;
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (v[i] >= peak - tie_eps) ++count;
  Vec<S> p = Vec<S>::Zero(v.size());
  S mass = S(1) / S(count);
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (v[i] >= peak - tie_eps) p[i] = mass;
  return p;
}

template <class S>
Vec<S> hardmax_row(const Vec<S>& v) {
  return hardmax_row(v, default_tie_eps(v));
}

template <class S>
Mat<S> attention_head(const Mat<S>& x, const AttentionHeadSpec<S>& head,
                      AttentionMode mode) {
  if (x.cols() != head.wq.rows() || head.wq.rows() != head.wk.rows() ||
      head.wq.rows() != head.wv.rows() || head.wq.cols() != head.wk.cols() ||
      head.wq.cols() != head.wv.cols())
    throw Error(ErrorCode::DimensionMismatch, "attention weight shapes disagree");
  Mat<S> q = x * head.wq;
  Mat<S> k = x * head.wk;
  Mat<S> v = x * head.wv;
  Mat<S> logits = q * k.transpose();
  const Eigen::Index n = logits.rows();
  Mat<S> p(n, logits.cols());
  for (Eigen::Index i = 0; i < n; ++i) {
    Vec<S> row = logits.row(i).transpose();
    switch (mode) {
      case AttentionMode::Softmax:
        if constexpr (ScalarOps<S>::has_exp_ln) {
          p.row(i) = softmax_row<S>(row).transpose();
        } else {
          throw Error(ErrorCode::UnsupportedMode, "softmax needs exp");
        }
        break;
      case AttentionMode::Hardmax:
        p.row(i) = hardmax_row<S>(row).transpose();
        break;
      case AttentionMode::Denormalized:
        if constexpr (ScalarOps<S>::has_exp_ln) {
          for (Eigen::Index j = 0; j < row.size(); ++j) {
            S e = ScalarOps<S>::exp(row[j]);
            if (!ScalarOps<S>::is_finite(e))
              throw Error(ErrorCode::Overflow,
                          "denormalized attention overflow; use BigFloat");
            p(i, j) = e;
          }
        } else {
          throw Error(ErrorCode::UnsupportedMode, "denormalized attention needs exp");
        }
        break;
    }
  }
  return p * v;
}

template <class S>
Vec<S> mlp_apply(const Vec<S>& row, const MlpSpec<S>& mlp) {
  auto affine = [](const Vec<S>& in, const Mat<S>& w) -> Vec<S> {
    if (in.size() + 1 != w.rows())
      throw Error(ErrorCode::DimensionMismatch, "MLP weight rows != width + 1");
    Vec<S> aug(in.size() + 1);
    aug.head(in.size()) = in;
    aug[in.size()] = S(1);
    return (aug.transpose() * w).transpose();
  };
  switch (mlp.kind) {
    case MlpKind::Identity:
      return row;
    case MlpKind::Standard: {
      Vec<S> hidden = affine(row, mlp.w1);
      for (Eigen::Index i = 0; i < hidden.size(); ++i)
        hidden[i] = sigma_apply<S>(mlp.act, mlp.custom, hidden[i]);
      return affine(hidden, mlp.w2);
    }
    case MlpKind::Glu: {
      Vec<S> gate = affine(row, mlp.w0);
      Vec<S> hidden = affine(row, mlp.w1);
      for (Eigen::Index i = 0; i < hidden.size(); ++i)
        gate[i] = gate[i] * sigma_apply<S>(mlp.act, mlp.custom, hidden[i]);
      return affine(gate, mlp.w2);
    }
    case MlpKind::Ratio: {
      Vec<S> out(mlp.ratio_len);
      const S& den = row[mlp.ratio_denom];
      if (den == S(0))
        throw Error(ErrorCode::DivisionByZero, "ratio MLP zero denominator");
      for (int j = 0; j < mlp.ratio_len; ++j) out[j] = row[mlp.ratio_start + j] / den;
      return out;
    }
  }
  throw Error(ErrorCode::UnsupportedMode, "unknown MLP kind");
}

template <class S>
Mat<S> mlp_apply_rows(const Mat<S>& x, const MlpSpec<S>& mlp) {
  if (mlp.kind == MlpKind::Identity) return x;
  Mat<S> out;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    Vec<S> r = mlp_apply<S>(x.row(i).transpose(), mlp);
    if (i == 0) out.resize(x.rows(), r.size());
    out.row(i) = r.transpose();
  }
  return out;
}

// X^(l) = Psi_l(X^(l-1) + sum_h f_{l,h}(X^(l-1))), then Psi_O at the end.
// The first layer may be rectangular (d_in <= m); its residual zero-pads X.
template <class S>
Mat<S> transformer_forward(const Mat<S>& x, const TransformerSpec<S>& spec) {
  if (x.rows() != spec.N || x.cols() != spec.d_in)
    throw Error(ErrorCode::DimensionMismatch, "input is not N x d_in");
  if (spec.d_in > spec.m)
    throw Error(ErrorCode::DimensionMismatch, "d_in exceeds embedding dimension");
  if (static_cast<int>(spec.heads.size()) != spec.L ||
      static_cast<int>(spec.mlps.size()) != spec.L)
    throw Error(ErrorCode::DimensionMismatch, "expected L head rows and L MLPs");
  int head_dim = spec.m;
  if (spec.aggregation == Aggregation::Concat) {
    if (spec.H <= 0 || spec.m % spec.H != 0)
      throw Error(ErrorCode::IndivisibleHeads, "H must divide m for concatenation");
    head_dim = spec.m / spec.H;
  }
  Mat<S> cur = x;
  for (int l = 0; l < spec.L; ++l) {
    if (static_cast<int>(spec.heads[l].size()) != spec.H)
      throw Error(ErrorCode::DimensionMismatch, "layer has wrong head count");
    Mat<S> agg = Mat<S>::Zero(spec.N, spec.m);
    for (int h = 0; h < spec.H; ++h) {
      Mat<S> out = attention_head<S>(cur, spec.heads[l][h], spec.mode);
      if (out.cols() != head_dim)
        throw Error(ErrorCode::DimensionMismatch, "head output width mismatch");
      if (spec.aggregation == Aggregation::Sum)
        agg += out;
      else
        agg.middleCols(h * head_dim, head_dim) = out;
    }
    agg.leftCols(cur.cols()) += cur;  // residual (zero-padded on the first layer)
    cur = mlp_apply_rows<S>(agg, spec.mlps[l]);
    if (cur.cols() != spec.m)
      throw Error(ErrorCode::DimensionMismatch, "layer MLP changed the width");
  }
  Mat<S> out = mlp_apply_rows<S>(cur, spec.output_mlp);
  if (out.cols() != spec.d_out)
    throw Error(ErrorCode::DimensionMismatch, "output width is not d_out");
  return out;
}

// Lemma-style hardmax -> softmax scaling: multiplies every query embedding by
// c = ceil(ln(3 N / target_error)). Valid when the caller certifies the gap
// hypothesis (value entries in {0,1,2}; non-argmax logits at least 1 below the
// row maximum); the resulting softmax outputs are within target_error of the
// hardmax outputs entrywise.
template <class S>
std::pair<TransformerSpec<S>, int> harden_to_softmax(TransformerSpec<S> spec,
                                                     double target_error,
                                                     bool gap_certified) {
  if (!gap_certified)
    throw Error(ErrorCode::GapHypothesisUnverifiable,
                "caller must certify the logit gap and value range");
  if (!(target_error > 0))
    throw Error(ErrorCode::BadExponent, "target error must be positive");
  int c = static_cast<int>(std::ceil(std::log(3.0 * spec.N / target_error)));
  if (c < 1) c = 1;
  for (auto& layer : spec.heads)
    for (auto& head : layer) head.wq *= S(c);
  spec.mode = AttentionMode::Softmax;
  return {std::move(spec), c};
}

template <class S>
MlpSpec<S> glu_identity(int m, Activation act, const S& c,
                        std::function<S(const S&)> custom = {}) {
  S z = sigma_apply<S>(act, custom, c);
  if (z == S(0))
    throw Error(ErrorCode::SigmaZeroAtC, "activation vanishes at the gate point");
  MlpSpec<S> mlp;
  mlp.kind = MlpKind::Glu;
  mlp.act = act;
  mlp.custom = std::move(custom);
  mlp.w0 = Mat<S>::Zero(m + 1, m);
  mlp.w1 = Mat<S>::Zero(m + 1, m);
  mlp.w2 = Mat<S>::Zero(m + 1, m);
  for (int i = 0; i < m; ++i) {
    mlp.w0(i, i) = S(1) / z;
    mlp.w1(m, i) = c;
    mlp.w2(i, i) = S(1);
  }
  return mlp;
}

// f(x) - f(-x) = x for f = ReLU.
template <class S>
MlpSpec<S> relu_identity(int m) {
  MlpSpec<S> mlp;
  mlp.kind = MlpKind::Standard;
  mlp.act = Activation::ReLU;
  mlp.w1 = Mat<S>::Zero(m + 1, 2 * m);
  mlp.w2 = Mat<S>::Zero(2 * m + 1, m);
  for (int i = 0; i < m; ++i) {
    mlp.w1(i, i) = S(1);
    mlp.w1(i, m + i) = S(-1);
    mlp.w2(i, i) = S(1);
    mlp.w2(m + i, i) = S(-1);
  }
  return mlp;
}

// Summation -> concatenation conversion. The converted transformer has
// embedding dimension m * H; an extraction map recovers the original output:
// the per-block fold when the source has no MLPs, the first-block projection
// otherwise.
template <class S>
struct ConcatConversion {
  TransformerSpec<S> spec;
  bool fold = true;  // otherwise: project the first block
  int m_small = 0, blocks = 0;

  Mat<S> pad_input(const Mat<S>& x) const {
    Mat<S> p = Mat<S>::Zero(x.rows(), m_small * blocks);
    p.leftCols(x.cols()) = x;
    return p;
  }
  Mat<S> extract(const Mat<S>& y) const {
    Mat<S> out = y.leftCols(m_small);
    if (fold)
      for (int b = 1; b < blocks; ++b) out += y.middleCols(b * m_small, m_small);
    return out;
  }
};

template <class S>
ConcatConversion<S> sum_to_concat(const TransformerSpec<S>& spec) {
  if (spec.aggregation != Aggregation::Sum)
    throw Error(ErrorCode::UnsupportedMode, "source must use sum aggregation");
  if (spec.d_in != spec.m)
    throw Error(ErrorCode::DimensionMismatch, "conversion expects d_in == m");
  if (spec.output_mlp.kind != MlpKind::Identity)
    throw Error(ErrorCode::UnsupportedMode, "conversion expects identity output MLP");
  const int ms = spec.m, H = spec.H, mp = ms * H;
  bool no_mlp = true;
  for (const auto& mlp : spec.mlps) no_mlp = no_mlp && mlp.kind == MlpKind::Identity;

  // Row map applied before each source embedding: sum of blocks (no-MLP case)
  // or projection onto the first block.
  Mat<S> reduce = Mat<S>::Zero(mp, ms);
  for (int b = 0; b < (no_mlp ? H : 1); ++b)
    for (int i = 0; i < ms; ++i) reduce(b * ms + i, i) = S(1);

  ConcatConversion<S> conv;
  conv.fold = no_mlp;
  conv.m_small = ms;
  conv.blocks = H;
  TransformerSpec<S>& out = conv.spec;
  out.N = spec.N;
  out.m = mp;
  out.d_in = mp;
  out.d_out = mp;
  out.L = spec.L;
  out.H = H;
  out.aggregation = Aggregation::Concat;
  out.mode = spec.mode;
  out.heads.resize(spec.L);
  out.mlps.resize(spec.L);
  for (int l = 0; l < spec.L; ++l) {
    for (int h = 0; h < H; ++h) {
      AttentionHeadSpec<S> head;
      head.wq = reduce * spec.heads[l][h].wq;
      head.wk = reduce * spec.heads[l][h].wk;
      head.wv = reduce * spec.heads[l][h].wv;
      out.heads[l].push_back(std::move(head));
    }
    if (no_mlp) {
      out.mlps[l] = MlpSpec<S>::identity();
      continue;
    }
    const MlpSpec<S>& src = spec.mlps[l];
    MlpSpec<S> wrapped;
    wrapped.kind = src.kind;
    wrapped.act = src.act;
    wrapped.custom = src.custom;
    Mat<S> fold_aug = Mat<S>::Zero(mp + 1, ms + 1);  // (x 1) -> (sum-blocks(x) 1)
    for (int b = 0; b < H; ++b)
      for (int i = 0; i < ms; ++i) fold_aug(b * ms + i, i) = S(1);
    fold_aug(mp, ms) = S(1);
    auto pad_cols = [&](const Mat<S>& w) {
      Mat<S> p = Mat<S>::Zero(w.rows(), mp);
      p.leftCols(w.cols()) = w;
      return p;
    };
    if (src.kind == MlpKind::Standard) {
      wrapped.w1 = fold_aug * src.w1;
      wrapped.w2 = pad_cols(src.w2);
    } else if (src.kind == MlpKind::Glu) {
      wrapped.w0 = fold_aug * src.w0;
      wrapped.w1 = fold_aug * src.w1;
      wrapped.w2 = pad_cols(src.w2);
    } else {
      throw Error(ErrorCode::UnsupportedMode, "cannot wrap this MLP kind");
    }
    out.mlps[l] = std::move(wrapped);
  }
  out.output_mlp = MlpSpec<S>::identity();
  return conv;
}

// One-layer softmax transformer reproducing a denormalized head on the first
// N rows. The input gains a sentinel token and an indicator column so the
// augmented embeddings stay linear; the output MLP divides the value block by
// the recovered normalization factor.
template <class S>
struct DenormWrapper {
  TransformerSpec<S> spec;
  int n = 0, d_in = 0, m_head = 0;

  Mat<S> pad_input(const Mat<S>& x) const {
    Mat<S> p = Mat<S>::Zero(n + 1, d_in + 1);
    p.topLeftCorner(n, d_in) = x;
    p(n, d_in) = S(1);
    return p;
  }
};

template <class S>
DenormWrapper<S> denormalized_wrapper(const AttentionHeadSpec<S>& head, int n,
                                      int d_in) {
  if (head.wq.rows() != d_in)
    throw Error(ErrorCode::DimensionMismatch, "head weights are not d_in rows");
  const int mh = static_cast<int>(head.wq.cols());
  const int mp = mh + d_in + 1;
  DenormWrapper<S> w;
  w.n = n;
  w.d_in = d_in;
  w.m_head = mh;
  TransformerSpec<S>& spec = w.spec;
  spec.N = n + 1;
  spec.m = mp;
  spec.d_in = d_in + 1;
  spec.d_out = mh;
  spec.L = 1;
  spec.H = 1;
  spec.aggregation = Aggregation::Sum;
  spec.mode = AttentionMode::Softmax;
  AttentionHeadSpec<S> aug;
  aug.wq = Mat<S>::Zero(d_in + 1, mp);
  aug.wk = Mat<S>::Zero(d_in + 1, mp);
  aug.wv = Mat<S>::Zero(d_in + 1, mp);
  aug.wq.topLeftCorner(d_in, mh) = head.wq;
  aug.wk.topLeftCorner(d_in, mh) = head.wk;
  aug.wv.block(0, d_in, d_in, mh) = head.wv;
  aug.wv(d_in, mp - 1) = S(1);
  spec.heads.push_back({std::move(aug)});
  spec.mlps.push_back(MlpSpec<S>::identity());
  spec.output_mlp.kind = MlpKind::Ratio;
  spec.output_mlp.ratio_start = d_in;
  spec.output_mlp.ratio_len = mh;
  spec.output_mlp.ratio_denom = d_in + mh;
  return w;
}

}  // namespace eaclab
