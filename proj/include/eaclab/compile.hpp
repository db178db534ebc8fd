#pragma once

#include "eaclab/attention.hpp"
#include "eaclab/builder.hpp"
#include "eaclab/circuit.hpp"

namespace eaclab {

// Matrix of gate handles inside a CircuitBuilder.
struct SymMat {
  int rows = 0, cols = 0;
  std::vector<int> g;

  SymMat() = default;
  SymMat(int r, int c, int fill = -1) : rows(r), cols(c), g(static_cast<size_t>(r) * c, fill) {}
  int& at(int r, int c) { return g[static_cast<size_t>(r) * cols + c]; }
  int at(int r, int c) const { return g[static_cast<size_t>(r) * cols + c]; }
};

SymMat sym_constants(CircuitBuilder& b, const Mat<double>& m);
SymMat sym_zero(CircuitBuilder& b, int rows, int cols);
SymMat sym_matmul(CircuitBuilder& b, const SymMat& a, const SymMat& c);
SymMat sym_matmul_nt(CircuitBuilder& b, const SymMat& a, const SymMat& c);  // a * c^T
void sym_add_into(CircuitBuilder& b, SymMat& acc, const SymMat& delta);

struct SymHead {
  SymMat wq, wk, wv;
};

struct SymMlp {
  MlpKind kind = MlpKind::Identity;
  SymMat w0, w1, w2;
  Activation act = Activation::ReLU;
  int ratio_start = 0, ratio_len = 0, ratio_denom = 0;
  // Overrides the built-in activation lowering when set.
  std::function<int(CircuitBuilder&, int)> emit_act;
};

struct SymTransformer {
  int N = 0, m = 0, d_in = 0, d_out = 0, L = 0, H = 0;
  Aggregation aggregation = Aggregation::Sum;
  AttentionMode mode = AttentionMode::Softmax;
  std::vector<std::vector<SymHead>> heads;
  std::vector<SymMlp> mlps;
  SymMlp output_mlp;
};

// Gate-level mirror of transformer_forward. Softmax rows are emitted with the
// unshifted formula (exp gates, a row-sum chain and one division per entry);
// Hardmax is rejected as discontinuous.
SymMat sym_attention_head(CircuitBuilder& b, const SymMat& x, const SymHead& head,
                          AttentionMode mode);
SymMat sym_forward(CircuitBuilder& b, const SymTransformer& spec, const SymMat& x);

SymMlp sym_mlp_from(CircuitBuilder& b, const MlpSpec<double>& mlp);
SymTransformer sym_from_spec(CircuitBuilder& b, const TransformerSpec<double>& spec);

struct CompiledTransformer {
  Circuit circuit;
  int out_rows = 0, out_cols = 0;  // outputs are row-major T(X) entries
};

// Circuit inputs are the N x d_in entries of X, row-major; weights are baked
// in as constants.
CompiledTransformer compile_transformer_to_eac(const TransformerSpec<double>& spec);

}  // namespace eaclab
