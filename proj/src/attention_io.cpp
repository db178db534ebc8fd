#include "eaclab/attention_io.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

namespace eaclab {

namespace fs = std::filesystem;

void save_matrix(std::ostream& os, const Mat<double>& m) {
  os << "mat " << m.rows() << " " << m.cols() << "\n";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      os << (j ? " " : "") << shortest_decimal(m(i, j));
    os << "\n";
  }
}

void save_matrix(const std::string& path, const Mat<double>& m) {
  std::ofstream f(path);
  if (!f) throw Error(ErrorCode::SyntaxError, "cannot open '" + path + "' for writing");
  save_matrix(f, m);
}

Mat<double> load_matrix(std::istream& is) {
  auto next_token = [&is](std::string& tok) -> bool {
    while (is >> tok) {
      if (tok[0] == '#') {
        std::string rest;
        std::getline(is, rest);
        continue;
      }
      return true;
    }
    return false;
  };
  std::string tok;
  if (!next_token(tok) || tok != "mat")
    throw Error(ErrorCode::SyntaxError, "expected 'mat <rows> <cols>'");
  long rows = 0, cols = 0;
  if (!(is >> rows >> cols) || rows < 0 || cols < 0)
    throw Error(ErrorCode::SyntaxError, "bad matrix header");
  Mat<double> m(rows, cols);
  for (long i = 0; i < rows; ++i)
    for (long j = 0; j < cols; ++j) {
      if (!next_token(tok))
        throw Error(ErrorCode::SyntaxError, "matrix body ended early");
      m(i, j) = double_from_decimal(tok);
    }
  return m;
}

Mat<double> load_matrix(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorCode::SyntaxError, "cannot open '" + path + "'");
  return load_matrix(f);
}

namespace {

const char* agg_name(Aggregation a) { return a == Aggregation::Sum ? "sum" : "concat"; }
const char* mode_name(AttentionMode m) {
  switch (m) {
    case AttentionMode::Softmax: return "softmax";
    case AttentionMode::Hardmax: return "hardmax";
    case AttentionMode::Denormalized: return "denormalized";
  }
  return "?";
}
const char* act_name(Activation a) {
  return a == Activation::ReLU ? "relu" : a == Activation::Sigmoid ? "sigmoid" : "custom";
}

Activation act_from(const std::string& s) {
  if (s == "relu") return Activation::ReLU;
  if (s == "sigmoid") return Activation::Sigmoid;
  throw Error(ErrorCode::SyntaxError, "unknown activation '" + s + "'");
}

struct MatWriter {
  fs::path dir;
  std::string stem;
  int counter = 0;
  std::string write(const Mat<double>& m) {
    std::string name = stem + "_" + std::to_string(counter++) + ".mat";
    save_matrix((dir / name).string(), m);
    return name;
  }
};

void write_mlp(std::ostream& os, MatWriter& w, const std::string& tag,
               const MlpSpec<double>& mlp) {
  os << tag;
  switch (mlp.kind) {
    case MlpKind::Identity:
      os << " identity\n";
      return;
    case MlpKind::Standard:
      os << " standard " << act_name(mlp.act) << " " << w.write(mlp.w1) << " "
         << w.write(mlp.w2) << "\n";
      return;
    case MlpKind::Glu:
      os << " glu " << act_name(mlp.act) << " " << w.write(mlp.w0) << " "
         << w.write(mlp.w1) << " " << w.write(mlp.w2) << "\n";
      return;
    case MlpKind::Ratio:
      os << " ratio " << mlp.ratio_start << " " << mlp.ratio_len << " "
         << mlp.ratio_denom << "\n";
      return;
  }
  throw Error(ErrorCode::UnsupportedMode, "cannot serialize this MLP kind");
}

}  // namespace

void save_transformer(const std::string& manifest_path,
                      const TransformerSpec<double>& spec) {
  fs::path manifest(manifest_path);
  MatWriter writer{manifest.parent_path(), manifest.stem().string()};
  std::ofstream os(manifest_path);
  if (!os)
    throw Error(ErrorCode::SyntaxError, "cannot open '" + manifest_path + "' for writing");
  os << "transformer v1\n";
  os << "dims N " << spec.N << " m " << spec.m << " d_in " << spec.d_in << " d_out "
     << spec.d_out << " L " << spec.L << " H " << spec.H << "\n";
  os << "aggregation " << agg_name(spec.aggregation) << "\n";
  os << "attention " << mode_name(spec.mode) << "\n";
  for (int l = 0; l < spec.L; ++l)
    for (int h = 0; h < spec.H; ++h) {
      const auto& head = spec.heads[l][h];
      os << "head " << l << " " << h << " " << writer.write(head.wq) << " "
         << writer.write(head.wk) << " " << writer.write(head.wv) << "\n";
    }
  for (int l = 0; l < spec.L; ++l)
    write_mlp(os, writer, "mlp " + std::to_string(l), spec.mlps[l]);
  write_mlp(os, writer, "output_mlp", spec.output_mlp);
}

TransformerSpec<double> load_transformer(const std::string& manifest_path) {
  std::ifstream is(manifest_path);
  if (!is) throw Error(ErrorCode::SyntaxError, "cannot open '" + manifest_path + "'");
  fs::path dir = fs::path(manifest_path).parent_path();
  auto load_rel = [&dir](const std::string& name) { return load_matrix((dir / name).string()); };

  TransformerSpec<double> spec;
  std::string line;
  int line_no = 0;
  auto fail = [&line_no](const std::string& msg) -> Error {
    return Error(ErrorCode::SyntaxError, msg, -1, line_no);
  };
  auto parse_mlp = [&](std::istringstream& ss) {
    MlpSpec<double> mlp;
    std::string kind;
    if (!(ss >> kind)) throw fail("missing MLP kind");
    if (kind == "identity") {
      mlp.kind = MlpKind::Identity;
    } else if (kind == "standard" || kind == "glu") {
      std::string act, f0, f1, f2;
      if (kind == "glu") {
        if (!(ss >> act >> f0 >> f1 >> f2)) throw fail("bad glu MLP line");
        mlp.kind = MlpKind::Glu;
        mlp.w0 = load_rel(f0);
        mlp.w1 = load_rel(f1);
        mlp.w2 = load_rel(f2);
      } else {
        if (!(ss >> act >> f1 >> f2)) throw fail("bad standard MLP line");
        mlp.kind = MlpKind::Standard;
        mlp.w1 = load_rel(f1);
        mlp.w2 = load_rel(f2);
      }
      mlp.act = act_from(act);
    } else if (kind == "ratio") {
      mlp.kind = MlpKind::Ratio;
      if (!(ss >> mlp.ratio_start >> mlp.ratio_len >> mlp.ratio_denom))
        throw fail("bad ratio MLP line");
    } else {
      throw fail("unknown MLP kind '" + kind + "'");
    }
    return mlp;
  };

  bool saw_header = false;
  while (std::getline(is, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    std::string key;
    if (!(ss >> key)) continue;
    if (!saw_header) {
      std::string v;
      if (key != "transformer" || !(ss >> v) || v != "v1")
        throw fail("expected 'transformer v1'");
      saw_header = true;
      continue;
    }
    if (key == "dims") {
      std::string k;
      while (ss >> k) {
        int* dst = k == "N"     ? &spec.N
                   : k == "m"     ? &spec.m
                   : k == "d_in"  ? &spec.d_in
                   : k == "d_out" ? &spec.d_out
                   : k == "L"     ? &spec.L
                   : k == "H"     ? &spec.H
                                  : nullptr;
        if (!dst || !(ss >> *dst)) throw fail("bad dims entry '" + k + "'");
      }
      spec.heads.assign(spec.L, {});
      for (auto& layer : spec.heads) layer.resize(spec.H);
      spec.mlps.assign(spec.L, MlpSpec<double>::identity());
    } else if (key == "aggregation") {
      std::string v;
      ss >> v;
      if (v == "sum") spec.aggregation = Aggregation::Sum;
      else if (v == "concat") spec.aggregation = Aggregation::Concat;
      else throw fail("unknown aggregation '" + v + "'");
    } else if (key == "attention") {
      std::string v;
      ss >> v;
      if (v == "softmax") spec.mode = AttentionMode::Softmax;
      else if (v == "hardmax") spec.mode = AttentionMode::Hardmax;
      else if (v == "denormalized") spec.mode = AttentionMode::Denormalized;
      else throw fail("unknown attention mode '" + v + "'");
    } else if (key == "head") {
      int l = -1, h = -1;
      std::string q, k, v;
      if (!(ss >> l >> h >> q >> k >> v)) throw fail("bad head line");
      if (l < 0 || l >= spec.L || h < 0 || h >= spec.H)
        throw fail("head index out of range");
      spec.heads[l][h] = {load_rel(q), load_rel(k), load_rel(v)};
    } else if (key == "mlp") {
      int l = -1;
      if (!(ss >> l) || l < 0 || l >= spec.L) throw fail("bad mlp layer index");
      spec.mlps[l] = parse_mlp(ss);
    } else if (key == "output_mlp") {
      spec.output_mlp = parse_mlp(ss);
    } else {
      throw fail("unknown manifest key '" + key + "'");
    }
  }
  if (!saw_header) throw fail("missing 'transformer v1' header");
  return spec;
}

}  // namespace eaclab
