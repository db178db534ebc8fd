#include "eaclab/ov.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace eaclab {

namespace {
size_t words_for(int d) { return static_cast<size_t>((d + 63) / 64); }
}  // namespace

OVInstance OVInstance::empty(int k, int d) {
  OVInstance ins;
  ins.k = k;
  ins.d = d;
  ins.sets.resize(static_cast<size_t>(k));
  return ins;
}

void OVInstance::push(int set, const std::vector<int>& coords) {
  if (static_cast<int>(coords.size()) != d)
    throw Error(ErrorCode::DimensionMismatch, "vector is not d coordinates");
  BitVec v(words_for(d), 0);
  for (int j = 0; j < d; ++j)
    if (coords[static_cast<size_t>(j)]) v[static_cast<size_t>(j / 64)] |= 1ull << (j % 64);
  sets[static_cast<size_t>(set)].push_back(std::move(v));
}

int OVInstance::coord(int set, int vec, int j) const {
  const BitVec& v = sets[static_cast<size_t>(set)][static_cast<size_t>(vec)];
  return static_cast<int>((v[static_cast<size_t>(j / 64)] >> (j % 64)) & 1ull);
}

bool brute_force_kov(const OVInstance& ins) {
  const size_t words = words_for(ins.d);
  // Odometer over one index per set; running AND prefixes allow early pruning.
  std::vector<size_t> idx(static_cast<size_t>(ins.k), 0);
  std::vector<BitVec> prefix(static_cast<size_t>(ins.k + 1), BitVec(words, ~0ull));
  if (ins.d % 64 != 0) prefix[0].back() = (1ull << (ins.d % 64)) - 1;
  for (auto& set : ins.sets)
    if (set.empty()) return false;

  int level = 0;
  while (true) {
    if (level == ins.k) {
      bool zero = true;
      for (uint64_t w : prefix[static_cast<size_t>(level)]) zero = zero && w == 0;
      if (zero) return true;
      --level;
      ++idx[static_cast<size_t>(level)];
    }
    while (idx[static_cast<size_t>(level)] >= ins.sets[static_cast<size_t>(level)].size()) {
      idx[static_cast<size_t>(level)] = 0;
      if (level == 0) return false;
      --level;
      ++idx[static_cast<size_t>(level)];
    }
    const BitVec& v =
        ins.sets[static_cast<size_t>(level)][idx[static_cast<size_t>(level)]];
    for (size_t w = 0; w < words; ++w)
      prefix[static_cast<size_t>(level + 1)][w] = prefix[static_cast<size_t>(level)][w] & v[w];
    ++level;
    if (level < ins.k) idx[static_cast<size_t>(level)] = 0;
  }
}

std::vector<OVInstance> split_unbalanced(const OVInstance& ins,
                                         std::span<const double> exponents) {
  if (static_cast<int>(exponents.size()) != ins.k - 1)
    throw Error(ErrorCode::DimensionMismatch, "need one exponent per set 2..k");
  const size_t n = ins.sets.empty() ? 0 : ins.sets[0].size();
  for (const auto& set : ins.sets)
    if (set.size() != n)
      throw Error(ErrorCode::DimensionMismatch, "splitter needs a balanced instance");
  std::vector<size_t> block(static_cast<size_t>(ins.k), n);  // set 0 kept whole
  for (int j = 1; j < ins.k; ++j) {
    double s = exponents[static_cast<size_t>(j - 1)];
    if (!(s > 0.0) || s > 1.0)
      throw Error(ErrorCode::BadExponent, "exponents must lie in (0, 1]");
    block[static_cast<size_t>(j)] =
        std::max<size_t>(1, static_cast<size_t>(std::floor(
                                std::pow(static_cast<double>(n), s) + 1e-9)));
  }
  std::vector<size_t> blocks_per(static_cast<size_t>(ins.k), 1);
  for (int j = 1; j < ins.k; ++j)
    blocks_per[static_cast<size_t>(j)] =
        n == 0 ? 1 : (n + block[static_cast<size_t>(j)] - 1) / block[static_cast<size_t>(j)];

  std::vector<OVInstance> out;
  std::vector<size_t> pick(static_cast<size_t>(ins.k), 0);
  while (true) {
    OVInstance sub = OVInstance::empty(ins.k, ins.d);
    sub.sets[0] = ins.sets[0];
    for (int j = 1; j < ins.k; ++j) {
      size_t from = pick[static_cast<size_t>(j)] * block[static_cast<size_t>(j)];
      size_t to = std::min(n, from + block[static_cast<size_t>(j)]);
      sub.sets[static_cast<size_t>(j)].assign(ins.sets[static_cast<size_t>(j)].begin() + static_cast<long>(from),
                                              ins.sets[static_cast<size_t>(j)].begin() + static_cast<long>(to));
    }
    out.push_back(std::move(sub));
    int j = ins.k - 1;
    while (j >= 1 && ++pick[static_cast<size_t>(j)] == blocks_per[static_cast<size_t>(j)])
      pick[static_cast<size_t>(j)] = 0, --j;
    if (j < 1) break;
  }
  return out;
}

void save_ov(std::ostream& os, const OVInstance& ins) {
  os << "kov " << ins.k << " " << ins.d << "\n";
  for (const auto& set : ins.sets) {
    os << "set " << set.size() << "\n";
    for (size_t v = 0; v < set.size(); ++v) {
      for (int j = 0; j < ins.d; ++j)
        os << ((set[v][static_cast<size_t>(j / 64)] >> (j % 64)) & 1ull);
      os << "\n";
    }
  }
}

void save_ov(const std::string& path, const OVInstance& ins) {
  std::ofstream f(path);
  if (!f) throw Error(ErrorCode::SyntaxError, "cannot open '" + path + "' for writing");
  save_ov(f, ins);
}

OVInstance load_ov(std::istream& is) {
  std::string tok;
  int k = 0, d = 0;
  if (!(is >> tok) || tok != "kov" || !(is >> k >> d) || k <= 0 || d <= 0)
    throw Error(ErrorCode::SyntaxError, "expected 'kov <k> <d>'");
  OVInstance ins = OVInstance::empty(k, d);
  for (int s = 0; s < k; ++s) {
    size_t size = 0;
    if (!(is >> tok) || tok != "set" || !(is >> size))
      throw Error(ErrorCode::SyntaxError, "expected 'set <size>'");
    for (size_t v = 0; v < size; ++v) {
      if (!(is >> tok) || static_cast<int>(tok.size()) != d)
        throw Error(ErrorCode::SyntaxError, "expected a line of d bits");
      std::vector<int> coords(static_cast<size_t>(d));
      for (int j = 0; j < d; ++j) {
        if (tok[static_cast<size_t>(j)] != '0' && tok[static_cast<size_t>(j)] != '1')
          throw Error(ErrorCode::SyntaxError, "vector entries must be 0 or 1");
        coords[static_cast<size_t>(j)] = tok[static_cast<size_t>(j)] - '0';
      }
      ins.push(s, coords);
    }
  }
  return ins;
}

OVInstance load_ov(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorCode::SyntaxError, "cannot open '" + path + "'");
  return load_ov(f);
}

}  // namespace eaclab
