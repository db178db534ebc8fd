#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "eaclab/circuit.hpp"

namespace eaclab {

// Vectors are stored as packed bit words; coordinate j lives in
// word j / 64, bit j % 64.
using BitVec = std::vector<uint64_t>;

struct OVInstance {
  int k = 0;
  int d = 0;
  std::vector<std::vector<BitVec>> sets;  // k sets of 0/1 vectors

  static OVInstance empty(int k, int d);
  void push(int set, const std::vector<int>& coords);  // coords of length d, 0/1
  int coord(int set, int vec, int j) const;
};

// True iff some k-tuple (one vector per set) has coordinatewise product zero
// in every coordinate. The trivial full enumeration.
bool brute_force_kov(const OVInstance& instance);

// Splits a balanced instance (all set sizes equal n) into the Cartesian
// product of block choices: set j > 1 is cut into blocks of ~n^{s_j} vectors.
// The OR of sub-instance answers equals the original answer.
std::vector<OVInstance> split_unbalanced(const OVInstance& instance,
                                         std::span<const double> exponents);

// File format: `kov <k> <d>`, then k blocks of `set <size>` followed by that
// many lines of d characters in {0,1}.
void save_ov(std::ostream& os, const OVInstance& instance);
void save_ov(const std::string& path, const OVInstance& instance);
OVInstance load_ov(std::istream& is);
OVInstance load_ov(const std::string& path);

}  // namespace eaclab
