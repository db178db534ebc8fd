#pragma once

#include <iosfwd>
#include <string>

#include "eaclab/attention.hpp"

namespace eaclab {

// Matrix format: `mat <rows> <cols>` then rows of whitespace-separated
// decimals; `#` comments ignored. Doubles round-trip bit-exactly.
void save_matrix(std::ostream& os, const Mat<double>& m);
void save_matrix(const std::string& path, const Mat<double>& m);
Mat<double> load_matrix(std::istream& is);
Mat<double> load_matrix(const std::string& path);

// TransformerSpec manifest: dimensions, aggregation, attention mode, and
// per-head weight-file references (paths relative to the manifest).
void save_transformer(const std::string& manifest_path,
                      const TransformerSpec<double>& spec);
TransformerSpec<double> load_transformer(const std::string& manifest_path);

}  // namespace eaclab
