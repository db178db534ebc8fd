#pragma once

#include <iosfwd>
#include <string>

#include "eaclab/circuit.hpp"

namespace eaclab {

// Text format, one item per line:
//   eac v1 inputs <n>
//   g<k> = const <decimal>
//   g<k> = input <i>
//   g<k> = <op> <ref> [<ref>]      op in {add, sub, mul, div, exp, ln}
//   outputs g<a> g<b> ...
// Tokens are whitespace separated; `#` starts a comment. Gate ids must be
// strictly increasing; serialization always emits dense ids g0, g1, ...
std::string serialize(const Circuit& c);
void serialize(std::ostream& os, const Circuit& c);

Circuit parse_circuit(const std::string& text);
Circuit parse_circuit(std::istream& is);

Circuit load_circuit(const std::string& path);
void save_circuit(const std::string& path, const Circuit& c);

}  // namespace eaclab
