#include "eaclab/circuit_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "eaclab/scalar.hpp"

namespace eaclab {

void serialize(std::ostream& os, const Circuit& c) {
  os << "eac v1 inputs " << c.input_arity << "\n";
  for (size_t i = 0; i < c.gates.size(); ++i) {
    const Gate& g = c.gates[i];
    os << "g" << i << " = " << gate_op_name(g.op);
    switch (g.op) {
      case GateOp::Const: os << " " << g.literal; break;
      case GateOp::Input: os << " " << g.a; break;
      case GateOp::Exp:
      case GateOp::Ln: os << " g" << g.a; break;
      default: os << " g" << g.a << " g" << g.b; break;
    }
    os << "\n";
  }
  os << "outputs";
  for (int32_t out : c.outputs) os << " g" << out;
  os << "\n";
}

std::string serialize(const Circuit& c) {
  std::ostringstream os;
  serialize(os, c);
  return os.str();
}

namespace {

std::vector<std::string> tokenize(const std::string& line) {
  std::vector<std::string> toks;
  std::string cur;
  for (char ch : line) {
    if (ch == '#') break;
    if (std::isspace(static_cast<unsigned char>(ch))) {
      if (!cur.empty()) toks.push_back(std::move(cur)), cur.clear();
    } else {
      cur += ch;
    }
  }
  if (!cur.empty()) toks.push_back(std::move(cur));
  return toks;
}

long parse_int(const std::string& tok, int line) {
  long v = 0;
  auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || p != tok.data() + tok.size())
    throw Error(ErrorCode::SyntaxError, "expected integer, got '" + tok + "'", -1, line);
  return v;
}

long parse_gate_id(const std::string& tok, int line) {
  if (tok.size() < 2 || tok[0] != 'g')
    throw Error(ErrorCode::SyntaxError, "expected gate id, got '" + tok + "'", -1, line);
  return parse_int(tok.substr(1), line);
}

}  // namespace

Circuit parse_circuit(std::istream& is) {
  Circuit c;
  std::unordered_map<long, int32_t> id_to_index;
  long last_id = -1;
  bool saw_header = false, saw_outputs = false;
  std::string line;
  int line_no = 0;

  auto resolve = [&](const std::string& tok, int ln) -> int32_t {
    long id = parse_gate_id(tok, ln);
    auto it = id_to_index.find(id);
    if (it == id_to_index.end())
      throw Error(ErrorCode::SyntaxError, "reference to unknown gate '" + tok + "'",
                  -1, ln);
    return it->second;
  };

  while (std::getline(is, line)) {
    ++line_no;
    auto toks = tokenize(line);
    if (toks.empty()) continue;
    if (!saw_header) {
      if (toks.size() != 4 || toks[0] != "eac" || toks[1] != "v1" || toks[2] != "inputs")
        throw Error(ErrorCode::SyntaxError, "expected 'eac v1 inputs <n>'", -1, line_no);
      c.input_arity = static_cast<int>(parse_int(toks[3], line_no));
      if (c.input_arity < 0)
        throw Error(ErrorCode::SyntaxError, "negative input arity", -1, line_no);
      saw_header = true;
      continue;
    }
    if (toks[0] == "outputs") {
      if (saw_outputs)
        throw Error(ErrorCode::SyntaxError, "duplicate outputs line", -1, line_no);
      for (size_t i = 1; i < toks.size(); ++i)
        c.outputs.push_back(resolve(toks[i], line_no));
      saw_outputs = true;
      continue;
    }
    if (saw_outputs)
      throw Error(ErrorCode::SyntaxError, "gate after outputs line", -1, line_no);
    if (toks.size() < 3 || toks[1] != "=")
      throw Error(ErrorCode::SyntaxError, "expected 'g<k> = <op> ...'", -1, line_no);
    long id = parse_gate_id(toks[0], line_no);
    if (id_to_index.count(id))
      throw Error(ErrorCode::DuplicateGateId, "gate id '" + toks[0] + "' already defined",
                  -1, line_no);
    if (id <= last_id)
      throw Error(ErrorCode::SyntaxError, "gate ids must be strictly increasing", -1,
                  line_no);
    const std::string& op = toks[2];
    Gate g;
    auto need = [&](size_t n) {
      if (toks.size() != 3 + n)
        throw Error(ErrorCode::SyntaxError,
                    "op '" + op + "' takes " + std::to_string(n) + " argument(s)", -1,
                    line_no);
    };
    if (op == "const") {
      need(1);
      if (!is_decimal_literal(toks[3]))
        throw Error(ErrorCode::SyntaxError, "bad constant literal '" + toks[3] + "'",
                    -1, line_no);
      g = Gate::constant(toks[3]);
    } else if (op == "input") {
      need(1);
      g = Gate::input(static_cast<int32_t>(parse_int(toks[3], line_no)));
    } else if (op == "exp" || op == "ln") {
      need(1);
      int32_t a = resolve(toks[3], line_no);
      g = (op == "exp") ? Gate::exp(a) : Gate::ln(a);
    } else if (op == "add" || op == "sub" || op == "mul" || op == "div") {
      need(2);
      int32_t a = resolve(toks[3], line_no);
      int32_t b = resolve(toks[4], line_no);
      if (op == "add") g = Gate::add(a, b);
      else if (op == "sub") g = Gate::sub(a, b);
      else if (op == "mul") g = Gate::mul(a, b);
      else g = Gate::div(a, b);
    } else {
      throw Error(ErrorCode::SyntaxError, "unknown op '" + op + "'", -1, line_no);
    }
    id_to_index[id] = static_cast<int32_t>(c.gates.size());
    c.gates.push_back(std::move(g));
    last_id = id;
  }
  if (!saw_header)
    throw Error(ErrorCode::SyntaxError, "missing 'eac v1 inputs <n>' header", -1,
                line_no);
  if (!saw_outputs)
    throw Error(ErrorCode::SyntaxError, "missing outputs line", -1, line_no);
  return c;
}

Circuit parse_circuit(const std::string& text) {
  std::istringstream is(text);
  return parse_circuit(is);
}

Circuit load_circuit(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorCode::SyntaxError, "cannot open '" + path + "'");
  return parse_circuit(f);
}

void save_circuit(const std::string& path, const Circuit& c) {
  std::ofstream f(path);
  if (!f) throw Error(ErrorCode::SyntaxError, "cannot open '" + path + "' for writing");
  serialize(f, c);
}

}  // namespace eaclab
