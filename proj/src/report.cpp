#include "eaclab/report.hpp"

#include <ostream>
#include <sstream>

#include "eaclab/scalar.hpp"

namespace eaclab {

void RunReport::param(const std::string& key, const std::string& value) {
  params.emplace_back(key, value);
}
void RunReport::param(const std::string& key, long value) {
  params.emplace_back(key, std::to_string(value));
}
void RunReport::measure(const std::string& key, const std::string& value) {
  measures.emplace_back(key, value);
}
void RunReport::measure(const std::string& key, long value) {
  measures.emplace_back(key, std::to_string(value));
}
void RunReport::measure(const std::string& key, double value) {
  measures.emplace_back(key, shortest_decimal(value));
}
void RunReport::check(const std::string& name, bool pass, const std::string& detail) {
  checks.push_back({name, pass, detail});
}

bool RunReport::all_pass() const {
  for (const Check& c : checks)
    if (!c.pass) return false;
  return true;
}

void RunReport::write(std::ostream& os) const {
  os << "eaclab-report v1\n";
  os << "command = " << command << "\n";
  os << "seed = " << seed << "\n";
  for (const auto& [k, v] : params) os << k << " = " << v << "\n";
  for (const auto& [k, v] : measures) os << k << " = " << v << "\n";
  for (const Check& c : checks) {
    os << "check " << c.name << " = " << (c.pass ? "pass" : "FAIL");
    if (!c.detail.empty()) os << "  # " << c.detail;
    os << "\n";
  }
  os << "result = " << (all_pass() ? "pass" : "FAIL") << "\n";
  os << "wall_ms = " << wall_ms << "\n";
}

std::string RunReport::str() const {
  std::ostringstream os;
  write(os);
  return os.str();
}

}  // namespace eaclab
