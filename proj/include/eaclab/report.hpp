#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace eaclab {

// Structured run report with a stable key order, suitable for diffing.
// Rerunning a command with the recorded seed reproduces every measured
// quantity (wall_ms excepted).
struct RunReport {
  std::string command;
  uint64_t seed = 0;
  std::vector<std::pair<std::string, std::string>> params;
  std::vector<std::pair<std::string, std::string>> measures;
  struct Check {
    std::string name;
    bool pass = false;
    std::string detail;
  };
  std::vector<Check> checks;
  long wall_ms = 0;

  void param(const std::string& key, const std::string& value);
  void param(const std::string& key, long value);
  void measure(const std::string& key, const std::string& value);
  void measure(const std::string& key, long value);
  void measure(const std::string& key, double value);
  void check(const std::string& name, bool pass, const std::string& detail = "");

  bool all_pass() const;
  void write(std::ostream& os) const;
  std::string str() const;
};

}  // namespace eaclab
