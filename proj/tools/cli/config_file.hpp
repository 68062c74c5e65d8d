#pragma once

#include <cstddef>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace triplesum::cli {

// Bad command lines and unreadable configuration files (exit code 1).
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr const char* kConfigEnv = "TRIPLESUM_CONFIG";

struct ConfigEntry {
  std::string key;
  std::string value;
  std::size_t line = 0;
};

// One `key = value` per line. `#` starts a comment, blank lines are skipped,
// keys are flag names without the leading dashes and values may be quoted.
std::vector<ConfigEntry> parse_config(std::istream& in, const std::string& origin);
std::vector<ConfigEntry> read_config_file(const std::string& path);

// The value of `--config PATH` / `--config=PATH`, else $TRIPLESUM_CONFIG,
// else empty.
std::string config_path(const std::vector<std::string>& args);

}  // namespace triplesum::cli
