#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace alphadesk::cli {

// Flat key=value run configuration ('#' starts a comment, blank lines are
// ignored). Every key must come from the documented registry, so typos die
// loudly instead of silently falling back to defaults. `--set key=value`
// overrides the file; in-file duplicates are an error.
class RunConfig {
 public:
  static RunConfig from_file(const std::string& path);

  // Applies one `key=value` override (same validation as the file).
  void apply_override(const std::string& keyval);

  bool has(const std::string& key) const;
  std::string str(const std::string& key, const std::string& fallback) const;
  std::string require(const std::string& key) const;
  int integer(const std::string& key, int fallback) const;
  double real(const std::string& key, double fallback) const;
  bool flag(const std::string& key, bool fallback) const;
  std::uint64_t seed() const;  // key "seed", default 0
  // Comma-separated list; missing key yields the fallback, a present-but-empty
  // value yields an empty list.
  std::vector<std::string> list(const std::string& key,
                                const std::vector<std::string>& fallback) const;

  // The full documented key registry (sorted), for README/tests.
  static const std::vector<std::string>& known_keys();

 private:
  void set(const std::string& key, const std::string& value,
           const std::string& where);

  std::map<std::string, std::string> values_;
};

}  // namespace alphadesk::cli
