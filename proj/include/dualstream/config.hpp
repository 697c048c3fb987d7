#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace dualstream {

// Plain-text `key=value` config. '#' starts a comment, blank lines are
// skipped, whitespace around keys and values is trimmed. Duplicate keys
// are a parse error.
class Config {
 public:
  static Config parse(std::istream& in, const std::string& source = "<config>");
  static Config from_file(const std::filesystem::path& path);
  static Config from_string(const std::string& text, const std::string& source = "<string>");

  bool has(const std::string& key) const { return values_.count(key) != 0; }

  const std::string& get_str(const std::string& key) const;
  std::string get_str(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  int64_t get_int(const std::string& key) const;
  int64_t get_int(const std::string& key, int64_t fallback) const;

  void set(const std::string& key, const std::string& value) { values_[key] = value; }

  // Throws ParseError naming any key not in `allowed`.
  void require_known(const std::vector<std::string>& allowed) const;

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::string source_;
  std::map<std::string, std::string> values_;

  [[noreturn]] void fail(const std::string& what) const;
};

}  // namespace dualstream
