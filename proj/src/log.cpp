#include "dualstream/log.hpp"

#include <cstdlib>
#include <iostream>

namespace dualstream {
namespace {

LogLevel parse_level() {
  const char* env = std::getenv("DUALSTREAM_LOG");
  if (!env) return LogLevel::kWarn;
  const std::string v(env);
  if (v == "error") return LogLevel::kError;
  if (v == "warn") return LogLevel::kWarn;
  if (v == "info") return LogLevel::kInfo;
  if (v == "debug") return LogLevel::kDebug;
  return LogLevel::kWarn;
}

const char* level_name(LogLevel level) {
  switch (level) {
    case LogLevel::kError: return "error";
    case LogLevel::kWarn: return "warn";
    case LogLevel::kInfo: return "info";
    case LogLevel::kDebug: return "debug";
  }
  return "?";
}

}  // namespace

LogLevel log_level() {
  static const LogLevel level = parse_level();
  return level;
}

bool log_enabled(LogLevel level) { return static_cast<int>(level) <= static_cast<int>(log_level()); }

void log_line(LogLevel level, const std::string& message) {
  std::cerr << "[" << level_name(level) << "] " << message << "\n";
}

}  // namespace dualstream
