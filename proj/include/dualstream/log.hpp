#pragma once

#include <sstream>
#include <string>

namespace dualstream {

enum class LogLevel { kError = 0, kWarn = 1, kInfo = 2, kDebug = 3 };

// Level comes from the DUALSTREAM_LOG env var (error|warn|info|debug),
// read once per process; default is warn. Output goes to stderr.
LogLevel log_level();
bool log_enabled(LogLevel level);
void log_line(LogLevel level, const std::string& message);

namespace detail {
struct LogStream {
  LogLevel level;
  std::ostringstream out;
  ~LogStream() { log_line(level, out.str()); }
};
}  // namespace detail

}  // namespace dualstream

#define DS_LOG(level_)                                     \
  if (!::dualstream::log_enabled(level_)) {                \
  } else                                                   \
    ::dualstream::detail::LogStream{level_}.out

#define DS_LOG_ERROR DS_LOG(::dualstream::LogLevel::kError)
#define DS_LOG_WARN DS_LOG(::dualstream::LogLevel::kWarn)
#define DS_LOG_INFO DS_LOG(::dualstream::LogLevel::kInfo)
#define DS_LOG_DEBUG DS_LOG(::dualstream::LogLevel::kDebug)
