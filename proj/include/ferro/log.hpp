#ifndef FERRO_LOG_HPP
#define FERRO_LOG_HPP

#include <sstream>
#include <string>

namespace ferro {

enum class LogLevel { Error = 0, Warn = 1, Info = 2, Debug = 3 };

void set_log_level(LogLevel level);
LogLevel log_level();
/// Accepts error, warn, info, debug; throws std::invalid_argument otherwise.
LogLevel parse_log_level(const std::string& name);
/// Writes one line to stderr if `level` is enabled.  Thread safe.
void log_message(LogLevel level, const std::string& message);

template <typename... Args>
void log(LogLevel level, const Args&... args) {
  if (level > log_level()) return;
  std::ostringstream out;
  (out << ... << args);
  log_message(level, out.str());
}

}  // namespace ferro

#endif  // FERRO_LOG_HPP
