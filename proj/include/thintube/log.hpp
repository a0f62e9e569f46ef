#pragma once

#include <sstream>
#include <string>

namespace thintube {

enum class LogLevel { quiet = 0, info = 1, debug = 2 };

/// Current level, initialized once from the THINTUBE_LOG environment
/// variable (quiet | info | debug). Unknown values fall back to info.
LogLevel log_level();

void log_message(LogLevel level, const std::string& msg);

namespace detail {
template <typename... Args>
std::string log_format(Args&&... args) {
  std::ostringstream os;
  (os << ... << args);
  return os.str();
}
}  // namespace detail

template <typename... Args>
void log_info(Args&&... args) {
  if (log_level() >= LogLevel::info)
    log_message(LogLevel::info, detail::log_format(std::forward<Args>(args)...));
}

template <typename... Args>
void log_debug(Args&&... args) {
  if (log_level() >= LogLevel::debug)
    log_message(LogLevel::debug, detail::log_format(std::forward<Args>(args)...));
}

}  // namespace thintube
