#include "thintube/log.hpp"

#include <cstdlib>
#include <iostream>

namespace thintube {

LogLevel log_level() {
  static const LogLevel level = [] {
    const char* env = std::getenv("THINTUBE_LOG");
    if (!env) return LogLevel::info;
    const std::string value(env);
    if (value == "quiet") return LogLevel::quiet;
    if (value == "debug") return LogLevel::debug;
    return LogLevel::info;
  }();
  return level;
}

void log_message(LogLevel level, const std::string& msg) {
  std::cerr << (level == LogLevel::debug ? "[debug] " : "[info] ") << msg
            << "\n";
}

}  // namespace thintube
