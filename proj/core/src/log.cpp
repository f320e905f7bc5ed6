#include "platoon_mpc/log.hpp"

#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace platoon_mpc {

LogLevel log_level() {
  static const LogLevel level = [] {
    const char* env = std::getenv("PLATOON_MPC_LOG");
    if (!env) return LogLevel::warn;
    if (std::strcmp(env, "quiet") == 0) return LogLevel::quiet;
    if (std::strcmp(env, "info") == 0) return LogLevel::info;
    if (std::strcmp(env, "debug") == 0) return LogLevel::debug;
    return LogLevel::warn;
  }();
  return level;
}

namespace {

void vlog(LogLevel level, const char* tag, const char* fmt, std::va_list args) {
  if (log_level() < level) return;
  std::fprintf(stderr, "[%s] ", tag);
  std::vfprintf(stderr, fmt, args);
  std::fputc('\n', stderr);
}

} // namespace

void log_warn(const char* fmt, ...) {
  std::va_list args;
  va_start(args, fmt);
  vlog(LogLevel::warn, "warn", fmt, args);
  va_end(args);
}

void log_info(const char* fmt, ...) {
  std::va_list args;
  va_start(args, fmt);
  vlog(LogLevel::info, "info", fmt, args);
  va_end(args);
}

void log_debug(const char* fmt, ...) {
  std::va_list args;
  va_start(args, fmt);
  vlog(LogLevel::debug, "debug", fmt, args);
  va_end(args);
}

} // namespace platoon_mpc
