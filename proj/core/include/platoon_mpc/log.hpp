#pragma once

namespace platoon_mpc {

/// Log verbosity, selected once per process from the PLATOON_MPC_LOG
/// environment variable: "quiet", "warn" (default), "info" or "debug".
enum class LogLevel { quiet = 0, warn = 1, info = 2, debug = 3 };

LogLevel log_level();

/// printf-style messages to stderr, filtered by the active level.
void log_warn(const char* fmt, ...);
void log_info(const char* fmt, ...);
void log_debug(const char* fmt, ...);

} // namespace platoon_mpc
