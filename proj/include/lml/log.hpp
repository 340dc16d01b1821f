#pragma once

#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace lml {

enum class LogLevel { kError = 0, kInfo = 1, kDebug = 2 };

// error|info|debug; anything else (or unset) means info.
inline LogLevel parse_log_level(const char* text) {
  if (text == nullptr) return LogLevel::kInfo;
  if (std::strcmp(text, "error") == 0) return LogLevel::kError;
  if (std::strcmp(text, "debug") == 0) return LogLevel::kDebug;
  return LogLevel::kInfo;
}

// Resolved once from LML_LOG_LEVEL.
inline LogLevel log_level() {
  static const LogLevel level = parse_log_level(std::getenv("LML_LOG_LEVEL"));
  return level;
}

template <typename... Args>
void log_at(LogLevel lvl, const char* tag, const char* fmt, Args... args) {
  if (static_cast<int>(lvl) > static_cast<int>(log_level())) return;
  std::fprintf(stderr, "[%s] ", tag);
  std::fprintf(stderr, fmt, args...);
  std::fputc('\n', stderr);
}

template <typename... Args>
void log_error(const char* fmt, Args... args) {
  log_at(LogLevel::kError, "error", fmt, args...);
}
template <typename... Args>
void log_info(const char* fmt, Args... args) {
  log_at(LogLevel::kInfo, "info", fmt, args...);
}
template <typename... Args>
void log_debug(const char* fmt, Args... args) {
  log_at(LogLevel::kDebug, "debug", fmt, args...);
}

}  // namespace lml
