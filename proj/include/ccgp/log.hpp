#pragma once

#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace ccgp::log {

enum class Level { error = 0, info = 1, debug = 2 };

// Controlled by CCGP_LOG={error|info|debug}; default info.
inline Level threshold() {
  static Level lvl = [] {
    const char* env = std::getenv("CCGP_LOG");
    if (env == nullptr) return Level::info;
    if (std::strcmp(env, "error") == 0) return Level::error;
    if (std::strcmp(env, "debug") == 0) return Level::debug;
    return Level::info;
  }();
  return lvl;
}

template <typename... Args>
void emit(Level lvl, const char* tag, const char* fmt, Args... args) {
  if (lvl > threshold()) return;
  std::fprintf(stderr, "[%s] ", tag);
  std::fprintf(stderr, fmt, args...);
  std::fprintf(stderr, "\n");
}

template <typename... Args>
void error(const char* fmt, Args... args) {
  emit(Level::error, "error", fmt, args...);
}

template <typename... Args>
void info(const char* fmt, Args... args) {
  emit(Level::info, "info", fmt, args...);
}

template <typename... Args>
void debug(const char* fmt, Args... args) {
  emit(Level::debug, "debug", fmt, args...);
}

}  // namespace ccgp::log
