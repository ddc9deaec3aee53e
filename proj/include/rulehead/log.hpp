#ifndef RULEHEAD_LOG_HPP
#define RULEHEAD_LOG_HPP

#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace rulehead::log {

enum class Level { Error = 0, Info = 1, Debug = 2 };

// Level comes from RULEHEAD_LOG={error|info|debug}; default is error.
inline Level level() {
  static Level cached = [] {
    const char* env = std::getenv("RULEHEAD_LOG");
    if (env == nullptr) return Level::Error;
    if (std::strcmp(env, "debug") == 0) return Level::Debug;
    if (std::strcmp(env, "info") == 0) return Level::Info;
    return Level::Error;
  }();
  return cached;
}

template <typename... Args>
void emit(Level lv, const char* tag, const char* fmt, Args... args) {
  if (lv > level()) return;
  std::fprintf(stderr, "[%s] ", tag);
  std::fprintf(stderr, fmt, args...);
  std::fputc('\n', stderr);
}

template <typename... Args>
void error(const char* fmt, Args... args) {
  emit(Level::Error, "error", fmt, args...);
}

template <typename... Args>
void info(const char* fmt, Args... args) {
  emit(Level::Info, "info", fmt, args...);
}

template <typename... Args>
void debug(const char* fmt, Args... args) {
  emit(Level::Debug, "debug", fmt, args...);
}

}  // namespace rulehead::log

#endif  // RULEHEAD_LOG_HPP
