#pragma once

#include <sstream>
#include <string>

namespace eventvo::log {

enum class Level { kError = 0, kWarn = 1, kInfo = 2, kDebug = 3 };

// Verbosity comes from the EVO_LOG environment variable
// (error|warn|info|debug), default warn. set_level() overrides it.
Level level();
void set_level(Level level);
void write(Level level, const std::string& module, const std::string& message);

template <typename... Args>
void emit(Level lvl, const std::string& module, const Args&... args) {
  if (static_cast<int>(lvl) > static_cast<int>(level())) return;
  std::ostringstream os;
  (os << ... << args);
  write(lvl, module, os.str());
}

template <typename... Args>
void warn(const std::string& module, const Args&... args) {
  emit(Level::kWarn, module, args...);
}
template <typename... Args>
void info(const std::string& module, const Args&... args) {
  emit(Level::kInfo, module, args...);
}
template <typename... Args>
void debug(const std::string& module, const Args&... args) {
  emit(Level::kDebug, module, args...);
}

}  // namespace eventvo::log
