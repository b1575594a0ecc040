#include "eventvo/logging.hpp"

#include <atomic>
#include <cstdlib>
#include <iostream>
#include <mutex>
#include <string_view>

#include "eventvo/error.hpp"

namespace eventvo {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kParse: return "parse error";
    case ErrorCode::kValidation: return "validation error";
    case ErrorCode::kPrecondition: return "precondition violated";
    case ErrorCode::kIo: return "i/o error";
    case ErrorCode::kConfig: return "config error";
    case ErrorCode::kGeometry: return "geometry error";
    case ErrorCode::kDegenerate: return "degenerate input";
    case ErrorCode::kUnderdetermined: return "underdetermined";
  }
  return "error";
}

namespace {
std::string compose(ErrorCode code, const std::string& module,
                    const std::string& message, std::size_t line) {
  std::string out = "[" + module + "] " + to_string(code);
  if (line > 0) out += " at line " + std::to_string(line);
  out += ": " + message;
  return out;
}
}  // namespace

Error::Error(ErrorCode code, std::string module, const std::string& message,
             std::size_t line)
    : std::runtime_error(compose(code, module, message, line)),
      code_(code),
      module_(std::move(module)),
      line_(line) {}

namespace log {
namespace {

Level level_from_env() {
  const char* env = std::getenv("EVO_LOG");
  if (env == nullptr) return Level::kWarn;
  const std::string_view v(env);
  if (v == "error") return Level::kError;
  if (v == "info") return Level::kInfo;
  if (v == "debug") return Level::kDebug;
  return Level::kWarn;
}

std::atomic<int>& current() {
  static std::atomic<int> value{static_cast<int>(level_from_env())};
  return value;
}

std::mutex& sink_mutex() {
  static std::mutex m;
  return m;
}

const char* tag(Level l) {
  switch (l) {
    case Level::kError: return "E";
    case Level::kWarn: return "W";
    case Level::kInfo: return "I";
    case Level::kDebug: return "D";
  }
  return "?";
}

}  // namespace

Level level() { return static_cast<Level>(current().load()); }
void set_level(Level l) { current().store(static_cast<int>(l)); }

void write(Level l, const std::string& module, const std::string& message) {
  std::lock_guard<std::mutex> lock(sink_mutex());
  std::cerr << tag(l) << " [" << module << "] " << message << '\n';
}

}  // namespace log
}  // namespace eventvo
