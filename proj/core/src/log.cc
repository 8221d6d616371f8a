#include "cek/log.h"

#include <atomic>
#include <iostream>
#include <mutex>

namespace cek {
namespace {

std::atomic<LogLevel> g_level{LogLevel::kWarning};
std::mutex g_mutex;

const char* LevelTag(LogLevel level) {
  switch (level) {
    case LogLevel::kDebug:
      return "D";
    case LogLevel::kInfo:
      return "I";
    case LogLevel::kWarning:
      return "W";
    case LogLevel::kError:
      return "E";
    case LogLevel::kSilent:
      break;
  }
  return "?";
}

}  // namespace

void SetLogLevel(LogLevel level) { g_level.store(level); }

LogLevel GetLogLevel() { return g_level.load(); }

void Log(LogLevel level, std::string_view module, std::string_view message) {
  if (level < g_level.load() || level == LogLevel::kSilent) return;
  std::lock_guard<std::mutex> lock(g_mutex);
  std::clog << "[" << LevelTag(level) << "] " << module << ": " << message
            << '\n';
}

}  // namespace cek
