#ifndef CEK_LOG_H_
#define CEK_LOG_H_

#include <string_view>

namespace cek {

enum class LogLevel { kDebug = 0, kInfo = 1, kWarning = 2, kError = 3, kSilent = 4 };

// Messages below the threshold are dropped. Default: kWarning.
void SetLogLevel(LogLevel level);
LogLevel GetLogLevel();

void Log(LogLevel level, std::string_view module, std::string_view message);

inline void LogWarning(std::string_view module, std::string_view message) {
  Log(LogLevel::kWarning, module, message);
}
inline void LogInfo(std::string_view module, std::string_view message) {
  Log(LogLevel::kInfo, module, message);
}

}  // namespace cek

#endif  // CEK_LOG_H_
