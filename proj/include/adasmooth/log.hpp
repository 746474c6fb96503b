#pragma once

#include <string>

namespace adasmooth {

enum class LogLevel
{
  error = 0,
  warn = 1,
  info = 2,
  debug = 3
};

//! Current verbosity; initialised from the ADASMOOTH_LOG environment
//! variable (error|warn|info|debug, default warn).
LogLevel log_level();
void set_log_level(LogLevel level);

void log(LogLevel level, const std::string& message);

inline void
log_warn(const std::string& message)
{
  log(LogLevel::warn, message);
}

inline void
log_info(const std::string& message)
{
  log(LogLevel::info, message);
}

} // namespace adasmooth
