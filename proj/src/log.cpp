#include "adasmooth/log.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>
#include <iostream>
#include <mutex>

namespace adasmooth {

namespace {

LogLevel
level_from_env()
{
  const char* v = std::getenv("ADASMOOTH_LOG");
  if (v == nullptr) {
    return LogLevel::warn;
  }
  if (std::strcmp(v, "error") == 0) {
    return LogLevel::error;
  }
  if (std::strcmp(v, "info") == 0) {
    return LogLevel::info;
  }
  if (std::strcmp(v, "debug") == 0) {
    return LogLevel::debug;
  }
  return LogLevel::warn;
}

std::atomic<int>&
current()
{
  static std::atomic<int> level{ static_cast<int>(level_from_env()) };
  return level;
}

const char*
label(LogLevel level)
{
  switch (level) {
    case LogLevel::error:
      return "error";
    case LogLevel::warn:
      return "warn";
    case LogLevel::info:
      return "info";
    case LogLevel::debug:
      return "debug";
  }
  return "?";
}

} // namespace

LogLevel
log_level()
{
  return static_cast<LogLevel>(current().load());
}

void
set_log_level(LogLevel level)
{
  current().store(static_cast<int>(level));
}

void
log(LogLevel level, const std::string& message)
{
  if (static_cast<int>(level) > current().load()) {
    return;
  }
  static std::mutex mutex;
  std::lock_guard<std::mutex> lock(mutex);
  std::cerr << "[adasmooth " << label(level) << "] " << message << '\n';
}

} // namespace adasmooth
