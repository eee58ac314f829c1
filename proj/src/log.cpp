#include "slabforge/log.hpp"

#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace slabforge {

namespace {

LogLevel parse_env_level() {
  const char* env = std::getenv("SLABFORGE_LOG");
  if (env == nullptr) return LogLevel::Warn;
  if (std::strcmp(env, "error") == 0) return LogLevel::Error;
  if (std::strcmp(env, "warn") == 0) return LogLevel::Warn;
  if (std::strcmp(env, "info") == 0) return LogLevel::Info;
  if (std::strcmp(env, "debug") == 0) return LogLevel::Debug;
  std::fprintf(stderr, "[slabforge][warn] unknown SLABFORGE_LOG value '%s', using 'warn'\n", env);
  return LogLevel::Warn;
}

LogLevel& level_storage() {
  static LogLevel level = parse_env_level();
  return level;
}

const char* level_name(LogLevel level) {
  switch (level) {
    case LogLevel::Error: return "error";
    case LogLevel::Warn: return "warn";
    case LogLevel::Info: return "info";
    case LogLevel::Debug: return "debug";
  }
  return "?";
}

}  // namespace

LogLevel log_level() { return level_storage(); }

void set_log_level(LogLevel level) { level_storage() = level; }

void log(LogLevel level, const std::string& message) {
  if (static_cast<int>(level) > static_cast<int>(log_level())) return;
  std::fprintf(stderr, "[slabforge][%s] %s\n", level_name(level), message.c_str());
}

}  // namespace slabforge
