#include "tubelink/log.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

namespace tubelink::log {

namespace {
std::atomic<Level> g_level{Level::warn};
std::mutex g_mutex;

void emit(Level at, std::string_view tag, std::string_view message) {
  if (g_level.load() < at) return;
  std::lock_guard lock(g_mutex);
  std::clog << "[tubelink " << tag << "] " << message << '\n';
}
}  // namespace

void set_level(Level level) { g_level.store(level); }
Level level() { return g_level.load(); }

void warn(std::string_view message) { emit(Level::warn, "warn", message); }
void info(std::string_view message) { emit(Level::info, "info", message); }
void debug(std::string_view message) { emit(Level::debug, "debug", message); }

}  // namespace tubelink::log
