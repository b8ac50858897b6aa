#include "saac/log.hpp"

#include <cstdio>
#include <mutex>

namespace saac::log {

namespace {

std::mutex& sink_mutex() {
  static std::mutex m;
  return m;
}

Sink& current() {
  static Sink sink = [](Level level, const std::string& message) {
    if (level == Level::Info) return;
    std::fprintf(stderr, "[saac] %s: %s\n", level == Level::Warning ? "warning" : "error", message.c_str());
  };
  return sink;
}

}  // namespace

Sink set_sink(Sink sink) {
  std::lock_guard lock(sink_mutex());
  std::swap(current(), sink);
  return sink;
}

void write(Level level, const std::string& message) {
  std::lock_guard lock(sink_mutex());
  if (current()) current()(level, message);
}

}  // namespace saac::log
