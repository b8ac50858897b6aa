#pragma once

#include <functional>
#include <string>

namespace saac::log {

enum class Level { Info, Warning, Error };

using Sink = std::function<void(Level, const std::string&)>;

/// Replaces the process-wide sink and returns the previous one. The default
/// sink writes warnings and errors to stderr.
Sink set_sink(Sink sink);

void write(Level level, const std::string& message);
inline void info(const std::string& m) { write(Level::Info, m); }
inline void warn(const std::string& m) { write(Level::Warning, m); }

}  // namespace saac::log
