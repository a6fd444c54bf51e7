#pragma once

#include <sstream>
#include <string>

namespace pitmesh::log {

enum class Level { Debug = 0, Info = 1, Warn = 2, Off = 3 };

// Reads PITMESH_LOG (debug|info|warn|off) on first use; defaults to warn.
Level level();
void set_level(Level l);

void write(Level l, const std::string& msg);

template <typename... Args>
void emit(Level l, const Args&... args) {
  if (l < level()) return;
  std::ostringstream os;
  (os << ... << args);
  write(l, os.str());
}

template <typename... Args>
void debug(const Args&... args) { emit(Level::Debug, args...); }
template <typename... Args>
void info(const Args&... args) { emit(Level::Info, args...); }
template <typename... Args>
void warn(const Args&... args) { emit(Level::Warn, args...); }

}  // namespace pitmesh::log
