#include "pitmesh/log.hpp"

#include <atomic>
#include <cstdlib>
#include <iostream>
#include <mutex>
#include <string_view>

namespace pitmesh::log {
namespace {

Level from_env() {
  const char* v = std::getenv("PITMESH_LOG");
  if (v == nullptr) return Level::Warn;
  std::string_view s(v);
  if (s == "debug") return Level::Debug;
  if (s == "info") return Level::Info;
  if (s == "off") return Level::Off;
  return Level::Warn;
}

std::atomic<int>& current() {
  static std::atomic<int> lvl{static_cast<int>(from_env())};
  return lvl;
}

const char* label(Level l) {
  switch (l) {
    case Level::Debug: return "debug";
    case Level::Info: return "info";
    case Level::Warn: return "warn";
    default: return "";
  }
}

}  // namespace

Level level() { return static_cast<Level>(current().load()); }

void set_level(Level l) { current().store(static_cast<int>(l)); }

void write(Level l, const std::string& msg) {
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  std::cerr << "[pitmesh:" << label(l) << "] " << msg << '\n';
}

}  // namespace pitmesh::log
