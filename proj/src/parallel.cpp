#include "ensconv/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

namespace ensconv {

namespace {

std::atomic<unsigned> g_override{0};

unsigned from_environment() {
  const char* env = std::getenv("ENSCONV_THREADS");
  if (env == nullptr || *env == '\0') return 0;
  try {
    const long value = std::stol(env);
    return value > 0 ? static_cast<unsigned>(value) : 0;
  } catch (const std::exception&) {
    return 0;
  }
}

}  // namespace

unsigned thread_count() {
  if (const unsigned forced = g_override.load()) return forced;
  if (const unsigned env = from_environment()) return env;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? hw : 1;
}

void set_thread_count(unsigned threads) { g_override.store(threads); }

}  // namespace ensconv
