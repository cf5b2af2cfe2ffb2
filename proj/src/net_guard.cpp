#include "annotis/net_guard.hpp"

#include <atomic>

namespace annotis::net {

namespace {
std::atomic<std::uint64_t> g_dials{0};
std::atomic<int> g_armed{0};
}  // namespace

void record_dial(const std::string& endpoint) {
  g_dials.fetch_add(1, std::memory_order_relaxed);
  if (g_armed.load(std::memory_order_relaxed) > 0) throw DialGuardViolation(endpoint);
}

std::uint64_t dial_count() { return g_dials.load(std::memory_order_relaxed); }

GuardScope::GuardScope() { g_armed.fetch_add(1, std::memory_order_relaxed); }
GuardScope::~GuardScope() { g_armed.fetch_sub(1, std::memory_order_relaxed); }

bool guard_armed() { return g_armed.load(std::memory_order_relaxed) > 0; }

}  // namespace annotis::net
