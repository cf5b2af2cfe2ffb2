#pragma once

#include <cstdint>
#include <string>

namespace annotis::net {

// Process-wide dial accounting. Live HTTP clients call record_dial() right
// before opening a connection; mock and fixture paths never do. Tests arm the
// guard to prove that offline modes cannot reach the network: a dial while
// armed throws.

struct DialGuardViolation : std::exception {
  std::string endpoint;
  std::string what_;
  explicit DialGuardViolation(std::string ep)
      : endpoint(std::move(ep)), what_("network dial while guard armed: " + endpoint) {}
  const char* what() const noexcept override { return what_.c_str(); }
};

void record_dial(const std::string& endpoint);
std::uint64_t dial_count();

class GuardScope {
 public:
  GuardScope();
  ~GuardScope();
  GuardScope(const GuardScope&) = delete;
  GuardScope& operator=(const GuardScope&) = delete;
};

bool guard_armed();

}  // namespace annotis::net
