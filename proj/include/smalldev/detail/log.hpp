#pragma once

#include <atomic>
#include <iostream>
#include <mutex>
#include <string>

namespace smalldev::detail {

inline std::atomic<bool>& warnings_enabled() {
  static std::atomic<bool> on{true};
  return on;
}

/// One-line warning on stderr, serialized across threads.
inline void warn(const std::string& msg) {
  if (!warnings_enabled()) return;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  std::cerr << "warning: " << msg << '\n';
}

}  // namespace smalldev::detail
