#pragma once

#include <functional>
#include <iostream>
#include <string>
#include <utility>

namespace cgm {

using WarningSink = std::function<void(const std::string&)>;

inline WarningSink& warning_sink() {
  static WarningSink sink = [](const std::string& msg) { std::clog << "cgm warning: " << msg << '\n'; };
  return sink;
}

inline void warn(const std::string& msg) {
  if (auto& s = warning_sink()) s(msg);
}

// Restores the previous sink on destruction.
class ScopedWarningSink {
 public:
  explicit ScopedWarningSink(WarningSink s) : saved_(std::exchange(warning_sink(), std::move(s))) {}
  ~ScopedWarningSink() { warning_sink() = std::move(saved_); }
  ScopedWarningSink(const ScopedWarningSink&) = delete;
  ScopedWarningSink& operator=(const ScopedWarningSink&) = delete;

 private:
  WarningSink saved_;
};

}  // namespace cgm
