#pragma once

#include <functional>
#include <string>
#include <vector>

namespace flowrisk::log {

using Sink = std::function<void(const std::string&)>;

// Warnings go to stderr unless a sink is installed.
void warn(const std::string& message);

// Replaces the active sink; returns the previous one. Pass an empty Sink to
// restore the stderr default.
Sink set_sink(Sink sink);

// Installs a collecting sink for its lifetime (used by tests and the CLI's
// run log).
class ScopedCapture {
 public:
  ScopedCapture();
  ~ScopedCapture();
  ScopedCapture(const ScopedCapture&) = delete;
  ScopedCapture& operator=(const ScopedCapture&) = delete;

  const std::vector<std::string>& messages() const { return messages_; }
  bool contains(const std::string& needle) const;

 private:
  std::vector<std::string> messages_;
  Sink previous_;
};

}  // namespace flowrisk::log
