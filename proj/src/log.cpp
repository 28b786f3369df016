#include "flowrisk/log.hpp"

#include <iostream>
#include <mutex>

namespace flowrisk::log {
namespace {

std::mutex g_mutex;
Sink g_sink;

}  // namespace

void warn(const std::string& message) {
  std::lock_guard lock(g_mutex);
  if (g_sink) {
    g_sink(message);
  } else {
    std::cerr << "warning: " << message << '\n';
  }
}

Sink set_sink(Sink sink) {
  std::lock_guard lock(g_mutex);
  std::swap(g_sink, sink);
  return sink;
}

ScopedCapture::ScopedCapture() {
  previous_ = set_sink([this](const std::string& m) { messages_.push_back(m); });
}

ScopedCapture::~ScopedCapture() { set_sink(std::move(previous_)); }

bool ScopedCapture::contains(const std::string& needle) const {
  for (const auto& m : messages_) {
    if (m.find(needle) != std::string::npos) return true;
  }
  return false;
}

}  // namespace flowrisk::log
