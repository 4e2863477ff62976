// SPDX-License-Identifier: Apache-2.0
#include "slidegraph/log.hpp"

#include <atomic>
#include <iostream>
#include <mutex>
#include <utility>

namespace slidegraph::log {
namespace {

std::mutex sink_mutex;
std::atomic<std::size_t> emitted{0};

Sink& current_sink() {
  static Sink sink = [](std::string_view msg) { std::clog << "warning: " << msg << '\n'; };
  return sink;
}

}  // namespace

Sink set_warning_sink(Sink sink) {
  std::lock_guard lock(sink_mutex);
  return std::exchange(current_sink(), std::move(sink));
}

void warn(std::string_view message) {
  ++emitted;
  std::lock_guard lock(sink_mutex);
  if (current_sink()) current_sink()(message);
}

std::size_t warning_count() { return emitted.load(); }

}  // namespace slidegraph::log
