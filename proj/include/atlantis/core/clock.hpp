#pragma once

#include <functional>
#include <string>

namespace atlantis::core {

using ClockFn = std::function<std::string()>;

std::string iso8601_utc_now();

/// Wall-clock timestamps for normal runs.
ClockFn wall_clock();

/// Fixed timestamps make reruns digest-identical (demo and tests).
ClockFn fixed_clock(std::string timestamp = "1970-01-01T00:00:00Z");

}  // namespace atlantis::core
