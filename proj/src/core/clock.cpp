#include "atlantis/core/clock.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>

namespace atlantis::core {

std::string iso8601_utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02dZ", tm.tm_year + 1900,
                tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec);
  return buf;
}

ClockFn wall_clock() {
  return [] { return iso8601_utc_now(); };
}

ClockFn fixed_clock(std::string timestamp) {
  return [ts = std::move(timestamp)] { return ts; };
}

}  // namespace atlantis::core
