#pragma once

#include <cstdint>

namespace stratus {

// Simulated time. Integer nanoseconds keep event ordering and metrics
// bit-exact across runs; no wall-clock ever enters the simulation.
using SimTime = std::int64_t;
using Duration = std::int64_t;

constexpr Duration kNanosecond = 1;
constexpr Duration kMicrosecond = 1000;
constexpr Duration kMillisecond = 1000 * kMicrosecond;
constexpr Duration kSecond = 1000 * kMillisecond;

constexpr Duration msec(std::int64_t v) { return v * kMillisecond; }
constexpr Duration usec(std::int64_t v) { return v * kMicrosecond; }
constexpr Duration sec(std::int64_t v) { return v * kSecond; }

constexpr double to_ms(Duration d) { return static_cast<double>(d) / kMillisecond; }
constexpr double to_sec(Duration d) { return static_cast<double>(d) / kSecond; }

}  // namespace stratus
