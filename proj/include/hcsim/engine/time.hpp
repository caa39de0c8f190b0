#pragma once

#include <cmath>
#include <compare>
#include <cstdint>

namespace hcsim::engine {

/// Virtual clock value in hardware-timer ticks (1 tick = 10ns).
struct VirtualTime {
  static constexpr std::uint64_t kNsPerTick = 10;

  std::uint64_t ticks = 0;

  constexpr VirtualTime() = default;
  constexpr explicit VirtualTime(std::uint64_t t) : ticks(t) {}

  constexpr std::uint64_t ns() const { return ticks * kNsPerTick; }

  friend constexpr auto operator<=>(VirtualTime, VirtualTime) = default;
};

/// Duration in ticks.
struct Duration {
  std::uint64_t ticks = 0;

  constexpr Duration() = default;
  constexpr explicit Duration(std::uint64_t t) : ticks(t) {}

  /// Rounds a (possibly fractional) nanosecond cost to the nearest tick.
  static Duration from_ns(double ns) {
    if (!(ns > 0.0)) return Duration{};
    return Duration{static_cast<std::uint64_t>(
        std::llround(ns / static_cast<double>(VirtualTime::kNsPerTick)))};
  }

  constexpr std::uint64_t ns() const { return ticks * VirtualTime::kNsPerTick; }

  friend constexpr auto operator<=>(Duration, Duration) = default;
  friend constexpr Duration operator+(Duration a, Duration b) {
    return Duration{a.ticks + b.ticks};
  }
};

constexpr VirtualTime operator+(VirtualTime t, Duration d) {
  return VirtualTime{t.ticks + d.ticks};
}

constexpr Duration operator-(VirtualTime a, VirtualTime b) {
  return Duration{a.ticks - b.ticks};
}

}  // namespace hcsim::engine
