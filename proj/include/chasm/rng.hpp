#pragma once

#include <cstdint>

namespace chasm {

/// splitmix64 finalizer.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

/// Counter-based stream: the i-th word is a pure function of (key, i), so
/// results never depend on the order in which independent streams are drawn.
class CounterStream {
 public:
  CounterStream(std::uint64_t seed, std::uint64_t lane, std::uint64_t sublane = 0)
      : key_(mix64(mix64(seed) ^ mix64(lane * 0x632be59bd9b4e019ull + 1) ^ (sublane * 0x8cb92ba72f3d8dd7ull))) {}

  std::uint64_t next() { return mix64(key_ + 0x9e3779b97f4a7c15ull * ++counter_); }

  /// Uniform in [0, bound) by rejection; bound > 0.
  std::uint64_t below(std::uint64_t bound) {
    if ((bound & (bound - 1)) == 0) return next() & (bound - 1);
    std::uint64_t mask = bound - 1;
    mask |= mask >> 1;
    mask |= mask >> 2;
    mask |= mask >> 4;
    mask |= mask >> 8;
    mask |= mask >> 16;
    mask |= mask >> 32;
    for (;;) {
      std::uint64_t x = next() & mask;
      if (x < bound) return x;
    }
  }

  /// Uniform integer in [lo, hi].
  int range(int lo, int hi) { return lo + static_cast<int>(below(static_cast<std::uint64_t>(hi - lo + 1))); }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace chasm
