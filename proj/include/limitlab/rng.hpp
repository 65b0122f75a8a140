#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace limitlab {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Counter-based random stream.
///
/// Every draw is a pure function of (key, counter), so any sample index can be
/// generated independently of the others and in any order. Child streams are
/// derived by hashing an identifier into the key, which gives reproducible
/// per-(experiment, stratum, ...) streams from one master seed.
class CounterStream {
 public:
  constexpr explicit CounterStream(std::uint64_t seed) noexcept : key_(splitmix64(seed)) {}

  constexpr CounterStream child(std::uint64_t id) const noexcept {
    return CounterStream(key_ ^ splitmix64(id + 0x632be59bd9b4e019ULL), Raw{});
  }

  constexpr std::uint64_t bits(std::uint64_t counter) const noexcept {
    return splitmix64(key_ + counter * 0x9e3779b97f4a7c15ULL);
  }

  /// Uniform on [0, 1).
  constexpr double uniform(std::uint64_t counter) const noexcept {
    return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53;
  }

  /// Uniform on (0, 1).
  constexpr double uniform_open(std::uint64_t counter) const noexcept {
    return (static_cast<double>(bits(counter) >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal from two consecutive counters (Box-Muller, cosine branch).
  double normal(std::uint64_t counter) const noexcept {
    const double u1 = uniform_open(2 * counter);
    const double u2 = uniform(2 * counter + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  constexpr std::uint64_t key() const noexcept { return key_; }

 private:
  struct Raw {};
  constexpr CounterStream(std::uint64_t key, Raw) noexcept : key_(key) {}

  std::uint64_t key_;
};

}  // namespace limitlab
