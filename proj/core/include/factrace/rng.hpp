#pragma once

#include <array>
#include <cstdint>

namespace factrace {

// splitmix64 step: advances `state` and returns the mixed output.
std::uint64_t splitmix64(std::uint64_t& state) noexcept;

// The splitmix64 output finalizer applied to a single value.
std::uint64_t mix64(std::uint64_t x) noexcept;

// xoshiro256** seeded from four successive splitmix64 outputs. Portable and
// fully specified, so draws match across implementations and platforms.
class Xoshiro256StarStar {
 public:
  using result_type = std::uint64_t;

  explicit Xoshiro256StarStar(std::uint64_t seed) noexcept;

  // Independent substream for run `index` of a seeded experiment:
  // seeded with seed ^ mix64(index).
  static Xoshiro256StarStar substream(std::uint64_t seed, std::uint64_t index) noexcept {
    return Xoshiro256StarStar(seed ^ mix64(index));
  }

  std::uint64_t operator()() noexcept;

  // Unbiased integer in [0, bound) by rejection; bound must be > 0.
  std::uint64_t bounded(std::uint64_t bound) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return ~result_type{0}; }

 private:
  std::array<std::uint64_t, 4> s_{};
};

}  // namespace factrace
