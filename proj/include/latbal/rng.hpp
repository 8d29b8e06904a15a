// rng.hpp - Seeded random streams with implementation-pinned draw logic.
//
// The standard <random> distributions are implementation-defined, so uniform
// and normal draws are spelled out here; a given seed then produces the same
// stream on every platform and toolchain.
#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <random>

namespace latbal {

// splitmix64 finalizer, used both as a mixer and to derive substream seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Combines a base seed with stream tags (trial index, host index, ...) into an
// independent substream seed.
constexpr std::uint64_t mix_seed(std::initializer_list<std::uint64_t> parts) {
  std::uint64_t h = 0x8e51ecfa6f42b8a1ULL;
  for (std::uint64_t p : parts) {
    h = splitmix64(h ^ p);
  }
  return h;
}

class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : engine_(seed) {}

  // Uniform double in [0, 1), 53 usable bits.
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform double in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Uniform integer in [lo, hi], rejection-sampled to avoid modulo bias.
  // Draws in [2^64 mod span, 2^64) form a region whose size is a multiple of
  // span, so reducing them mod span is exactly uniform.
  std::uint64_t uniform_int(std::uint64_t lo, std::uint64_t hi) {
    const std::uint64_t span = hi - lo + 1;  // hi >= lo required; span 0 means full range
    if (span == 0) return engine_();
    const std::uint64_t threshold = (0ULL - span) % span;
    std::uint64_t draw = engine_();
    while (draw < threshold) draw = engine_();
    return lo + draw % span;
  }

  // Picks an index into a container of the given size.
  std::size_t index(std::size_t size) {
    return static_cast<std::size_t>(uniform_int(0, size - 1));
  }

  // Normal draw via Box-Muller; consumes exactly two uniforms.
  double normal(double sigma) {
    const double u1 = 1.0 - uniform01();  // (0, 1], keeps log finite
    const double u2 = uniform01();
    return sigma * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace latbal
