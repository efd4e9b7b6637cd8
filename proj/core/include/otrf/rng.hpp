#pragma once

#include <cstdint>
#include <random>

namespace otrf {

using Rng = std::mt19937_64;

// SplitMix64 finalizer; used to derive independent, reproducible stream seeds
// from a master seed so results do not depend on thread scheduling.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t stream_seed(std::uint64_t master, std::uint64_t stream) noexcept {
  return mix64(mix64(master) ^ mix64(stream + 0x632be59bd9b4e019ULL));
}

constexpr std::uint64_t stream_seed(std::uint64_t master, std::uint64_t a,
                                    std::uint64_t b) noexcept {
  return stream_seed(stream_seed(master, a), b);
}

inline Rng make_stream(std::uint64_t master, std::uint64_t stream) {
  return Rng(stream_seed(master, stream));
}

inline Rng make_stream(std::uint64_t master, std::uint64_t a, std::uint64_t b) {
  return Rng(stream_seed(master, a, b));
}

// Uniform on [0, 1).
inline double uniform01(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

inline double standard_normal(Rng& rng) {
  return std::normal_distribution<double>(0.0, 1.0)(rng);
}

}  // namespace otrf
