#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace smartq {

// Per-trial generator. Each trial and each MCMC chain owns one, seeded from
// a derived 64-bit key, so no generator state is ever shared between threads.
using Rng = std::mt19937_64;

// SplitMix64 finaliser; a bijection on 64-bit words.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

// Deterministic substream key from a base seed and a path of indices.
std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> path) noexcept;

// Uniform on [0, 1) with 53 random bits.
inline double uniform01(Rng& rng) noexcept {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// p <= 0 never fires, p >= 1 always fires.
inline bool bernoulli(Rng& rng, double p) noexcept { return uniform01(rng) < p; }

}  // namespace smartq
