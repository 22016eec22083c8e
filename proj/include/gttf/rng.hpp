#pragma once

#include <cstdint>

namespace gttf {

// 64-bit finalizer with full avalanche (splitmix64).
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Combine a seed with any number of keys into one 64-bit hash.
// Feeding keys sequentially through the finalizer keeps draws independent
// of evaluation order and thread scheduling.
inline std::uint64_t hash_keys(std::uint64_t h) { return mix64(h); }
template <class... Ks>
std::uint64_t hash_keys(std::uint64_t h, std::uint64_t k, Ks... rest) {
  return hash_keys(mix64(h ^ k), rest...);
}

inline double to_unit(std::uint64_t h) {
  return static_cast<double>(h >> 11) * 0x1.0p-53;  // [0, 1)
}

// Counter-based stream: every draw is a pure function of (seed, keys).
// Walkers hash (tag, tree, depth, slot, draw) so worker count and
// scheduling cannot perturb results.
struct RngStream {
  std::uint64_t seed = 0;

  template <class... Ks>
  double uniform(Ks... keys) const {
    return to_unit(hash_keys(seed, static_cast<std::uint64_t>(keys)...));
  }
  template <class... Ks>
  std::uint64_t bits(Ks... keys) const {
    return hash_keys(seed, static_cast<std::uint64_t>(keys)...);
  }
  // Derived stream for an independent consumer (audit run, training round...).
  template <class... Ks>
  RngStream substream(Ks... keys) const {
    return RngStream{bits(static_cast<std::uint64_t>(keys)...)};
  }
};

// Domain-separation tags so distinct consumers never share a counter.
namespace rng_tag {
constexpr std::uint64_t traverse = 0x7472617665727365ULL;
constexpr std::uint64_t generator = 0x67656e6572617465ULL;
constexpr std::uint64_t negatives = 0x6e65676174697665ULL;
constexpr std::uint64_t init = 0x696e697469616c7aULL;
constexpr std::uint64_t split = 0x73706c6974706169ULL;
constexpr std::uint64_t batch = 0x6261746368706963ULL;
constexpr std::uint64_t audit = 0x6175646974727565ULL;
}  // namespace rng_tag

// Small sequential generator for places that want a plain stream
// (graph generation, shuffles). Deterministic across platforms.
struct SplitMix64 {
  std::uint64_t state = 0;
  explicit SplitMix64(std::uint64_t s) : state(s) {}
  std::uint64_t next() {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  double uniform() { return to_unit(next()); }
  // Unbiased-enough index in [0, m) via 128-bit multiply (m is tiny vs 2^64).
  std::uint64_t index(std::uint64_t m) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next()) * m) >> 64);
  }
};

}  // namespace gttf
