#pragma once

#include <cstdint>
#include <random>

namespace iab {

using Rng = std::mt19937_64;

/// Derives an independent child seed from a parent seed and a stream label.
///
/// Seeds form a tree: master seed -> instance seed -> candidate / draw
/// streams. The mixing is splitmix64 applied to (parent, label), so any node
/// of the tree can be recomputed without touching its siblings and parallel
/// and serial runs consume identical streams.
constexpr std::uint64_t split_seed(std::uint64_t parent, std::uint64_t label) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return mix(mix(parent) ^ (label * 0xd1b54a32d192ed03ULL + 0x632be59bd9b4e019ULL));
}

/// Named stream labels, so call sites do not collide on small integers.
enum class Stream : std::uint64_t {
  kGeometry = 1,
  kDeployment = 2,
  kFitness = 3,
  kEvaluation = 4,
  kOptimizer = 5,
  kTemporal = 6,
  kForbidden = 7,
};

constexpr std::uint64_t split_seed(std::uint64_t parent, Stream s) {
  return split_seed(parent, static_cast<std::uint64_t>(s));
}

/// Uniform double in [0, 1).
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace iab
