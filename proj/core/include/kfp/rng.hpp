#pragma once
// Counter-splittable randomness: trajectory k of a run draws from
// NormalStream(seed, k), so parallel fan-out over trajectories is
// reproducible independent of thread count and scheduling order.

#include <cstdint>
#include <random>
#include <utility>

namespace kfp::rng {

// SplitMix64 finalizer: a bijective 64-bit mix with full avalanche, used to
// derive decorrelated engine seeds from (seed, stream) pairs.
constexpr std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Deterministic stream of standard normal draws for one trajectory.
class NormalStream {
 public:
  NormalStream(std::uint64_t seed, std::uint64_t stream)
      : engine_(splitmix64(splitmix64(stream) ^
                           (seed * 0x9e3779b97f4a7c15ULL + 0x2545f4914f6cdd1dULL))) {}

  double next() { return normal_(engine_); }

  std::pair<double, double> pair() {
    const double a = next();
    return {a, next()};
  }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

}  // namespace kfp::rng
