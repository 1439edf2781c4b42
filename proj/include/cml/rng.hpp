#pragma once

#include <cstdint>
#include <random>

namespace cml {

// Counter-based seed splitting: replica r of master seed s gets
// derive_seed(s, r). splitmix64 finalizer keeps streams decorrelated.
inline std::uint64_t splitmix64_next(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t s = master ^ (0x9e3779b97f4a7c15ull * (index + 1));
  return splitmix64_next(s);
}

// uniform_real_distribution is implementation-defined; this conversion is not.
inline double u64_to_unit(std::uint64_t x) { return (x >> 11) * 0x1.0p-53; }

struct Rng {
  std::mt19937_64 gen;
  explicit Rng(std::uint64_t seed) : gen(seed) {}
  double uniform() { return u64_to_unit(gen()); }            // [0,1)
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
};

// Stateless per-(step, site) dither value, identical regardless of the
// loop order that consumes it.
inline double dither_value(std::uint64_t seed, std::uint64_t step,
                           std::uint64_t site) {
  std::uint64_t s = seed ^ (step * 0xd1342543de82ef95ull) ^
                    (site * 0xaf251af3b0f025b5ull);
  return u64_to_unit(splitmix64_next(s));
}

}  // namespace cml
