#pragma once

#include <cstdint>
#include <random>

namespace perms {

using Rng = std::mt19937_64;

// stream tags for derive_seed
enum : std::uint64_t {
  kStreamUniform = 1,
  kStreamLogistic,
  kStreamPrior,
  kStreamMh,
  kStreamUrn,
  kStreamStick,
  kStreamPyramid,
  kStreamChangepoint,
  kStreamBioassay,
  kStreamBenchDesign,
  kStreamBenchLatent,
  kStreamOracleCheck,
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Independent stream for (seed, stream tag, row index).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  return splitmix64(splitmix64(splitmix64(seed) ^ stream) ^ index);
}

inline Rng make_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t index = 0) {
  return Rng(derive_seed(seed, stream, index));
}

// Uniform on the open interval (0, 1).
inline double uniform_open(Rng& rng) {
  for (;;) {
    const double u = std::generate_canonical<double, 53>(rng);
    if (u > 0.0) return u;
  }
}

inline double draw_beta(Rng& rng, double a, double b) {
  std::gamma_distribution<double> ga(a, 1.0), gb(b, 1.0);
  const double x = ga(rng);
  const double y = gb(rng);
  return x / (x + y);
}

}  // namespace perms
