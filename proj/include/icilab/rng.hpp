#pragma once

#include <cstdint>
#include <random>

namespace icilab {

// Deterministic seed mixing for independent per-cell streams.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    return splitmix64(a ^ splitmix64(b));
}

// Uniform in (0, 1]; avoids the distribution classes so sequences are
// fully specified by the standard.
inline double uniform_unit(std::mt19937_64& rng) {
    return static_cast<double>((rng() >> 11) + 1) * 0x1p-53;
}

// One Box-Muller pair per call.
inline void gaussian_pair(std::mt19937_64& rng, double& z0, double& z1) {
    const double u1 = uniform_unit(rng);
    const double u2 = uniform_unit(rng);
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    z0 = r * std::cos(a);
    z1 = r * std::sin(a);
}

}  // namespace icilab
