#ifndef DTSPP_RNG_HPP
#define DTSPP_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>

namespace dtspp {

/// splitmix64 step; used to derive independent stream seeds from a master
/// seed so per-region / per-restart work is order-independent.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t salt) {
    std::uint64_t s = master ^ (0x6a09e667f3bcc909ULL + salt * 0x9e3779b97f4a7c15ULL);
    return splitmix64(s);
}

/// Uniform integer in [0, bound) by threshold rejection; unbiased and
/// engine-portable (no distribution-object implementation variance).
inline std::uint64_t bounded_uint(std::mt19937_64& eng, std::uint64_t bound) {
    if (bound <= 1) return 0;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t x;
    do {
        x = eng();
    } while (x >= limit);
    return x % bound;
}

/// Uniform double in (0, 1).
inline double uniform_open(std::mt19937_64& eng) {
    return (static_cast<double>(eng() >> 11) + 0.5) * (1.0 / 9007199254740992.0);
}

/// Standard normal via Box-Muller (second variate discarded; keeps the
/// draw sequence stateless with respect to call sites).
inline double gaussian(std::mt19937_64& eng) {
    const double u1 = uniform_open(eng);
    const double u2 = uniform_open(eng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

}  // namespace dtspp

#endif
