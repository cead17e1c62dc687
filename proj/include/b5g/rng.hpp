#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace b5g {

using Rng = std::mt19937_64;

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Sub-seed for a labelled stream. The result depends only on the master seed
// and the ordered tags, never on the order in which streams are consumed.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> tags) noexcept {
    std::uint64_t s = mix64(master);
    for (auto t : tags) s = mix64(s ^ mix64(t + 0x632be59bd9b4e019ULL));
    return s;
}

// Stream tags. Values are part of the reproducibility contract.
namespace stream {
inline constexpr std::uint64_t layout = 1;
inline constexpr std::uint64_t shadowing = 2;
inline constexpr std::uint64_t fading = 3;
inline constexpr std::uint64_t pilot_noise = 4;
inline constexpr std::uint64_t los_phase = 5;
inline constexpr std::uint64_t irs_fading = 6;
} // namespace stream

// CN(0, variance)
inline std::complex<double> complex_normal(Rng& rng, double variance) {
    std::normal_distribution<double> n(0.0, 1.0);
    const double s = std::sqrt(variance / 2.0);
    const double re = n(rng);
    const double im = n(rng);
    return {s * re, s * im};
}

} // namespace b5g
