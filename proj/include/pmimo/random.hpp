#pragma once

#include "pmimo/types.hpp"

#include <cstdint>
#include <initializer_list>
#include <random>

namespace pmimo {

/// A single random stream. Streams are cheap to create; every independent
/// consumer (profile, trial, ...) gets its own so results do not depend on
/// execution order.
class Stream {
public:
    explicit Stream(std::uint64_t seed) : engine_(seed) {}

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
    double normal() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }

    /// Circular complex Gaussian with E|z|^2 = variance.
    cplx complex_normal(double variance) {
        const double s = std::sqrt(variance / 2.0);
        const double re = normal();
        const double im = normal();
        return {s * re, s * im};
    }

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

/// Counter-based derivation: the stream for (seed, path...) is a pure
/// function of its coordinates.
Stream derive_stream(std::uint64_t seed, std::initializer_list<std::uint64_t> path);

}  // namespace pmimo
