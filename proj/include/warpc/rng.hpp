// Copyright (c) 2026 the warpc authors.
// Licensed under the Apache License, Version 2.0.
//
// Seeded generator with explicit uniform/normal mappings. std::* distributions
// are implementation-defined, so draws are derived from raw mt19937_64 output
// directly: same seed, same sequence, everywhere.

#ifndef WARPC_RNG_HPP
#define WARPC_RNG_HPP

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace warpc {

class Rng {
public:
    explicit Rng(uint64_t seed) : gen_(seed) {}

    /// Uniform in [0, 1) with 53-bit resolution.
    double unit() { return (gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }

    /// Standard normal via Box-Muller; draws two uniforms per pair.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = unit();
        while (u1 <= 0.0) u1 = unit();
        const double u2 = unit();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    /// Uniform integer in [lo, hi] inclusive.
    int uniform_int(int lo, int hi) {
        return lo + static_cast<int>(unit() * (hi - lo + 1));
    }

    /// Derive an independent child stream; used to fan out work by index.
    Rng fork(uint64_t stream) {
        return Rng(gen_() ^ (0x9e3779b97f4a7c15ULL * (stream + 1)));
    }

private:
    std::mt19937_64 gen_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace warpc

#endif  // WARPC_RNG_HPP
