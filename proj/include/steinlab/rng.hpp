#pragma once

#include <cmath>
#include <cstdint>
#include <span>

namespace steinlab {

namespace detail {
// SplitMix64 finalizer (Stafford mix 13).
inline std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ULL;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return z;
}
} // namespace detail

// Stream splitting: maps (master seed, replication index) to an independent
// stream seed. Pure 64-bit mixing, so replication i is reachable without
// drawing the preceding streams.
inline std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t index) {
    std::uint64_t h = detail::mix64(master_seed + 0x9E3779B97F4A7C15ULL);
    h = detail::mix64(h ^ detail::mix64(index + 0x632BE59BD9B4E019ULL));
    return h;
}

// Counter-style 64-bit generator (SplitMix64). All distributions are
// implemented explicitly so streams are identical across platforms.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ULL;
        return detail::mix64(state_);
    }

    // Uniform on [0, 1) with 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform on (0, 1): rejects exact zeros (safe for logs).
    double uniform_pos() {
        double u;
        do { u = uniform(); } while (u <= 0.0);
        return u;
    }

    // Standard normal, Marsaglia polar method. Values are generated in pairs
    // and the spare is cached.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double a, b, s;
        do {
            a = 2.0 * uniform() - 1.0;
            b = 2.0 * uniform() - 1.0;
            s = a * a + b * b;
        } while (s >= 1.0 || s == 0.0);
        const double m = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = b * m;
        have_spare_ = true;
        return a * m;
    }

    // Poisson(mean): multiplicative inversion below 30, PTRS transformed
    // rejection (Hormann 1993) above.
    std::uint64_t poisson(double mean) {
        if (mean <= 0.0) return 0;
        if (mean < 30.0) return poisson_inversion(mean);
        return poisson_ptrs(mean);
    }

    // Uniform point in B(0, R) in R^d: Gaussian direction, radius R * U^{1/d}.
    void point_in_ball(int d, double R, std::span<double> out) {
        double n2;
        do {
            n2 = 0.0;
            for (int j = 0; j < d; ++j) {
                const double g = normal();
                out[j] = g;
                n2 += g * g;
            }
        } while (n2 == 0.0);
        const double r = R * std::pow(uniform_pos(), 1.0 / d);
        const double scale = r / std::sqrt(n2);
        for (int j = 0; j < d; ++j) out[j] *= scale;
    }

private:
    std::uint64_t poisson_inversion(double mean) {
        const double limit = std::exp(-mean);
        std::uint64_t k = 0;
        double prod = uniform_pos();
        while (prod > limit) {
            ++k;
            prod *= uniform_pos();
        }
        return k;
    }

    std::uint64_t poisson_ptrs(double mean) {
        const double b = 0.931 + 2.53 * std::sqrt(mean);
        const double a = -0.059 + 0.02483 * b;
        const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
        const double v_r = 0.9277 - 3.6224 / (b - 2.0);
        const double log_mean = std::log(mean);
        for (;;) {
            const double u = uniform() - 0.5;
            const double v = uniform_pos();
            const double us = 0.5 - std::fabs(u);
            const double kf = std::floor((2.0 * a / us + b) * u + mean + 0.43);
            if (us >= 0.07 && v <= v_r) return static_cast<std::uint64_t>(kf);
            if (kf < 0.0 || (us < 0.013 && v > us)) continue;
            if (std::log(v * inv_alpha / (a / (us * us) + b)) <=
                kf * log_mean - mean - std::lgamma(kf + 1.0)) {
                return static_cast<std::uint64_t>(kf);
            }
        }
    }

    std::uint64_t state_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace steinlab
