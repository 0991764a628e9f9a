#pragma once

#include <cmath>
#include <span>
#include <vector>

namespace steinlab {

// Volume of the unit ball in R^d: pi^{d/2} / Gamma(d/2 + 1).
inline double unit_ball_volume(int d) {
    return std::pow(M_PI, 0.5 * d) / std::tgamma(0.5 * d + 1.0);
}

// Volume of B(0, R) in R^d.
inline double ball_volume(int d, double R) {
    return unit_ball_volume(d) * std::pow(R, d);
}

// Surface constant s_d = d * v_d, so that int_{B(R)} phi(|x|) dx = s_d * int_0^R phi(r) r^{d-1} dr.
inline double sphere_surface_const(int d) {
    return d * unit_ball_volume(d);
}

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2_sq(std::span<const double> a) {
    double s = 0.0;
    for (double v : a) s += v * v;
    return s;
}

inline double norm2(std::span<const double> a) { return std::sqrt(norm2_sq(a)); }

inline double dist_sq(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double t = a[i] - b[i];
        s += t * t;
    }
    return s;
}

inline double dist(std::span<const double> a, std::span<const double> b) {
    return std::sqrt(dist_sq(a, b));
}

} // namespace steinlab
