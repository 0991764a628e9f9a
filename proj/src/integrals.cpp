#include "steinlab/integrals.hpp"

#include "steinlab/errors.hpp"
#include "steinlab/geometry.hpp"
#include "steinlab/quadrature.hpp"

#include <cmath>

namespace steinlab {

double compensated_integral(const ScalarField& f, const Configuration& cfg) {
    const double reach = norm2(f.support_center) + f.support_radius;
    if (reach > cfg.radius * (1.0 + 1e-12)) {
        throw SupportExceedsCarrierError(
            "compensated_integral: field support exceeds the carrier ball");
    }
    const double rad_sq = f.support_radius * f.support_radius;
    double s = 0.0, c = 0.0;
    const std::size_t n = cfg.size();
    for (std::size_t i = 0; i < n; ++i) {
        const auto p = cfg.point(i);
        if (dist_sq(p, f.support_center) >= rad_sq) continue;
        const double y = f.value(p) - c;
        const double t = s + y;
        c = (t - s) - y;
        s = t;
    }
    return s - f.compensator;
}

namespace {

double radial_power_integral(const ScalarField& f, int k, double rel_tol = 1e-8) {
    const int d = f.dim;
    return sphere_surface_const(d) *
           adaptive_simpson(
               [&f, k, d](double r) {
                   return std::pow(f.radial_value(r), k) * std::pow(r, d - 1);
               },
               0.0, f.support_radius, rel_tol);
}

} // namespace

double cumulant(const ScalarField& f, int k) {
    if (k < 2) throw InvalidOrderError("cumulant: order must be >= 2");
    if (f.is_radial) return radial_power_integral(f, k);
    BallGrid grid(f.dim, f.support_radius, 96, 128);
    const auto& c = f.support_center;
    return grid.integrate([&](std::span<const double> z) {
        std::vector<double> x(f.dim);
        for (int j = 0; j < f.dim; ++j) x[j] = z[j] + c[j];
        return std::pow(f.value(x), k);
    });
}

double abs_moment(const ScalarField& f, int p) {
    if (f.is_radial) {
        const int d = f.dim;
        return sphere_surface_const(d) *
               adaptive_simpson(
                   [&f, p, d](double r) {
                       return std::pow(std::fabs(f.radial_value(r)), p) * std::pow(r, d - 1);
                   },
                   0.0, f.support_radius, 1e-8);
    }
    BallGrid grid(f.dim, f.support_radius, 96, 128);
    const auto& c = f.support_center;
    return grid.integrate([&](std::span<const double> z) {
        std::vector<double> x(f.dim);
        for (int j = 0; j < f.dim; ++j) x[j] = z[j] + c[j];
        return std::pow(std::fabs(f.value(x)), p);
    });
}

double l2_norm(const ScalarField& f) { return std::sqrt(cumulant(f, 2)); }

RadialFieldFamily build_radial_family(const RadialProfile& profile, int dim) {
    RadialFieldFamily fam;
    fam.profile = profile;
    fam.dim = dim;
    auto base = [&profile, dim](int pow_j, bool absval) {
        return adaptive_simpson(
            [&profile, dim, pow_j, absval](double r) {
                const double g = profile.g(r);
                const double gp = absval ? std::pow(std::fabs(g), pow_j)
                                         : std::pow(g, pow_j);
                return gp * std::pow(r, dim - 1);
            },
            0.0, profile.R, 1e-10);
    };
    fam.int_g1 = base(1, false);
    fam.int_g2 = base(2, false);
    fam.int_g3 = base(3, false);
    fam.int_abs_g3 = base(3, true);
    const double c_sq = sphere_surface_const(dim) * fam.int_g2;
    if (!(c_sq > 1e-300)) {
        throw DegenerateProfileError("build_radial_family: int g^2 r^{d-1} dr vanishes");
    }
    fam.C = std::sqrt(c_sq);
    return fam;
}

} // namespace steinlab
