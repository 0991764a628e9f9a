#include "steinlab/fields.hpp"

#include "steinlab/errors.hpp"
#include "steinlab/quadrature.hpp"

#include <cmath>

namespace steinlab {

namespace {

double scan_sup_abs(const std::function<double(double)>& f, double a, double b, int n = 4096) {
    double m = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double v = std::fabs(f(a + (b - a) * i / n));
        if (v > m) m = v;
    }
    return m;
}

} // namespace

ScalarField make_radial_field(int dim, std::vector<double> center, double support_radius,
                              std::function<double(double)> prof,
                              std::function<double(double)> prof_deriv,
                              double sup_prof_deriv) {
    ScalarField f;
    f.dim = dim;
    f.support_center = std::move(center);
    f.support_radius = support_radius;
    f.is_radial = true;
    f.radial_value = prof;
    f.radial_deriv = prof_deriv;

    const std::vector<double> c = f.support_center;
    const double rad = support_radius;
    f.value = [c, rad, prof, dim](std::span<const double> x) {
        double r2 = 0.0;
        for (int j = 0; j < dim; ++j) {
            const double t = x[j] - c[j];
            r2 += t * t;
        }
        if (r2 >= rad * rad) return 0.0;
        return prof(std::sqrt(r2));
    };
    f.gradient = [c, rad, prof_deriv, dim](std::span<const double> x, std::span<double> out) {
        double r2 = 0.0;
        for (int j = 0; j < dim; ++j) {
            const double t = x[j] - c[j];
            out[j] = t;
            r2 += t * t;
        }
        const double r = std::sqrt(r2);
        if (r >= rad || r < 1e-14) {
            for (int j = 0; j < dim; ++j) out[j] = 0.0;
            return;
        }
        const double s = prof_deriv(r) / r;
        for (int j = 0; j < dim; ++j) out[j] *= s;
    };

    f.sup_grad_norm = sup_prof_deriv >= 0.0 ? sup_prof_deriv
                                            : scan_sup_abs(prof_deriv, 0.0, support_radius);
    f.stein_grad_bound = f.sup_grad_norm;

    const double sd = sphere_surface_const(dim);
    f.compensator = sd * adaptive_simpson(
                             [&prof, dim](double r) { return prof(r) * std::pow(r, dim - 1); },
                             0.0, support_radius, 1e-10);
    return f;
}

ScalarField make_bump_field(int dim, std::vector<double> center, double rho, double amplitude) {
    if (amplitude < 0.0) {
        // Unit mass: A * rho^d * I_d = 1 with I_d the unit-ball integral of
        // the mollifier shape.
        const double sd = sphere_surface_const(dim);
        const double shape_int = sd * adaptive_simpson(
                                          [dim](double s) {
                                              const double q = 1.0 - s * s;
                                              if (q <= 0.0) return 0.0;
                                              return std::exp(-1.0 / q) * std::pow(s, dim - 1);
                                          },
                                          0.0, 1.0, 1e-12);
        amplitude = 1.0 / (shape_int * std::pow(rho, dim));
    }
    const double A = amplitude;
    auto prof = [A, rho](double r) {
        const double z = r / rho;
        const double q = 1.0 - z * z;
        if (q <= 0.0) return 0.0;
        return A * std::exp(-1.0 / q);
    };
    auto dprof = [A, rho](double r) {
        const double z = r / rho;
        const double q = 1.0 - z * z;
        if (q <= 0.0) return 0.0;
        return A * std::exp(-1.0 / q) * (-2.0 * z / (rho * q * q));
    };
    return make_radial_field(dim, std::move(center), rho, prof, dprof);
}

ScalarField make_zero_field(int dim, double support_radius) {
    ScalarField f;
    f.dim = dim;
    f.support_center.assign(dim, 0.0);
    f.support_radius = support_radius;
    f.is_radial = true;
    f.radial_value = [](double) { return 0.0; };
    f.radial_deriv = [](double) { return 0.0; };
    f.value = [](std::span<const double>) { return 0.0; };
    f.gradient = [dim](std::span<const double>, std::span<double> out) {
        for (int j = 0; j < dim; ++j) out[j] = 0.0;
    };
    f.compensator = 0.0;
    return f;
}

ScalarField RadialFieldFamily::member(int k) const {
    if (k < 1) throw InvalidOrderError("RadialFieldFamily::member: k must be >= 1");
    const double scale = std::pow(static_cast<double>(k), 1.0 / dim);
    const double amp = 1.0 / (C * std::sqrt(static_cast<double>(k)));
    const auto g = profile.g;
    const auto gp = profile.gprime;
    auto prof = [g, scale, amp](double r) { return amp * g(r / scale); };
    auto dprof = [gp, scale, amp](double r) { return amp / scale * gp(r / scale); };
    const double sup_deriv = profile.sup_gprime * amp / scale;
    ScalarField f = make_radial_field(dim, std::vector<double>(dim, 0.0), profile.R * scale,
                                      prof, dprof, sup_deriv);
    // The Stein bounds use the looser gradient bound with the extra sqrt(d).
    f.stein_grad_bound = sup_deriv * std::sqrt(static_cast<double>(dim));
    // Exact scaling of the compensator: sqrt(k) * s_d * int g / C.
    f.compensator = std::sqrt(static_cast<double>(k)) * sphere_surface_const(dim) * int_g1 / C;
    return f;
}

} // namespace steinlab
