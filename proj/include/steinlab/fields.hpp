#pragma once

#include "steinlab/geometry.hpp"

#include <functional>
#include <span>
#include <vector>

namespace steinlab {

// Compactly supported C^1 scalar field on a ball B(support_center,
// support_radius), with evaluable gradient. The compensator (integral against
// Lebesgue measure) is fixed once at construction; Monte Carlo loops never
// re-integrate.
struct ScalarField {
    int dim = 2;
    std::vector<double> support_center;
    double support_radius = 1.0;
    std::function<double(std::span<const double>)> value;
    std::function<void(std::span<const double>, std::span<double>)> gradient;
    double sup_grad_norm = 0.0;   // exact for radial fields, sampled otherwise
    double stein_grad_bound = 0.0; // gradient norm used inside Stein-type bounds
    bool is_radial = false;        // f(x) = radial_value(|x - support_center|)
    std::function<double(double)> radial_value;
    std::function<double(double)> radial_deriv;
    double compensator = 0.0;      // int f dLebesgue

    double operator()(std::span<const double> x) const { return value(x); }
};

// Radial field from a 1-D profile; the gradient is prof'(r) * (x-c)/r.
// sup|prof'| is located by dense scan when not supplied.
ScalarField make_radial_field(int dim, std::vector<double> center, double support_radius,
                              std::function<double(double)> prof,
                              std::function<double(double)> prof_deriv,
                              double sup_prof_deriv = -1.0);

// Standard mollifier profile A * exp(-1/(1 - (r/rho)^2)) centered at `center`.
// amplitude < 0 means: normalize so the field integrates to one.
ScalarField make_bump_field(int dim, std::vector<double> center, double rho,
                            double amplitude = -1.0);

ScalarField make_zero_field(int dim, double support_radius = 1.0);

// C^1 profile on [0, R] with g(R) = 0.
struct RadialProfile {
    std::function<double(double)> g;
    std::function<double(double)> gprime;
    double R = 1.0;
    double sup_gprime = 0.0;
};

// The scaled family f_k(x) = g(|x|/k^{1/d}) / (C sqrt(k)) on B(R k^{1/d}),
// normalized so every member has unit L^2 norm.
struct RadialFieldFamily {
    RadialProfile profile;
    int dim = 2;
    double C = 1.0;
    // Cached base integrals int_0^R g^j r^{d-1} dr.
    double int_g1 = 0.0, int_g2 = 0.0, int_g3 = 0.0, int_abs_g3 = 0.0;

    ScalarField member(int k) const;
};

} // namespace steinlab
