#pragma once

#include "steinlab/fields.hpp"
#include "steinlab/sampling.hpp"

namespace steinlab {

// Compensated Poisson integral of a deterministic field for one realization:
// sum_i f(X_i) - int f dLebesgue (the compensator is cached on the field).
double compensated_integral(const ScalarField& f, const Configuration& cfg);

// k-th cumulant of the compensated integral: kappa_k = int f^k dLebesgue,
// k >= 2. Radial fields reduce to a 1-D integral.
double cumulant(const ScalarField& f, int k);

// int |f|^p dLebesgue (p = 3 enters the classical Stein bound).
double abs_moment(const ScalarField& f, int p);

// L^2 norm of the field.
double l2_norm(const ScalarField& f);

// Normalizes C so that ||f_1||_{L^2(B(R))} = 1 exactly:
// C^2 = s_d int_0^R g(r)^2 r^{d-1} dr.
RadialFieldFamily build_radial_family(const RadialProfile& profile, int dim);

} // namespace steinlab
