#pragma once

#include "steinlab/fields.hpp"
#include "steinlab/kernel.hpp"
#include "steinlab/sampling.hpp"

#include <optional>
#include <vector>

namespace steinlab {

struct WassersteinEstimate {
    double value = 0.0;
    double std_error = 0.0;   // bootstrap
    std::size_t n_samples = 0;
};

// Exact L^1 distance between the empirical CDF of the samples and the
// standard normal CDF (equals W_1 in one dimension), integrated in closed
// form between order statistics. Bootstrap standard error over `n_bootstrap`
// resamples; deterministic given the samples.
WassersteinEstimate wasserstein_to_gaussian(std::vector<double> samples,
                                            int n_bootstrap = 200, int workers = 1);

// W_1 value only (no bootstrap); samples are copied and sorted.
double wasserstein_value(std::vector<double> samples);

struct BoundComponents {
    double variance_gap = 0.0;  // |1 - ||f||_2^2|
    double cumulant_term = 0.0; // int |f|^3 (classical) or |kappa_3| (third-cumulant)
    double remainder = 0.0;     // 2 (K_d v_d R')^2 ||f||_2 ||grad f||_inf^2
};

struct BoundReport {
    double classical = 0.0;
    BoundComponents classical_parts;
    double third_cumulant = 0.0;
    BoundComponents third_parts;
    std::optional<double> o1k;
    double kd_used = 0.0;
    bool kd_is_empirical = true;
};

// |1 - ||f||_2^2| + int |f|^3 dLebesgue.
double classical_bound(const ScalarField& f);

// |1 - ||f||_2^2| + |kappa_3| + 2 (K_d v_d R')^2 ||f||_2 ||grad f||_inf^2,
// with R' = 2 * support radius of f and the empirical K_d.
double third_cumulant_bound(const ScalarField& f, const KernelEvaluator& ke);

// Closed form 2 (2 K_d v_d R)^2 d ||g'||_inf^2 / (k C^2) for a cubically
// balanced profile. Emits a warning (and sets *unbalanced) when
// int g^3 r^{d-1} dr does not vanish.
double o1k_bound(const RadialFieldFamily& family, int k, const KernelEvaluator& ke,
                 bool* unbalanced = nullptr);

BoundReport bound_report(const ScalarField& f, const KernelEvaluator& ke,
                         const RadialFieldFamily* family = nullptr, int k = 0);

// Empirical W_1 of delta(f) against the standard Gaussian: draws
// configurations on the field's carrier ball, one compensated integral per
// replication. Deterministic given the seed.
WassersteinEstimate mc_distance(const ScalarField& f, const McSettings& mc);

// Raw sample of delta(f) values (ordered by replication index).
std::vector<double> mc_samples(const ScalarField& f, const McSettings& mc);

} // namespace steinlab
