#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace steinlab {

inline double normal_pdf(double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Antiderivative of the normal CDF: d/dx (x Phi(x) + phi(x)) = Phi(x).
inline double normal_cdf_antideriv(double x) { return x * normal_cdf(x) + normal_pdf(x); }

// Inverse normal CDF: Acklam's rational approximation refined by one Halley
// step against erfc; accurate to ~1e-15 over (0, 1).
double normal_quantile(double p);

struct MeanVar {
    double mean = 0.0;
    double var = 0.0;       // unbiased
    double se_mean = 0.0;   // sd / sqrt(n)
    double se_var = 0.0;    // standard error of the sample variance
    std::size_t n = 0;
};

MeanVar mean_var(std::span<const double> xs);

double median_of(std::vector<double> xs);

struct SlopeFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_se = 0.0;
};

// Least squares of y against x.
SlopeFit fit_line(std::span<const double> x, std::span<const double> y);

// Least squares of log(y) against log(x); inputs must be positive.
SlopeFit fit_loglog_slope(std::span<const double> x, std::span<const double> y);

} // namespace steinlab
