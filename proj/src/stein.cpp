#include "steinlab/stein.hpp"

#include "steinlab/errors.hpp"
#include "steinlab/integrals.hpp"
#include "steinlab/parallel.hpp"
#include "steinlab/rng.hpp"
#include "steinlab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>

namespace steinlab {

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw EmptySampleError("normal_quantile: p must be in (0,1)");
    // Acklam's coefficients.
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double dd[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                2.445134137142996e+00, 3.754408661907416e+00};
    const double pl = 0.02425;
    double x;
    if (p < pl) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((dd[0] * q + dd[1]) * q + dd[2]) * q + dd[3]) * q + 1.0);
    } else if (p <= 1.0 - pl) {
        const double q = p - 0.5, r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((dd[0] * q + dd[1]) * q + dd[2]) * q + dd[3]) * q + 1.0);
    }
    // One Halley refinement.
    const double e = normal_cdf(x) - p;
    const double u = e * std::sqrt(2.0 * M_PI) * std::exp(0.5 * x * x);
    x = x - u / (1.0 + 0.5 * x * u);
    return x;
}

MeanVar mean_var(std::span<const double> xs) {
    MeanVar out;
    out.n = xs.size();
    if (out.n == 0) return out;
    KahanSum s;
    for (double v : xs) s.add(v);
    out.mean = s.value() / out.n;
    if (out.n < 2) return out;
    KahanSum s2, s4;
    for (double v : xs) {
        const double d = v - out.mean;
        s2.add(d * d);
        s4.add(d * d * d * d);
    }
    const double n = static_cast<double>(out.n);
    out.var = s2.value() / (n - 1.0);
    out.se_mean = std::sqrt(out.var / n);
    const double m4 = s4.value() / n;
    // Var(s^2) = (m4 - var^2 (n-3)/(n-1)) / n.
    const double vs2 = std::max(0.0, (m4 - out.var * out.var * (n - 3.0) / (n - 1.0)) / n);
    out.se_var = std::sqrt(vs2);
    return out;
}

double median_of(std::vector<double> xs) {
    if (xs.empty()) throw EmptySampleError("median_of: empty");
    const std::size_t mid = xs.size() / 2;
    std::nth_element(xs.begin(), xs.begin() + mid, xs.end());
    double hi = xs[mid];
    if (xs.size() % 2 == 1) return hi;
    const double lo = *std::max_element(xs.begin(), xs.begin() + mid);
    return 0.5 * (lo + hi);
}

SlopeFit fit_line(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    SlopeFit out;
    if (n < 2) return out;
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    out.slope = sxy / sxx;
    out.intercept = my - out.slope * mx;
    if (n > 2) {
        double rss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double r = y[i] - out.intercept - out.slope * x[i];
            rss += r * r;
        }
        out.slope_se = std::sqrt(rss / (n - 2) / sxx);
    }
    return out;
}

SlopeFit fit_loglog_slope(std::span<const double> x, std::span<const double> y) {
    std::vector<double> lx(x.size()), ly(y.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        lx[i] = std::log(x[i]);
        ly[i] = std::log(y[i]);
    }
    return fit_line(lx, ly);
}

namespace {

// W_1 of sorted samples against N(0,1): piecewise-closed-form integral of
// |F_n - Phi| using the antiderivative x Phi(x) + phi(x).
double w1_sorted(const std::vector<double>& xs) {
    const std::size_t n = xs.size();
    if (n == 0) throw EmptySampleError("wasserstein: empty sample");
    auto G = [](double t) { return normal_cdf_antideriv(t); };
    double total = G(xs.front()); // int_{-inf}^{x_(1)} Phi
    for (std::size_t i = 1; i < n; ++i) {
        const double a = xs[i - 1], b = xs[i];
        if (!(b > a)) continue;
        const double c = static_cast<double>(i) / n;
        const double fa = normal_cdf(a), fb = normal_cdf(b);
        if (fa < c && c < fb) {
            const double q = normal_quantile(c);
            total += std::fabs(c * (q - a) - (G(q) - G(a)));
            total += std::fabs(c * (b - q) - (G(b) - G(q)));
        } else {
            total += std::fabs(c * (b - a) - (G(b) - G(a)));
        }
    }
    total += G(xs.back()) - xs.back(); // int_{x_(n)}^{inf} (1 - Phi)
    return total;
}

} // namespace

double wasserstein_value(std::vector<double> samples) {
    std::sort(samples.begin(), samples.end());
    return w1_sorted(samples);
}

WassersteinEstimate wasserstein_to_gaussian(std::vector<double> samples, int n_bootstrap,
                                            int workers) {
    const std::size_t n = samples.size();
    if (n < 2) throw EmptySampleError("wasserstein_to_gaussian: need at least 2 samples");
    std::sort(samples.begin(), samples.end());
    WassersteinEstimate est;
    est.n_samples = n;
    est.value = w1_sorted(samples);

    if (n_bootstrap > 1) {
        std::vector<double> boots(n_bootstrap);
        parallel_chunks(n_bootstrap, 8, workers, [&](std::size_t b, std::size_t e) {
            std::vector<double> re(n);
            for (std::size_t r = b; r < e; ++r) {
                Rng rng(derive_seed(0xB007B007B007ULL, r));
                for (std::size_t i = 0; i < n; ++i)
                    re[i] = samples[static_cast<std::size_t>(rng.uniform() * n)];
                std::sort(re.begin(), re.end());
                boots[r] = w1_sorted(re);
            }
        });
        const MeanVar mv = mean_var(boots);
        est.std_error = std::sqrt(mv.var);
    }
    return est;
}

double classical_bound(const ScalarField& f) {
    const double k2 = cumulant(f, 2);
    return std::fabs(1.0 - k2) + abs_moment(f, 3);
}

double third_cumulant_bound(const ScalarField& f, const KernelEvaluator& ke) {
    if (!(ke.kd() > 0.0))
        throw ConfigError("third_cumulant_bound: estimate_kd must run first");
    const double k2 = cumulant(f, 2);
    const double k3 = cumulant(f, 3);
    const double vd = unit_ball_volume(f.dim);
    const double rprime = 2.0 * f.support_radius;
    const double rem = 2.0 * std::pow(ke.kd() * vd * rprime, 2) * std::sqrt(k2) *
                       f.stein_grad_bound * f.stein_grad_bound;
    return std::fabs(1.0 - k2) + std::fabs(k3) + rem;
}

double o1k_bound(const RadialFieldFamily& family, int k, const KernelEvaluator& ke,
                 bool* unbalanced) {
    if (!(ke.kd() > 0.0)) throw ConfigError("o1k_bound: estimate_kd must run first");
    if (k < 1) throw InvalidOrderError("o1k_bound: k must be >= 1");
    const double scale = std::max(family.int_abs_g3, 1e-300);
    const bool bad = std::fabs(family.int_g3) > 1e-6 * scale;
    if (unbalanced) *unbalanced = bad;
    if (bad) {
        std::cerr << "[steinlab] warning: o1k_bound on unbalanced profile "
                  << "(int g^3 r^{d-1} dr = " << family.int_g3 << ")\n";
    }
    const double vd = unit_ball_volume(family.dim);
    const double base = 2.0 * ke.kd() * vd * family.profile.R; // (2 K_d v_d R)
    return 2.0 * base * base * family.dim * family.profile.sup_gprime *
           family.profile.sup_gprime / (k * family.C * family.C);
}

BoundReport bound_report(const ScalarField& f, const KernelEvaluator& ke,
                         const RadialFieldFamily* family, int k) {
    BoundReport rep;
    const double k2 = cumulant(f, 2);
    const double gap = std::fabs(1.0 - k2);
    rep.classical_parts.variance_gap = gap;
    rep.classical_parts.cumulant_term = abs_moment(f, 3);
    rep.classical = rep.classical_parts.variance_gap + rep.classical_parts.cumulant_term;

    rep.third_parts.variance_gap = gap;
    rep.third_parts.cumulant_term = std::fabs(cumulant(f, 3));
    const double vd = unit_ball_volume(f.dim);
    rep.third_parts.remainder = 2.0 * std::pow(ke.kd() * vd * 2.0 * f.support_radius, 2) *
                                std::sqrt(k2) * f.stein_grad_bound * f.stein_grad_bound;
    rep.third_cumulant = rep.third_parts.variance_gap + rep.third_parts.cumulant_term +
                         rep.third_parts.remainder;

    rep.kd_used = ke.kd();
    rep.kd_is_empirical = true;
    if (family && k >= 1) {
        // The O(1/k) bound only applies to cubically balanced profiles.
        const double scale = std::max(family->int_abs_g3, 1e-300);
        if (std::fabs(family->int_g3) <= 1e-6 * scale) rep.o1k = o1k_bound(*family, k, ke);
    }
    return rep;
}

std::vector<double> mc_samples(const ScalarField& f, const McSettings& mc) {
    const double carrier = norm2(f.support_center) + f.support_radius;
    std::vector<double> samples(mc.replications);
    parallel_chunks(mc.replications, mc.chunk, mc.workers, [&](std::size_t b, std::size_t e) {
        for (std::size_t rep = b; rep < e; ++rep) {
            SamplerSpec sp{f.dim, carrier, derive_seed(mc.master_seed, rep)};
            const Configuration cfg = sample_configuration(sp);
            samples[rep] = compensated_integral(f, cfg);
        }
    });
    return samples;
}

WassersteinEstimate mc_distance(const ScalarField& f, const McSettings& mc) {
    return wasserstein_to_gaussian(mc_samples(f, mc), 200, mc.workers);
}

} // namespace steinlab
