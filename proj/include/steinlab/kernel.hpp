#pragma once

#include "steinlab/fields.hpp"
#include "steinlab/geometry.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace steinlab {

// Smooth unit-mass mollifier A * exp(-1/(1-|z|^2)), z = (x - center)/rho,
// supported on B(center, rho). The support must lie in the annulus
// B(R') \ B(R); placement in the half-space {x^(1) > R} makes the kernel
// compatible with the first-coordinate order (halfspace_ok records this, and
// deliberately misplaced bumps are allowed as negative controls).
struct BumpFunction {
    int dim = 2;
    std::vector<double> center;
    double rho = 0.25;
    double amplitude = 1.0;
    bool halfspace_ok = true;

    double value(std::span<const double> x) const;
};

// Validates the annulus constraint for carrier radius R (R' = 2R).
BumpFunction make_bump_function(int dim, std::vector<double> center, double rho, double R);

// Default placement: center (3R/2, 0, ..., 0), rho = R/4.
BumpFunction make_default_bump(int dim, double R);

struct QuadraturePolicy {
    int gl_nodes = 64;              // kernel line integrals (config: kernel.nodes)
    double rel_tol = 1e-8;          // doubling target (config: kernel.tol)
    double epsilon_excision = 1e-3; // times R, for atom-vs-probe evaluations
    int angular_nodes = 32;         // nodes across the bump's angular window
    int radial_nodes = 48;          // nodes along ray segments
};

// The divergence-inverting kernel G_eta on B(R') x B(R'), realized through
// the substitution t = 1/s as a line integral of eta along the ray from y
// through x. Oriented so that h(y) = int <G_eta(x,y), grad h(x)> dx holds for
// h compactly supported in B(R). Immutable after construction (estimate_kd is
// part of setup) and safe to share across threads.
class KernelEvaluator {
public:
    KernelEvaluator(BumpFunction eta, double R, QuadraturePolicy policy = {});

    int dim() const { return dim_; }
    double R() const { return R_; }
    double Rprime() const { return Rprime_; }
    const BumpFunction& eta() const { return eta_; }
    const QuadraturePolicy& policy() const { return policy_; }
    double excision_radius() const { return policy_.epsilon_excision * R_; }

    // Empirical pointwise-bound constant; 0 until estimate_kd has run.
    double kd() const { return kd_empirical_; }
    void set_kd(double kd) { kd_empirical_ = kd; }

    // G_eta(x, y) written to out (size dim). Throws CoincidentPointsError when
    // |x - y| < 1e-12.
    void eval(std::span<const double> x, std::span<const double> y,
              std::span<double> out) const;
    double eval_norm(std::span<const double> x, std::span<const double> y) const;

    // V_g(x) = int G_eta(x, y) g(y) dy. The source-centered polar substitution
    // cancels the |x-y|^{1-d} singularity exactly, so no excision is needed on
    // this path.
    void apply_at(const ScalarField& g, std::span<const double> x,
                  std::span<double> out) const;

    // Quadrature of int <G_eta(x, y), grad h(x)> dx (the inversion identity's
    // right-hand side) at probe y.
    double divergence_rhs(const ScalarField& h, std::span<const double> y) const;

    // max over probes of |h(y) - divergence_rhs(h, y)|.
    double verify_divergence_identity(const ScalarField& h,
                                      const std::vector<std::vector<double>>& probes) const;

    // sup over sampled pairs of |G(x,y)| |x-y|^{d-1}, times a 1.2 safety
    // factor; stores and returns the estimate. Deterministic given the seed.
    double estimate_kd(std::size_t n_pairs, std::uint64_t seed);

private:
    // eta integrated along p + s*u with weight s^m, s in [lo, hi].
    double line_moment(std::span<const double> p, std::span<const double> u, int m,
                       double lo, double hi) const;
    // Intersection of the ray {p + s*u : s >= 0} with supp(eta); false if empty.
    bool eta_window(std::span<const double> p, std::span<const double> u, double& s0,
                    double& s1) const;

    BumpFunction eta_;
    int dim_;
    double R_;
    double Rprime_;
    QuadraturePolicy policy_;
    double kd_empirical_ = 0.0;
};

// Intersection of {p + t*u : t >= 0} (u unit) with the ball B(c, rho);
// returns false if empty.
bool ray_ball_window(std::span<const double> p, std::span<const double> u,
                     std::span<const double> c, double rho, double& t0, double& t1);

} // namespace steinlab
