#pragma once

#include <functional>
#include <span>
#include <vector>

namespace steinlab {

// Gauss-Legendre rule on [-1, 1]. Interned per node count; references stay
// valid for the program lifetime.
struct GLRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

const GLRule& gl_rule(int n);

// Integrate f over [a, b] with an n-point Gauss-Legendre rule.
double gl_integrate(const std::function<double(double)>& f, double a, double b, int n);

// Gauss-Legendre with node doubling until |I_2n - I_n| <= rel_tol * |I_2n| (or
// an absolute floor for near-zero integrals). Throws QuadratureBudgetExceeded
// after max_doublings if tolerance is not reached.
struct AdaptiveGLPolicy {
    int start_nodes = 64;
    double rel_tol = 1e-8;
    int max_doublings = 6;
    double abs_floor = 1e-14;
};
double adaptive_gl(const std::function<double(double)>& f, double a, double b,
                   const AdaptiveGLPolicy& policy);

// Recursive adaptive Simpson with relative tolerance (absolute floor for
// integrals near zero).
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double rel_tol, int max_depth = 48);

// Quadrature nodes over the ball B(0, R) in R^d, d = 2 or 3, in polar
// factorization: Gauss-Legendre in radius times a sphere rule (uniform angles
// for d = 2; Gauss-Legendre in cos(theta) times uniform phi for d = 3).
// Weights include the r^{d-1} Jacobian, so integrate() is a plain dot product.
class BallGrid {
public:
    BallGrid(int dim, double radius, int n_radial, int n_sphere);

    int dim() const { return dim_; }
    double radius() const { return radius_; }
    std::size_t size() const { return weights_.size(); }
    std::span<const double> point(std::size_t i) const {
        return {points_.data() + i * dim_, static_cast<std::size_t>(dim_)};
    }
    double weight(std::size_t i) const { return weights_[i]; }

    double integrate(const std::function<double(std::span<const double>)>& f) const;

private:
    int dim_;
    double radius_;
    std::vector<double> points_;  // flat, size() * dim
    std::vector<double> weights_;
};

} // namespace steinlab
