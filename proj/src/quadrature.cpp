#include "steinlab/quadrature.hpp"

#include "steinlab/errors.hpp"

#include <cmath>
#include <map>
#include <mutex>

namespace steinlab {

namespace {

// Nodes and weights by Newton iteration on P_n; standard construction.
GLRule build_gl_rule(int n) {
    GLRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
            }
            pp = n * (x * p0 - p1) / (x * x - 1.0);
            const double dx = p0 / pp;
            x -= dx;
            if (std::fabs(dx) < 1e-15) break;
        }
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        const double w = 2.0 / ((1.0 - x * x) * pp * pp);
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    return rule;
}

} // namespace

const GLRule& gl_rule(int n) {
    static std::map<int, GLRule> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, build_gl_rule(n)).first;
    return it->second;
}

double gl_integrate(const std::function<double(double)>& f, double a, double b, int n) {
    const GLRule& rule = gl_rule(n);
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += rule.weights[i] * f(mid + half * rule.nodes[i]);
    return s * half;
}

double adaptive_gl(const std::function<double(double)>& f, double a, double b,
                   const AdaptiveGLPolicy& policy) {
    if (!(b > a)) return 0.0;
    int n = policy.start_nodes;
    double prev = gl_integrate(f, a, b, n);
    for (int k = 0; k < policy.max_doublings; ++k) {
        n *= 2;
        const double cur = gl_integrate(f, a, b, n);
        const double diff = std::fabs(cur - prev);
        if (diff <= policy.rel_tol * std::fabs(cur) + policy.abs_floor) return cur;
        prev = cur;
    }
    throw QuadratureBudgetExceeded("adaptive_gl: tolerance not reached after doubling budget");
}

namespace {

double simpson_rec(const std::function<double(double)>& f, double a, double fa, double b,
                   double fb, double m, double fm, double whole, double tol, int depth) {
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::fabs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return simpson_rec(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
           simpson_rec(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

} // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double rel_tol, int max_depth) {
    if (!(b > a)) return 0.0;
    const double fa = f(a), fb = f(b);
    const double m = 0.5 * (a + b);
    const double fm = f(m);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    // Scale tolerance on a coarse magnitude estimate; keep a tiny absolute
    // floor so identically-zero integrands terminate immediately.
    const double scale = std::max(std::fabs(whole), 1e-12);
    return simpson_rec(f, a, fa, b, fb, m, fm, whole, rel_tol * scale, max_depth);
}

BallGrid::BallGrid(int dim, double radius, int n_radial, int n_sphere)
    : dim_(dim), radius_(radius) {
    const GLRule& rad = gl_rule(n_radial);
    if (dim == 2) {
        const std::size_t n = static_cast<std::size_t>(n_radial) * n_sphere;
        points_.reserve(n * 2);
        weights_.reserve(n);
        const double dtheta = 2.0 * M_PI / n_sphere;
        for (int i = 0; i < n_radial; ++i) {
            const double r = 0.5 * radius * (rad.nodes[i] + 1.0);
            const double wr = 0.5 * radius * rad.weights[i] * r; // r^{d-1}, d=2
            for (int j = 0; j < n_sphere; ++j) {
                const double th = dtheta * j;
                points_.push_back(r * std::cos(th));
                points_.push_back(r * std::sin(th));
                weights_.push_back(wr * dtheta);
            }
        }
    } else if (dim == 3) {
        // Sphere rule: GL in mu = cos(theta), uniform phi with n_phi = n_sphere.
        const int n_mu = std::max(4, n_sphere / 2);
        const GLRule& mu_rule = gl_rule(n_mu);
        const double dphi = 2.0 * M_PI / n_sphere;
        for (int i = 0; i < n_radial; ++i) {
            const double r = 0.5 * radius * (rad.nodes[i] + 1.0);
            const double wr = 0.5 * radius * rad.weights[i] * r * r;
            for (int k = 0; k < n_mu; ++k) {
                const double mu = mu_rule.nodes[k];
                const double smu = std::sqrt(std::max(0.0, 1.0 - mu * mu));
                for (int j = 0; j < n_sphere; ++j) {
                    const double phi = dphi * j;
                    points_.push_back(r * smu * std::cos(phi));
                    points_.push_back(r * smu * std::sin(phi));
                    points_.push_back(r * mu);
                    weights_.push_back(wr * mu_rule.weights[k] * dphi);
                }
            }
        }
    } else {
        throw ConfigError("BallGrid: only d = 2 and d = 3 are supported");
    }
}

double BallGrid::integrate(const std::function<double(std::span<const double>)>& f) const {
    double s = 0.0, c = 0.0;
    for (std::size_t i = 0; i < size(); ++i) {
        const double y = f(point(i)) * weights_[i] - c;
        const double t = s + y;
        c = (t - s) - y;
        s = t;
    }
    return s;
}

} // namespace steinlab
