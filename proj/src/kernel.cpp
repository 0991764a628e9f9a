#include "steinlab/kernel.hpp"

#include "steinlab/errors.hpp"
#include "steinlab/quadrature.hpp"
#include "steinlab/rng.hpp"

#include <algorithm>
#include <cmath>

namespace steinlab {

double BumpFunction::value(std::span<const double> x) const {
    double z2 = 0.0;
    for (int j = 0; j < dim; ++j) {
        const double t = (x[j] - center[j]) / rho;
        z2 += t * t;
    }
    const double q = 1.0 - z2;
    if (q <= 0.0) return 0.0;
    return amplitude * std::exp(-1.0 / q);
}

BumpFunction make_bump_function(int dim, std::vector<double> center, double rho, double R) {
    if (dim < 2) throw ConfigError("BumpFunction: dim must be >= 2");
    if (!(rho > 0.0)) throw ConfigError("BumpFunction: rho must be > 0");
    const double Rprime = 2.0 * R;
    const double c_norm = norm2(center);
    if (c_norm - rho < R || c_norm + rho > Rprime) {
        throw ConfigError("BumpFunction: support must lie in the annulus B(2R) \\ B(R)");
    }
    BumpFunction eta;
    eta.dim = dim;
    eta.center = std::move(center);
    eta.rho = rho;
    eta.halfspace_ok = (eta.center[0] - rho > R);
    // Unit mass: amplitude * rho^d * (unit-ball shape integral) = 1.
    const double shape_int =
        sphere_surface_const(dim) *
        adaptive_simpson(
            [dim](double s) {
                const double q = 1.0 - s * s;
                if (q <= 0.0) return 0.0;
                return std::exp(-1.0 / q) * std::pow(s, dim - 1);
            },
            0.0, 1.0, 1e-12);
    eta.amplitude = 1.0 / (shape_int * std::pow(rho, dim));
    return eta;
}

BumpFunction make_default_bump(int dim, double R) {
    std::vector<double> c(dim, 0.0);
    c[0] = 1.5 * R;
    return make_bump_function(dim, std::move(c), 0.25 * R, R);
}

bool ray_ball_window(std::span<const double> p, std::span<const double> u,
                     std::span<const double> c, double rho, double& t0, double& t1) {
    double b = 0.0, q = 0.0;
    for (std::size_t j = 0; j < p.size(); ++j) {
        const double d = p[j] - c[j];
        b += d * u[j];
        q += d * d;
    }
    const double disc = b * b - (q - rho * rho);
    if (disc <= 0.0) return false;
    const double s = std::sqrt(disc);
    t0 = -b - s;
    t1 = -b + s;
    if (t1 <= 0.0) return false;
    if (t0 < 0.0) t0 = 0.0;
    return true;
}

namespace {

// Directions covering the cone of rays from p whose line can reach B(c, rho),
// with surface-measure weights. towards_ball selects the cone around (c - p)
// (rays that enter the ball) versus (p - c) (rays whose backward extension
// does). Falls back to the full sphere when p is inside the bump's support.
struct DirectionSet {
    std::vector<double> dirs;    // flat, n * dim
    std::vector<double> weights; // surface measure
    int dim;
    std::size_t size() const { return weights.size(); }
    std::span<const double> dir(std::size_t i) const {
        return {dirs.data() + i * dim, static_cast<std::size_t>(dim)};
    }
};

DirectionSet cone_directions(std::span<const double> p, std::span<const double> c,
                             double rho, int dim, int angular_nodes, bool towards_ball) {
    DirectionSet out;
    out.dim = dim;
    std::vector<double> axis(dim);
    double dist_pc = 0.0;
    for (int j = 0; j < dim; ++j) {
        axis[j] = towards_ball ? c[j] - p[j] : p[j] - c[j];
        dist_pc += axis[j] * axis[j];
    }
    dist_pc = std::sqrt(dist_pc);
    const bool inside = dist_pc <= rho;
    if (!inside)
        for (int j = 0; j < dim; ++j) axis[j] /= dist_pc;

    if (dim == 2) {
        if (inside) {
            const int n = std::max(128, 4 * angular_nodes);
            const double dth = 2.0 * M_PI / n;
            for (int i = 0; i < n; ++i) {
                const double th = i * dth;
                out.dirs.push_back(std::cos(th));
                out.dirs.push_back(std::sin(th));
                out.weights.push_back(dth);
            }
            return out;
        }
        const double alpha = std::asin(std::min(1.0, rho / dist_pc));
        const double th0 = std::atan2(axis[1], axis[0]);
        const GLRule& rule = gl_rule(angular_nodes);
        for (int i = 0; i < angular_nodes; ++i) {
            const double th = th0 + alpha * rule.nodes[i];
            out.dirs.push_back(std::cos(th));
            out.dirs.push_back(std::sin(th));
            out.weights.push_back(alpha * rule.weights[i]);
        }
        return out;
    }

    // dim == 3: spherical cap around the axis, GL in mu = cos(beta), uniform phi.
    double mu_lo = -1.0;
    if (!inside) {
        const double alpha = std::asin(std::min(1.0, rho / dist_pc));
        mu_lo = std::cos(alpha);
    } else {
        axis.assign(3, 0.0);
        axis[2] = 1.0;
    }
    // Orthonormal frame perpendicular to the axis.
    std::vector<double> e1(3), e2(3);
    {
        int k = 0;
        for (int j = 1; j < 3; ++j)
            if (std::fabs(axis[j]) < std::fabs(axis[k])) k = j;
        std::vector<double> tmp(3, 0.0);
        tmp[k] = 1.0;
        // e1 = normalize(tmp - (tmp.axis) axis)
        const double proj = tmp[0] * axis[0] + tmp[1] * axis[1] + tmp[2] * axis[2];
        double n2 = 0.0;
        for (int j = 0; j < 3; ++j) {
            e1[j] = tmp[j] - proj * axis[j];
            n2 += e1[j] * e1[j];
        }
        const double inv = 1.0 / std::sqrt(n2);
        for (int j = 0; j < 3; ++j) e1[j] *= inv;
        e2[0] = axis[1] * e1[2] - axis[2] * e1[1];
        e2[1] = axis[2] * e1[0] - axis[0] * e1[2];
        e2[2] = axis[0] * e1[1] - axis[1] * e1[0];
    }
    const int n_mu = std::max(8, angular_nodes / 2);
    const int n_phi = std::max(12, angular_nodes);
    const GLRule& mu_rule = gl_rule(n_mu);
    const double dphi = 2.0 * M_PI / n_phi;
    for (int i = 0; i < n_mu; ++i) {
        const double mu = 0.5 * (mu_lo + 1.0) + 0.5 * (1.0 - mu_lo) * mu_rule.nodes[i];
        const double wmu = 0.5 * (1.0 - mu_lo) * mu_rule.weights[i];
        const double smu = std::sqrt(std::max(0.0, 1.0 - mu * mu));
        for (int q = 0; q < n_phi; ++q) {
            const double phi = q * dphi;
            const double c1 = smu * std::cos(phi), c2 = smu * std::sin(phi);
            for (int j = 0; j < 3; ++j)
                out.dirs.push_back(mu * axis[j] + c1 * e1[j] + c2 * e2[j]);
            out.weights.push_back(wmu * dphi);
        }
    }
    return out;
}

} // namespace

KernelEvaluator::KernelEvaluator(BumpFunction eta, double R, QuadraturePolicy policy)
    : eta_(std::move(eta)), dim_(eta_.dim), R_(R), Rprime_(2.0 * R), policy_(policy) {
    if (!(R > 0.0)) throw ConfigError("KernelEvaluator: R must be > 0");
}

bool KernelEvaluator::eta_window(std::span<const double> p, std::span<const double> u,
                                 double& s0, double& s1) const {
    return ray_ball_window(p, u, eta_.center, eta_.rho, s0, s1);
}

namespace {

// One Gauss-Legendre pass over [lo, hi] accumulating  int s^m f(p + s u) ds
// for m = 0 .. n_moments-1.
void line_moments_pass(const BumpFunction& eta, std::span<const double> p,
                       std::span<const double> u, double lo, double hi, int n_nodes,
                       std::span<double> moments) {
    const int dim = eta.dim;
    const int n_m = static_cast<int>(moments.size());
    for (int m = 0; m < n_m; ++m) moments[m] = 0.0;
    if (!(hi > lo)) return;
    const GLRule& rule = gl_rule(n_nodes);
    const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
    std::vector<double> pt(dim);
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const double s = mid + half * rule.nodes[i];
        for (int j = 0; j < dim; ++j) pt[j] = p[j] + s * u[j];
        const double v = rule.weights[i] * eta.value(pt);
        double sm = 1.0;
        for (int m = 0; m < n_m; ++m) {
            moments[m] += v * sm;
            sm *= s;
        }
    }
    for (int m = 0; m < n_m; ++m) moments[m] *= half;
}

} // namespace

double KernelEvaluator::line_moment(std::span<const double> p, std::span<const double> u,
                                    int m, double lo, double hi) const {
    std::vector<double> moments(m + 1, 0.0);
    line_moments_pass(eta_, p, u, lo, hi, policy_.gl_nodes, moments);
    return moments[m];
}

void KernelEvaluator::eval(std::span<const double> x, std::span<const double> y,
                           std::span<double> out) const {
    const double r = dist(x, y);
    if (r < 1e-12) throw CoincidentPointsError("eval_kernel: x and y coincide");
    std::vector<double> u(dim_);
    for (int j = 0; j < dim_; ++j) u[j] = (x[j] - y[j]) / r;
    double s0, s1;
    if (!eta_window(y, u, s0, s1) || s1 <= r) {
        for (int j = 0; j < dim_; ++j) out[j] = 0.0;
        return;
    }
    const double lo = std::max(s0, r);
    // W = int_lo^s1 s^{d-1} eta(y + s u) ds, node count doubled until the
    // relative change is below tol (eta is smooth, so this settles fast).
    std::vector<double> mom(dim_, 0.0);
    int nodes = policy_.gl_nodes;
    line_moments_pass(eta_, y, u, lo, s1, nodes, mom);
    double W = mom[dim_ - 1];
    for (int k = 0; k < 4; ++k) {
        nodes *= 2;
        line_moments_pass(eta_, y, u, lo, s1, nodes, mom);
        const double W2 = mom[dim_ - 1];
        const double diff = std::fabs(W2 - W);
        W = W2;
        if (diff <= policy_.rel_tol * std::fabs(W2) + 1e-300) break;
    }
    const double scale = -std::pow(r, 1 - dim_) * W;
    for (int j = 0; j < dim_; ++j) out[j] = scale * u[j];
}

double KernelEvaluator::eval_norm(std::span<const double> x, std::span<const double> y) const {
    std::vector<double> buf(dim_);
    eval(x, y, buf);
    return norm2(buf);
}

void KernelEvaluator::apply_at(const ScalarField& g, std::span<const double> x,
                               std::span<double> out) const {
    for (int j = 0; j < dim_; ++j) out[j] = 0.0;
    const DirectionSet dirs = cone_directions(x, eta_.center, eta_.rho, dim_,
                                              policy_.angular_nodes, false);
    std::vector<double> neg_w(dim_), moments(dim_), pt(dim_);
    const GLRule& rad = gl_rule(policy_.radial_nodes);
    for (std::size_t i = 0; i < dirs.size(); ++i) {
        const auto w = dirs.dir(i);
        for (int j = 0; j < dim_; ++j) neg_w[j] = -w[j];
        double t0, t1;
        if (!eta_window(x, neg_w, t0, t1)) continue;
        // A_m = int tau^m eta(x - tau w) dtau, all m in one pass.
        line_moments_pass(eta_, x, neg_w, t0, t1, policy_.gl_nodes, moments);
        // Segment of the ray x + rho w inside supp(g).
        double r0, r1;
        if (!ray_ball_window(x, w, g.support_center, g.support_radius, r0, r1)) continue;
        // inner = int g(x + rho w) * sum_j binom(d-1, j) rho^j A_{d-1-j} drho.
        const double mid = 0.5 * (r0 + r1), half = 0.5 * (r1 - r0);
        double inner = 0.0;
        for (std::size_t q = 0; q < rad.nodes.size(); ++q) {
            const double rho = mid + half * rad.nodes[q];
            for (int j = 0; j < dim_; ++j) pt[j] = x[j] + rho * w[j];
            const double gv = g.value(pt);
            if (gv == 0.0) continue;
            double poly = 0.0;
            if (dim_ == 2) {
                poly = moments[1] + rho * moments[0];
            } else {
                poly = moments[2] + 2.0 * rho * moments[1] + rho * rho * moments[0];
            }
            inner += rad.weights[q] * gv * poly;
        }
        inner *= half * dirs.weights[i];
        for (int j = 0; j < dim_; ++j) out[j] += inner * w[j];
    }
}

double KernelEvaluator::divergence_rhs(const ScalarField& h, std::span<const double> y) const {
    const DirectionSet dirs = cone_directions(y, eta_.center, eta_.rho, dim_,
                                              policy_.angular_nodes, true);
    std::vector<double> pt(dim_), grad(dim_);
    const GLRule& rad = gl_rule(policy_.radial_nodes);
    auto grad_dot = [&](std::span<const double> w, double r) {
        for (int j = 0; j < dim_; ++j) pt[j] = y[j] + r * w[j];
        h.gradient(pt, grad);
        double s = 0.0;
        for (int j = 0; j < dim_; ++j) s += grad[j] * w[j];
        return s;
    };
    double acc = 0.0;
    for (std::size_t i = 0; i < dirs.size(); ++i) {
        const auto w = dirs.dir(i);
        double t0, t1;
        if (!eta_window(y, w, t0, t1)) continue;
        double r0, r1;
        if (!ray_ball_window(y, w, h.support_center, h.support_radius, r0, r1)) continue;
        double contrib = 0.0;
        // Segment before the bump: W(r) is constant there.
        const double a_hi = std::min(r1, t0);
        if (a_hi > r0) {
            const double w_tail = line_moment(y, w, dim_ - 1, t0, t1);
            if (w_tail != 0.0) {
                const double mid = 0.5 * (r0 + a_hi), half = 0.5 * (a_hi - r0);
                double seg = 0.0;
                for (std::size_t q = 0; q < rad.nodes.size(); ++q)
                    seg += rad.weights[q] * grad_dot(w, mid + half * rad.nodes[q]);
                contrib += w_tail * seg * half;
            }
        }
        // Segment overlapping the bump: W(r) varies with r.
        const double b_lo = std::max(r0, t0), b_hi = std::min(r1, t1);
        if (b_hi > b_lo) {
            const double mid = 0.5 * (b_lo + b_hi), half = 0.5 * (b_hi - b_lo);
            double seg = 0.0;
            for (std::size_t q = 0; q < rad.nodes.size(); ++q) {
                const double r = mid + half * rad.nodes[q];
                const double w_r = line_moment(y, w, dim_ - 1, r, t1);
                seg += rad.weights[q] * w_r * grad_dot(w, r);
            }
            contrib += seg * half;
        }
        acc += dirs.weights[i] * contrib;
    }
    return -acc;
}

double KernelEvaluator::verify_divergence_identity(
    const ScalarField& h, const std::vector<std::vector<double>>& probes) const {
    double worst = 0.0;
    for (const auto& y : probes) {
        const double lhs = h.value(y);
        const double err = std::fabs(lhs - divergence_rhs(h, y));
        if (err > worst) worst = err;
    }
    return worst;
}

double KernelEvaluator::estimate_kd(std::size_t n_pairs, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> x(dim_), y(dim_), buf(dim_);
    double sup = 0.0;
    for (std::size_t i = 0; i < n_pairs; ++i) {
        rng.point_in_ball(dim_, Rprime_, x);
        rng.point_in_ball(dim_, Rprime_, y);
        const double r = dist(x, y);
        if (r < 1e-9) continue;
        eval(x, y, buf);
        const double m = norm2(buf) * std::pow(r, dim_ - 1);
        if (m > sup) sup = m;
    }
    kd_empirical_ = 1.2 * sup;
    return kd_empirical_;
}

} // namespace steinlab
