#include "steinlab/malliavin.hpp"

#include "steinlab/errors.hpp"
#include "steinlab/integrals.hpp"
#include "steinlab/parallel.hpp"
#include "steinlab/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

namespace steinlab {

SmoothRm smooth_constant(double c) {
    SmoothRm s;
    s.arity = 0;
    s.value = [c](std::span<const double>) { return c; };
    s.partials = [](std::span<const double>, std::span<double> out) {
        for (auto& v : out) v = 0.0;
    };
    return s;
}

namespace {
double arg_sum(std::span<const double> a) {
    double s = 0.0;
    for (double v : a) s += v;
    return s;
}
} // namespace

SmoothRm smooth_linear_sum(int arity) {
    SmoothRm s;
    s.arity = arity;
    s.value = [](std::span<const double> a) { return arg_sum(a); };
    s.partials = [](std::span<const double>, std::span<double> out) {
        for (auto& v : out) v = 1.0;
    };
    return s;
}

SmoothRm smooth_sin_sum(int arity) {
    SmoothRm s;
    s.arity = arity;
    s.value = [](std::span<const double> a) { return std::sin(arg_sum(a)); };
    s.partials = [](std::span<const double> a, std::span<double> out) {
        const double c = std::cos(arg_sum(a));
        for (auto& v : out) v = c;
    };
    return s;
}

SmoothRm smooth_tanh_sum(int arity) {
    SmoothRm s;
    s.arity = arity;
    s.value = [](std::span<const double> a) { return std::tanh(arg_sum(a)); };
    s.partials = [](std::span<const double> a, std::span<double> out) {
        const double t = std::tanh(arg_sum(a));
        const double d = 1.0 - t * t;
        for (auto& v : out) v = d;
    };
    return s;
}

void CylindricalFunctional::args(const Configuration& cfg, std::span<double> out) const {
    for (std::size_t j = 0; j < fields.size(); ++j) {
        const ScalarField& h = fields[j];
        const double rad_sq = h.support_radius * h.support_radius;
        double s = 0.0;
        for (std::size_t i = 0; i < cfg.size(); ++i) {
            const auto p = cfg.point(i);
            if (dist_sq(p, h.support_center) >= rad_sq) continue;
            s += h.value(p);
        }
        out[j] = s;
    }
}

double CylindricalFunctional::eval(const Configuration& cfg) const {
    std::vector<double> a(fields.size());
    args(cfg, a);
    return phi.value(a);
}

double CylindricalFunctional::support_first_max() const {
    double m = -1e300;
    for (const auto& h : fields) {
        const double hi = h.support_center[0] + h.support_radius;
        if (hi > m) m = hi;
    }
    return m;
}

double SimpleProcess::eval(const Configuration& cfg, std::span<const double> x) const {
    double s = 0.0;
    for (const auto& term : terms) {
        const double g = term.g.value(x);
        if (g != 0.0) s += g * term.G.eval(cfg);
    }
    return s;
}

bool check_predictable_order(const SimpleProcess& u) {
    double prev_sup = -1e300;
    for (const auto& term : u.terms) {
        const double g_lo = term.g.support_center[0] - term.g.support_radius;
        const double g_hi = term.g.support_center[0] + term.g.support_radius;
        if (!term.G.fields.empty() && term.G.support_first_max() > g_lo + 1e-12) return false;
        if (prev_sup > g_lo + 1e-12) return false;
        prev_sup = g_hi;
    }
    return true;
}

double gradient_D(const KernelEvaluator& ke, const CylindricalFunctional& F,
                  const Configuration& cfg, std::span<const double> y) {
    const std::size_t m = F.fields.size();
    if (m == 0) return 0.0;
    std::vector<double> a(m), dphi(m);
    F.args(cfg, a);
    F.phi.partials(a, dphi);

    const int d = cfg.dim;
    const double eps_sq = ke.excision_radius() * ke.excision_radius();
    std::vector<double> kbuf(d), grad(d);
    double acc = 0.0;
    for (std::size_t i = 0; i < cfg.size(); ++i) {
        const auto xi = cfg.point(i);
        if (dist_sq(xi, y) < eps_sq) continue;
        ke.eval(xi, y, kbuf);
        double knorm = 0.0;
        for (int j = 0; j < d; ++j) knorm += kbuf[j] * kbuf[j];
        if (knorm == 0.0) continue;
        for (std::size_t jf = 0; jf < m; ++jf) {
            if (dphi[jf] == 0.0) continue;
            F.fields[jf].gradient(xi, grad);
            acc += dphi[jf] * dot(kbuf, grad);
        }
    }
    return acc;
}

double process_gradient_D(const KernelEvaluator& ke, const SimpleProcess& u,
                          const Configuration& cfg, std::span<const double> x,
                          std::span<const double> y) {
    double s = 0.0;
    for (const auto& term : u.terms) {
        const double g = term.g.value(x);
        if (g != 0.0) s += g * gradient_D(ke, term.G, cfg, y);
    }
    return s;
}

double skorohod_correction_term(const KernelEvaluator& ke, const SimpleProcessTerm& term,
                                const Configuration& cfg) {
    // <g, DG> = sum_j d_j phi(a) sum_i <V_g(X_i), grad h_j(X_i)> with
    // V_g(x) = int g(y) G_eta(x, y) dy.
    const std::size_t m = term.G.fields.size();
    if (m == 0) return 0.0;
    std::vector<double> a(m), dphi(m);
    term.G.args(cfg, a);
    term.G.phi.partials(a, dphi);

    const int d = cfg.dim;
    std::vector<double> v(d), grad(d);
    double acc = 0.0;
    for (std::size_t i = 0; i < cfg.size(); ++i) {
        const auto xi = cfg.point(i);
        ke.apply_at(term.g, xi, v);
        double vnorm = 0.0;
        for (int j = 0; j < d; ++j) vnorm += v[j] * v[j];
        if (vnorm == 0.0) continue;
        for (std::size_t jf = 0; jf < m; ++jf) {
            if (dphi[jf] == 0.0) continue;
            term.G.fields[jf].gradient(xi, grad);
            acc += dphi[jf] * dot(v, grad);
        }
    }
    return acc;
}

double skorohod(const KernelEvaluator& ke, const SimpleProcess& u, const Configuration& cfg,
                bool force_correction) {
    double acc = 0.0;
    for (const auto& term : u.terms) {
        const double G = term.G.eval(cfg);
        acc += G * compensated_integral(term.g, cfg);
        if (!u.predictable || force_correction)
            acc -= skorohod_correction_term(ke, term, cfg);
    }
    return acc;
}

double inner_u_DF(const KernelEvaluator& ke, const SimpleProcess& u,
                  const CylindricalFunctional& F, const Configuration& cfg) {
    const std::size_t m = F.fields.size();
    if (m == 0) return 0.0;
    std::vector<double> a(m), dphi(m);
    F.args(cfg, a);
    F.phi.partials(a, dphi);

    const int d = cfg.dim;
    std::vector<double> v(d), grad(d);
    double acc = 0.0;
    for (const auto& term : u.terms) {
        const double G = term.G.eval(cfg);
        if (G == 0.0) continue;
        double inner = 0.0;
        for (std::size_t i = 0; i < cfg.size(); ++i) {
            const auto xi = cfg.point(i);
            ke.apply_at(term.g, xi, v);
            double vnorm = 0.0;
            for (int j = 0; j < d; ++j) vnorm += v[j] * v[j];
            if (vnorm == 0.0) continue;
            for (std::size_t jf = 0; jf < m; ++jf) {
                if (dphi[jf] == 0.0) continue;
                F.fields[jf].gradient(xi, grad);
                inner += dphi[jf] * dot(v, grad);
            }
        }
        acc += G * inner;
    }
    return acc;
}

double covariant_nabla(const KernelEvaluator& ke, const ScalarField& h,
                       std::span<const double> x, std::span<const double> y) {
    const int d = ke.dim();
    std::vector<double> kbuf(d), grad(d);
    ke.eval(x, y, kbuf);
    h.gradient(x, grad);
    return dot(kbuf, grad);
}

double covariant_nabla(const KernelEvaluator& ke, const SimpleProcess& u,
                       const Configuration& cfg, std::span<const double> x,
                       std::span<const double> y) {
    const int d = ke.dim();
    std::vector<double> kbuf(d), grad(d);
    ke.eval(x, y, kbuf);
    double transport = 0.0;
    for (const auto& term : u.terms) {
        term.g.gradient(x, grad);
        double gn = 0.0;
        for (int j = 0; j < d; ++j) gn += grad[j] * grad[j];
        if (gn == 0.0) continue;
        transport += term.G.eval(cfg) * dot(kbuf, grad);
    }
    return process_gradient_D(ke, u, cfg, x, y) + transport;
}

// ---------------------------------------------------------------------------
// Grid-backed fields for operator powers.

namespace {

struct GridField2D {
    double R;
    std::vector<double> radii;  // ascending, includes 0 and R
    int n_ang;
    std::vector<double> values; // radii.size() x n_ang

    double at(std::size_t ir, int ia) const { return values[ir * n_ang + ia]; }

    double eval(std::span<const double> x) const {
        const double r = std::sqrt(x[0] * x[0] + x[1] * x[1]);
        if (r >= R) return 0.0;
        double th = std::atan2(x[1], x[0]);
        if (th < 0.0) th += 2.0 * M_PI;
        const double dth = 2.0 * M_PI / n_ang;
        const int ia = static_cast<int>(th / dth) % n_ang;
        const int ib = (ia + 1) % n_ang;
        const double ta = (th - ia * dth) / dth;
        // Radial cell by binary search.
        const auto it = std::upper_bound(radii.begin(), radii.end(), r);
        std::size_t hi = static_cast<std::size_t>(it - radii.begin());
        if (hi == 0) hi = 1;
        if (hi >= radii.size()) hi = radii.size() - 1;
        const std::size_t lo = hi - 1;
        const double tr = (r - radii[lo]) / (radii[hi] - radii[lo]);
        const double vlo = (1.0 - ta) * at(lo, ia) + ta * at(lo, ib);
        const double vhi = (1.0 - ta) * at(hi, ia) + ta * at(hi, ib);
        return (1.0 - tr) * vlo + tr * vhi;
    }
};

struct GridField3D {
    double R;
    std::vector<double> radii; // ascending, includes 0 and R
    std::vector<double> mus;   // ascending, includes -1 and 1
    int n_phi;
    std::vector<double> values; // radii x mus x phi

    double at(std::size_t ir, std::size_t im, int ip) const {
        return values[(ir * mus.size() + im) * n_phi + ip];
    }

    double eval(std::span<const double> x) const {
        const double r = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
        if (r >= R) return 0.0;
        double mu = r > 1e-300 ? x[2] / r : 0.0;
        double phi = std::atan2(x[1], x[0]);
        if (phi < 0.0) phi += 2.0 * M_PI;
        const double dphi = 2.0 * M_PI / n_phi;
        const int ip = static_cast<int>(phi / dphi) % n_phi;
        const int iq = (ip + 1) % n_phi;
        const double tp = (phi - ip * dphi) / dphi;

        auto cell = [](const std::vector<double>& nodes, double v, std::size_t& lo, double& t) {
            auto it = std::upper_bound(nodes.begin(), nodes.end(), v);
            std::size_t hi = static_cast<std::size_t>(it - nodes.begin());
            if (hi == 0) hi = 1;
            if (hi >= nodes.size()) hi = nodes.size() - 1;
            lo = hi - 1;
            t = (v - nodes[lo]) / (nodes[hi] - nodes[lo]);
        };
        std::size_t ir, im;
        double tr, tm;
        cell(radii, r, ir, tr);
        cell(mus, mu, im, tm);
        double acc = 0.0;
        for (int dr = 0; dr <= 1; ++dr)
            for (int dm = 0; dm <= 1; ++dm) {
                const double wr = dr ? tr : 1.0 - tr;
                const double wm = dm ? tm : 1.0 - tm;
                const double v =
                    (1.0 - tp) * at(ir + dr, im + dm, ip) + tp * at(ir + dr, im + dm, iq);
                acc += wr * wm * v;
            }
        return acc;
    }
};

ScalarField wrap_grid_field(int dim, double R, std::function<double(std::span<const double>)> f) {
    ScalarField out;
    out.dim = dim;
    out.support_center.assign(dim, 0.0);
    out.support_radius = R;
    out.value = std::move(f);
    const auto val = out.value;
    const double step = 1e-5 * R;
    out.gradient = [val, dim, step](std::span<const double> x, std::span<double> g) {
        std::vector<double> p(x.begin(), x.end());
        for (int j = 0; j < dim; ++j) {
            const double x0 = p[j];
            p[j] = x0 + step;
            const double fp = val(p);
            p[j] = x0 - step;
            const double fm = val(p);
            p[j] = x0;
            g[j] = (fp - fm) / (2.0 * step);
        }
    };
    out.compensator = 0.0; // not used downstream; grid fields never enter MC sums
    return out;
}

// Radial node ladder shared by materialization and interpolation: Gauss-
// Legendre nodes on [0, R] padded with the endpoints.
std::vector<double> radial_ladder(double R, int n_radial) {
    const GLRule& rule = gl_rule(n_radial);
    std::vector<double> radii;
    radii.reserve(n_radial + 2);
    radii.push_back(0.0);
    for (int i = 0; i < n_radial; ++i) radii.push_back(0.5 * R * (rule.nodes[i] + 1.0));
    radii.push_back(R);
    return radii;
}

} // namespace

ScalarField operator_power_apply(const KernelEvaluator& ke, const ScalarField& h, int n,
                                 const ScalarField& f, const PowerGridSpec& grid) {
    if (n < 0) throw InvalidOrderError("operator_power_apply: n must be >= 0");
    if (n == 0) return f;
    const int d = ke.dim();
    const double R = ke.R();

    // One application: x -> <V_cur(x), grad h(x)>.
    auto apply_once = [&](const ScalarField& cur,
                          std::function<double(std::span<const double>)>& out_eval) {
        std::vector<double> v(d), grad(d);
        if (d == 2) {
            auto gf = std::make_shared<GridField2D>();
            gf->R = R;
            gf->radii = radial_ladder(R, grid.n_radial);
            gf->n_ang = grid.n_sphere;
            gf->values.assign(gf->radii.size() * gf->n_ang, 0.0);
            std::vector<double> x(2);
            for (std::size_t ir = 0; ir < gf->radii.size(); ++ir) {
                const double r = gf->radii[ir];
                if (r >= R) continue; // boundary ring stays zero
                for (int ia = 0; ia < gf->n_ang; ++ia) {
                    const double th = 2.0 * M_PI * ia / gf->n_ang;
                    x[0] = r * std::cos(th);
                    x[1] = r * std::sin(th);
                    ke.apply_at(cur, x, v);
                    h.gradient(x, grad);
                    gf->values[ir * gf->n_ang + ia] = dot(v, grad);
                }
            }
            out_eval = [gf](std::span<const double> p) { return gf->eval(p); };
        } else if (d == 3) {
            auto gf = std::make_shared<GridField3D>();
            gf->R = R;
            gf->radii = radial_ladder(R, grid.n_radial);
            const int n_mu = std::max(8, grid.n_sphere / 2);
            const GLRule& mu_rule = gl_rule(n_mu);
            gf->mus.push_back(-1.0);
            for (int i = 0; i < n_mu; ++i) gf->mus.push_back(mu_rule.nodes[i]);
            gf->mus.push_back(1.0);
            gf->n_phi = grid.n_sphere;
            gf->values.assign(gf->radii.size() * gf->mus.size() * gf->n_phi, 0.0);
            std::vector<double> x(3);
            for (std::size_t ir = 0; ir < gf->radii.size(); ++ir) {
                const double r = gf->radii[ir];
                if (r >= R) continue;
                for (std::size_t im = 0; im < gf->mus.size(); ++im) {
                    const double mu = gf->mus[im];
                    const double smu = std::sqrt(std::max(0.0, 1.0 - mu * mu));
                    for (int ip = 0; ip < gf->n_phi; ++ip) {
                        const double phi = 2.0 * M_PI * ip / gf->n_phi;
                        x[0] = r * smu * std::cos(phi);
                        x[1] = r * smu * std::sin(phi);
                        x[2] = r * mu;
                        ke.apply_at(cur, x, v);
                        h.gradient(x, grad);
                        gf->values[(ir * gf->mus.size() + im) * gf->n_phi + ip] = dot(v, grad);
                    }
                }
            }
            out_eval = [gf](std::span<const double> p) { return gf->eval(p); };
        } else {
            throw ConfigError("operator_power_apply: only d = 2, 3 supported");
        }
    };

    ScalarField cur = f;
    for (int step = 0; step < n; ++step) {
        std::function<double(std::span<const double>)> eval;
        apply_once(cur, eval);
        cur = wrap_grid_field(d, R, std::move(eval));
    }
    return cur;
}

double field_inner_l2(const ScalarField& a, const ScalarField& b, int dim, double R,
                      const PowerGridSpec& grid) {
    BallGrid g(dim, R, grid.n_radial, grid.n_sphere);
    double s = 0.0, c = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const auto p = g.point(i);
        const double y = a.value(p) * b.value(p) * g.weight(i) - c;
        const double t = s + y;
        c = (t - s) - y;
        s = t;
    }
    return s;
}

double field_l2_norm_grid(const ScalarField& a, int dim, double R, const PowerGridSpec& grid) {
    return std::sqrt(std::max(0.0, field_inner_l2(a, a, dim, R, grid)));
}

double gamma_deterministic(const KernelEvaluator& ke, const ScalarField& h, int k,
                           const PowerGridSpec& grid) {
    if (k < 2) throw InvalidOrderError("gamma_deterministic: order must be >= 2");
    const ScalarField powered = operator_power_apply(ke, h, k - 2, h, grid);
    return field_inner_l2(powered, h, ke.dim(), ke.R(), grid);
}

TestFunction test_function_sin() {
    TestFunction t;
    t.name = "sin";
    t.deriv[0] = [](double z) { return std::sin(z); };
    t.deriv[1] = [](double z) { return std::cos(z); };
    t.deriv[2] = [](double z) { return -std::sin(z); };
    t.deriv[3] = [](double z) { return -std::cos(z); };
    return t;
}

TestFunction test_function_linear() {
    TestFunction t;
    t.name = "linear";
    t.deriv[0] = [](double z) { return z; };
    t.deriv[1] = [](double) { return 1.0; };
    t.deriv[2] = [](double) { return 0.0; };
    t.deriv[3] = [](double) { return 0.0; };
    return t;
}

TestFunction make_test_function(const std::string& name) {
    if (name == "sin") return test_function_sin();
    if (name == "linear") return test_function_linear();
    throw ConfigError("unknown test function: " + name);
}

EdgeworthResult edgeworth_residual(const KernelEvaluator& ke, const ScalarField& f,
                                   const TestFunction& g, int order, const McSettings& mc) {
    if (order < 0 || order > 2)
        throw InvalidOrderError("edgeworth_residual: order must be in {0, 1, 2}");
    if (!(ke.kd() > 0.0))
        throw ConfigError("edgeworth_residual: estimate_kd must run before using the bound");

    const int n_terms = order + 1;
    std::vector<double> kappa(n_terms + 2, 0.0); // kappa[k] for k = 2..order+2
    for (int k = 2; k <= order + 2; ++k) kappa[k] = cumulant(f, k);

    const double carrier = norm2(f.support_center) + f.support_radius;
    const std::size_t M = mc.replications;
    const std::size_t n_chunks = (M + mc.chunk - 1) / mc.chunk;

    struct ChunkAcc {
        KahanSum lhs;
        std::array<KahanSum, 3> term; // E[g^(k)], k = 1..n_terms
        KahanSum res, res_sq;
    };
    std::vector<ChunkAcc> acc(n_chunks);

    parallel_chunks(M, mc.chunk, mc.workers, [&](std::size_t b, std::size_t e) {
        ChunkAcc& a = acc[b / mc.chunk];
        for (std::size_t rep = b; rep < e; ++rep) {
            SamplerSpec sp{f.dim, carrier, derive_seed(mc.master_seed, rep)};
            const Configuration cfg = sample_configuration(sp);
            const double s = compensated_integral(f, cfg);
            const double lhs_i = s * g.eval(0, s);
            a.lhs.add(lhs_i);
            double expansion = 0.0;
            double fact = 1.0;
            for (int k = 1; k <= n_terms; ++k) {
                fact *= k;
                const double gk = g.eval(k, s);
                a.term[k - 1].add(gk);
                expansion += kappa[k + 1] / fact * gk;
            }
            const double r = lhs_i - expansion;
            a.res.add(r);
            a.res_sq.add(r * r);
        }
    });

    KahanSum lhs, res, res_sq;
    std::array<KahanSum, 3> term;
    for (const auto& a : acc) {
        lhs.add(a.lhs.value());
        res.add(a.res.value());
        res_sq.add(a.res_sq.value());
        for (int k = 0; k < n_terms; ++k) term[k].add(a.term[k].value());
    }

    EdgeworthResult out;
    out.replications = M;
    out.lhs = lhs.value() / M;
    double fact = 1.0;
    for (int k = 1; k <= n_terms; ++k) {
        fact *= k;
        out.expansion_terms.push_back(kappa[k + 1] / fact * term[k - 1].value() / M);
    }
    out.residual = res.value() / M;
    const double mean_r = out.residual;
    const double var_r = std::max(0.0, res_sq.value() / M - mean_r * mean_r);
    out.residual_se = std::sqrt(var_r / M);

    const double vd = unit_ball_volume(f.dim);
    const double rprime = 2.0 * f.support_radius;
    const double l2 = std::sqrt(kappa[2]);
    out.remainder_bound = std::pow(ke.kd() * vd * rprime, order + 1) * l2 *
                          std::pow(f.stein_grad_bound, order + 1);
    return out;
}

double commutation_check(const KernelEvaluator& ke, const ScalarField& h,
                         const Configuration& cfg, std::span<const double> y) {
    const int d = cfg.dim;
    const double eps_sq = ke.excision_radius() * ke.excision_radius();
    std::vector<double> kbuf(d), grad(d);
    // D_y delta(h) = sum_i <G(X_i, y), grad h(X_i)>. The same atom sum appears
    // in delta(nabla~_y h); its compensator is evaluated by quadrature.
    double atom_sum = 0.0;
    for (std::size_t i = 0; i < cfg.size(); ++i) {
        const auto xi = cfg.point(i);
        if (dist_sq(xi, y) < eps_sq) continue;
        ke.eval(xi, y, kbuf);
        h.gradient(xi, grad);
        atom_sum += dot(kbuf, grad);
    }
    const double lhs = atom_sum;
    const double compensator = ke.divergence_rhs(h, y);
    const double rhs = h.value(y) + (atom_sum - compensator);
    return std::fabs(lhs - rhs);
}

DualityFixture make_duality_fixture(int index, const KernelEvaluator& ke) {
    const int d = ke.dim();
    const double R = ke.R();
    auto bump_at = [&](double x1, double rho) {
        std::vector<double> c(d, 0.0);
        c[0] = x1;
        return make_bump_field(d, std::move(c), rho, 1.0);
    };

    DualityFixture fx;
    if (index == 0) {
        // Predictable: G depends on the left half, g lives strictly to the right.
        fx.name = "predictable";
        CylindricalFunctional G;
        G.phi = smooth_tanh_sum(1);
        G.fields.push_back(bump_at(-0.5 * R, 0.3 * R));
        SimpleProcessTerm term{bump_at(0.45 * R, 0.25 * R), std::move(G)};
        fx.u.terms.push_back(std::move(term));
        fx.u.predictable = true;

        fx.F.phi = smooth_sin_sum(1);
        fx.F.fields.push_back(bump_at(0.0, 0.35 * R));
    } else if (index == 1) {
        // Non-predictable: G looks to the right of supp(g), so the Skorohod
        // correction term is active.
        fx.name = "correction";
        CylindricalFunctional G;
        G.phi = smooth_tanh_sum(1);
        G.fields.push_back(bump_at(0.5 * R, 0.3 * R));
        SimpleProcessTerm term{bump_at(-0.45 * R, 0.25 * R), std::move(G)};
        fx.u.terms.push_back(std::move(term));
        fx.u.predictable = false;

        fx.F.phi = smooth_sin_sum(1);
        fx.F.fields.push_back(bump_at(0.1 * R, 0.35 * R));
    } else {
        throw ConfigError("make_duality_fixture: index must be 0 or 1");
    }
    return fx;
}

namespace {

McMeanResult mc_mean(const McSettings& mc,
                     const std::function<double(std::uint64_t)>& sample_one) {
    const std::size_t M = mc.replications;
    const std::size_t n_chunks = (M + mc.chunk - 1) / mc.chunk;
    std::vector<KahanSum> sums(n_chunks), sqs(n_chunks);
    parallel_chunks(M, mc.chunk, mc.workers, [&](std::size_t b, std::size_t e) {
        KahanSum& s = sums[b / mc.chunk];
        KahanSum& q = sqs[b / mc.chunk];
        for (std::size_t rep = b; rep < e; ++rep) {
            const double v = sample_one(rep);
            s.add(v);
            q.add(v * v);
        }
    });
    KahanSum s, q;
    for (std::size_t i = 0; i < n_chunks; ++i) {
        s.add(sums[i].value());
        q.add(sqs[i].value());
    }
    McMeanResult out;
    out.replications = M;
    out.mean = s.value() / M;
    const double var = std::max(0.0, q.value() / M - out.mean * out.mean);
    out.std_error = std::sqrt(var / M);
    return out;
}

} // namespace

McMeanResult duality_gap(const KernelEvaluator& ke, const DualityFixture& fixture,
                         const McSettings& mc) {
    const int d = ke.dim();
    const double R = ke.R();
    return mc_mean(mc, [&](std::uint64_t rep) {
        SamplerSpec sp{d, R, derive_seed(mc.master_seed, rep)};
        const Configuration cfg = sample_configuration(sp);
        const double lhs = inner_u_DF(ke, fixture.u, fixture.F, cfg);
        const double rhs = fixture.F.eval(cfg) * skorohod(ke, fixture.u, cfg);
        return lhs - rhs;
    });
}

McMeanResult predictable_isometry_gap(const KernelEvaluator& ke, const SimpleProcess& u,
                                      const McSettings& mc) {
    const int d = ke.dim();
    const double R = ke.R();
    // Pairwise field inner products for int u^2 dLebesgue, fixed up front.
    const std::size_t n = u.terms.size();
    std::vector<double> gram(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            gram[i * n + j] = field_inner_l2(u.terms[i].g, u.terms[j].g, d, R, PowerGridSpec{});

    return mc_mean(mc, [&](std::uint64_t rep) {
        SamplerSpec sp{d, R, derive_seed(mc.master_seed, rep)};
        const Configuration cfg = sample_configuration(sp);
        const double delta = skorohod(ke, u, cfg);
        std::vector<double> gvals(n);
        for (std::size_t i = 0; i < n; ++i) gvals[i] = u.terms[i].G.eval(cfg);
        double u_sq = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) u_sq += gvals[i] * gvals[j] * gram[i * n + j];
        return delta * delta - u_sq;
    });
}

} // namespace steinlab
