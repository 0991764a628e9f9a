#include <doctest.h>

#include "steinlab/errors.hpp"
#include "steinlab/experiments.hpp"
#include "steinlab/integrals.hpp"
#include "steinlab/rng.hpp"
#include "steinlab/stats.hpp"

#include <cmath>
#include <functional>

using namespace steinlab;

namespace {

double simpson_fixed(const std::function<double(double)>& f, double a, double b, int n) {
    if (n % 2 == 0) ++n;
    const double h = (b - a) / (n - 1);
    double s = f(a) + f(b);
    for (int i = 1; i < n - 1; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
}

} // namespace

TEST_CASE("compensated integral basics") {
    SUBCASE("zero field") {
        const ScalarField z = make_zero_field(2, 1.0);
        SamplerSpec sp{2, 1.0, 99};
        CHECK(compensated_integral(z, sample_configuration(sp)) == 0.0);
    }
    SUBCASE("empty configuration gives minus the compensator") {
        const ScalarField f = make_bump_field(2, {0.0, 0.0}, 0.5, 1.0);
        Configuration empty;
        empty.dim = 2;
        empty.radius = 1.0;
        CHECK(compensated_integral(f, empty) == doctest::Approx(-f.compensator).epsilon(1e-14));
        CHECK(f.compensator > 0.0);
    }
    SUBCASE("support larger than the carrier is rejected") {
        const ScalarField f = make_bump_field(2, {0.4, 0.0}, 0.8, 1.0);
        Configuration cfg;
        cfg.dim = 2;
        cfg.radius = 1.0; // |center| + rho = 1.2 > 1
        CHECK_THROWS_AS(compensated_integral(f, cfg), SupportExceedsCarrierError);
    }
}

TEST_CASE("point order does not matter") {
    const ScalarField f = make_bump_field(2, {0.1, 0.0}, 0.5, 1.0);
    Configuration cfg;
    for (std::uint64_t seed = 31415; cfg.size() < 3; ++seed)
        cfg = sample_configuration({2, 1.0, seed});
    REQUIRE(cfg.size() >= 3);
    const double before = compensated_integral(f, cfg);
    // Reverse the point order.
    Configuration rev = cfg;
    const std::size_t n = cfg.size();
    for (std::size_t i = 0; i < n; ++i)
        for (int j = 0; j < 2; ++j) rev.pts[(n - 1 - i) * 2 + j] = cfg.pts[i * 2 + j];
    CHECK(compensated_integral(f, rev) == doctest::Approx(before).epsilon(1e-13));
}

TEST_CASE("centering, isometry, and third moment against cumulants") {
    const RadialProfile prof = make_profile("g_plus", 1.0, 2);
    const RadialFieldFamily fam = build_radial_family(prof, 2);
    const ScalarField f = fam.member(1);
    const double k2 = cumulant(f, 2);
    const double k3 = cumulant(f, 3);

    const int reps = 100000;
    std::vector<double> xs(reps), cubes(reps);
    for (int i = 0; i < reps; ++i) {
        SamplerSpec sp{2, f.support_radius, derive_seed(777, i)};
        const double s = compensated_integral(f, sample_configuration(sp));
        xs[i] = s;
        cubes[i] = s * s * s;
    }
    const MeanVar mv = mean_var(xs);
    CHECK(std::fabs(mv.mean) <= 4.0 * mv.se_mean);
    CHECK(std::fabs(mv.var - k2) <= 4.0 * mv.se_var);
    const MeanVar mc = mean_var(cubes);
    CHECK(std::fabs(mc.mean - k3) <= 4.0 * mc.se_mean);
}

TEST_CASE("cumulants of radial members") {
    const RadialProfile prof = make_profile("g_plus", 1.0, 2);
    const RadialFieldFamily fam = build_radial_family(prof, 2);

    SUBCASE("kappa_2 of a normalized member is 1") {
        for (int k : {1, 4, 16}) {
            CHECK(cumulant(fam.member(k), 2) == doctest::Approx(1.0).epsilon(1e-6));
        }
    }

    SUBCASE("kappa_3 golden value at k=1") {
        // C^2 = s_2 int_0^1 g^2 r dr = 2 pi / 60, kappa_3 = 2 pi (1/280) / C^3.
        const double C = std::sqrt(2.0 * M_PI / 60.0);
        const double analytic = 2.0 * M_PI * (1.0 / 280.0) / (C * C * C);
        CHECK(analytic == doctest::Approx(0.662184346325468).epsilon(1e-12));
        const ScalarField f1 = fam.member(1);
        // Simpson oracle at 1e5 nodes.
        auto integrand = [&](double r) {
            const double v = f1.radial_value(r);
            return v * v * v * r;
        };
        const double oracle = 2.0 * M_PI * simpson_fixed(integrand, 0.0, 1.0, 100001);
        CHECK(oracle == doctest::Approx(analytic).epsilon(1e-10));
        CHECK(cumulant(f1, 3) == doctest::Approx(oracle).epsilon(1e-9));
    }

    SUBCASE("balanced profile has vanishing kappa_3") {
        const RadialProfile bal = make_profile("g_balanced", 1.0, 2);
        const RadialFieldFamily bfam = build_radial_family(bal, 2);
        for (int k : {1, 4}) {
            CHECK(std::fabs(cumulant(bfam.member(k), 3)) <= 1e-8);
        }
    }

    SUBCASE("invalid order") {
        CHECK_THROWS_AS(cumulant(fam.member(1), 1), InvalidOrderError);
    }
}

TEST_CASE("radial family scaling and gradient bound") {
    const RadialProfile prof = make_profile("g_plus", 1.0, 2);
    const RadialFieldFamily fam = build_radial_family(prof, 2);
    const ScalarField f1 = fam.member(1);

    SUBCASE("kappa_k(f_j) = kappa_k(f_1) j^{1-k/2}") {
        for (int j : {2, 4, 9}) {
            const ScalarField fj = fam.member(j);
            for (int k : {2, 3, 4}) {
                const double expected =
                    cumulant(f1, k) * std::pow(static_cast<double>(j), 1.0 - 0.5 * k);
                CHECK(cumulant(fj, k) == doctest::Approx(expected).epsilon(1e-7));
            }
        }
    }

    SUBCASE("paper gradient bound and exact sup") {
        const int d = 2;
        for (int k : {1, 4, 16}) {
            const ScalarField fk = fam.member(k);
            const double exact = prof.sup_gprime /
                                 (fam.C * std::sqrt(static_cast<double>(k)) *
                                  std::pow(static_cast<double>(k), 1.0 / d));
            CHECK(fk.sup_grad_norm == doctest::Approx(exact).epsilon(1e-12));
            const double paper_sq =
                prof.sup_gprime * prof.sup_gprime * d /
                (fam.C * fam.C * std::pow(static_cast<double>(k), 1.0 + 2.0 / d));
            CHECK(fk.stein_grad_bound * fk.stein_grad_bound ==
                  doctest::Approx(paper_sq).epsilon(1e-12));
            CHECK(fk.sup_grad_norm <= fk.stein_grad_bound);
        }
    }

    SUBCASE("member support scales like R k^{1/d}") {
        CHECK(fam.member(16).support_radius == doctest::Approx(4.0).epsilon(1e-14));
    }

    SUBCASE("degenerate profile is rejected") {
        RadialProfile zero;
        zero.R = 1.0;
        zero.g = [](double) { return 0.0; };
        zero.gprime = [](double) { return 0.0; };
        zero.sup_gprime = 0.0;
        CHECK_THROWS_AS(build_radial_family(zero, 2), DegenerateProfileError);
    }
}

TEST_CASE("field gradients match finite differences") {
    Rng rng(2718);
    const RadialProfile prof = make_profile("g_balanced", 1.0, 2);
    const RadialFieldFamily fam = build_radial_family(prof, 2);
    const ScalarField fields[] = {make_bump_field(2, {0.2, -0.1}, 0.4, 1.0), fam.member(4)};
    for (const ScalarField& f : fields) {
        std::vector<double> g(2);
        int checked = 0;
        while (checked < 40) {
            std::vector<double> x(2);
            rng.point_in_ball(2, 0.9 * f.support_radius, x);
            for (int j = 0; j < 2; ++j) x[j] += f.support_center[j];
            if (norm2(x) < 0.05) continue; // radial lift kinks at the origin
            f.gradient(x, g);
            const double step = 1e-6 * f.support_radius;
            for (int j = 0; j < 2; ++j) {
                std::vector<double> xp = x, xm = x;
                xp[j] += step;
                xm[j] -= step;
                const double fd = (f.value(xp) - f.value(xm)) / (2.0 * step);
                const double scale = std::max(std::fabs(fd), 1e-3 * f.sup_grad_norm);
                CHECK(std::fabs(g[j] - fd) / scale <= 1e-5);
            }
            ++checked;
        }
    }
}

TEST_CASE("profile derivative matches finite differences") {
    for (const char* name : {"g_plus", "g_balanced"}) {
        const RadialProfile prof = make_profile(name, 1.0, 2);
        CHECK(std::fabs(prof.g(prof.R)) <= 1e-14);
        Rng rng(99);
        for (int i = 0; i < 50; ++i) {
            const double r = 1e-3 + 0.997 * rng.uniform();
            const double fd = (prof.g(r + 1e-7) - prof.g(r - 1e-7)) / 2e-7;
            CHECK(prof.gprime(r) == doctest::Approx(fd).epsilon(1e-5));
        }
    }
}
