#include <doctest.h>

#include "steinlab/errors.hpp"
#include "steinlab/experiments.hpp"
#include "steinlab/integrals.hpp"
#include "steinlab/rng.hpp"
#include "steinlab/stats.hpp"
#include "steinlab/stein.hpp"

#include <cmath>

using namespace steinlab;

namespace {

KernelEvaluator make_ke() {
    KernelEvaluator ke(make_default_bump(2, 1.0), 1.0);
    ke.estimate_kd(10000, 555);
    return ke;
}

} // namespace

TEST_CASE("classical bound") {
    SUBCASE("zero field gives 1") {
        CHECK(classical_bound(make_zero_field(2, 1.0)) == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("normalized member: bound equals the absolute third moment") {
        const RadialFieldFamily fam = build_radial_family(make_profile("g_plus", 1.0, 2), 2);
        for (int k : {1, 4}) {
            const ScalarField f = fam.member(k);
            // g_plus is nonnegative, so int |f|^3 = kappa_3 = 0.6621843.../sqrt(k).
            const double expect = 0.662184346325468 / std::sqrt(static_cast<double>(k));
            CHECK(classical_bound(f) == doctest::Approx(expect).epsilon(1e-6));
        }
    }
}

TEST_CASE("third-cumulant bound") {
    const KernelEvaluator ke = make_ke();
    const RadialFieldFamily fam = build_radial_family(make_profile("g_plus", 1.0, 2), 2);
    const RadialFieldFamily bal = build_radial_family(make_profile("g_balanced", 1.0, 2), 2);

    SUBCASE("components add up; normalized member drops the variance gap") {
        const ScalarField f = fam.member(4);
        const BoundReport rep = bound_report(f, ke, &fam, 4);
        CHECK(rep.classical ==
              doctest::Approx(rep.classical_parts.variance_gap +
                              rep.classical_parts.cumulant_term).epsilon(1e-12));
        CHECK(rep.third_cumulant ==
              doctest::Approx(rep.third_parts.variance_gap + rep.third_parts.cumulant_term +
                              rep.third_parts.remainder).epsilon(1e-12));
        CHECK(rep.third_parts.variance_gap <= 1e-6); // ||f||_2 = 1
        CHECK(rep.kd_is_empirical);
        CHECK(rep.kd_used == ke.kd());
        CHECK_FALSE(rep.o1k.has_value()); // g_plus is not balanced
    }

    SUBCASE("balanced member: cumulant term vanishes") {
        const ScalarField f = bal.member(4);
        const BoundReport rep = bound_report(f, ke, &bal, 4);
        CHECK(rep.third_parts.cumulant_term <= 1e-8);
        CHECK(rep.o1k.has_value());
    }

    SUBCASE("8 (K v R)^2 equals 2 (K v R')^2 with R' = 2R") {
        const double K = ke.kd(), v = unit_ball_volume(2), R = 1.0;
        CHECK(8.0 * std::pow(K * v * R, 2) ==
              doctest::Approx(2.0 * std::pow(K * v * 2.0 * R, 2)).epsilon(1e-14));
    }

    SUBCASE("kd must be estimated first") {
        KernelEvaluator fresh(make_default_bump(2, 1.0), 1.0);
        CHECK_THROWS_AS(third_cumulant_bound(fam.member(1), fresh), ConfigError);
    }
}

TEST_CASE("o1k bound closed form") {
    const KernelEvaluator ke = make_ke();
    const RadialFieldFamily bal = build_radial_family(make_profile("g_balanced", 1.0, 2), 2);

    SUBCASE("exact 1/k scaling and log-log slope -1") {
        const double b1 = o1k_bound(bal, 1, ke);
        std::vector<double> ks, vals;
        for (int k = 1; k <= 256; k *= 2) {
            const double bk = o1k_bound(bal, k, ke);
            CHECK(bk * k == doctest::Approx(b1).epsilon(1e-12));
            ks.push_back(k);
            vals.push_back(bk);
        }
        const SlopeFit fit = fit_loglog_slope(ks, vals);
        CHECK(std::fabs(fit.slope + 1.0) <= 1e-6);
    }

    SUBCASE("matches the third-cumulant remainder at k = 1 (paper gradient bound)") {
        const ScalarField f1 = bal.member(1);
        const BoundReport rep = bound_report(f1, ke, &bal, 1);
        CHECK(*rep.o1k == doctest::Approx(rep.third_parts.remainder).epsilon(1e-10));
    }

    SUBCASE("unbalanced profile warns") {
        const RadialFieldFamily fam = build_radial_family(make_profile("g_plus", 1.0, 2), 2);
        bool unbalanced = false;
        o1k_bound(fam, 4, ke, &unbalanced);
        CHECK(unbalanced);
    }
}

TEST_CASE("wasserstein estimator") {
    SUBCASE("point mass at zero") {
        std::vector<double> zeros(5000, 0.0);
        CHECK(std::fabs(wasserstein_value(zeros) - std::sqrt(2.0 / M_PI)) <= 1e-12);
    }

    SUBCASE("quantile grid is nearly Gaussian") {
        const int n = 10000;
        std::vector<double> grid(n);
        for (int i = 0; i < n; ++i) grid[i] = normal_quantile((i + 0.5) / n);
        CHECK(wasserstein_value(grid) <= 1e-3);
    }

    SUBCASE("gaussian sample at n = 1e5") {
        Rng rng(17);
        std::vector<double> xs(100000);
        for (auto& v : xs) v = rng.normal();
        CHECK(wasserstein_value(xs) <= 0.01);
    }

    SUBCASE("median decreases with sample size (20 seeds)") {
        std::vector<double> med;
        for (std::size_t n : {1000u, 10000u, 100000u}) {
            std::vector<double> vals;
            for (int seed = 0; seed < 20; ++seed) {
                Rng rng(derive_seed(1010, 100 * seed + n));
                std::vector<double> xs(n);
                for (auto& v : xs) v = rng.normal();
                vals.push_back(wasserstein_value(xs));
            }
            med.push_back(median_of(vals));
        }
        CHECK(med[0] > med[1]);
        CHECK(med[1] > med[2]);
    }

    SUBCASE("bootstrap is deterministic given the samples") {
        Rng rng(3);
        std::vector<double> xs(2000);
        for (auto& v : xs) v = rng.normal();
        const WassersteinEstimate a = wasserstein_to_gaussian(xs, 200, 2);
        const WassersteinEstimate b = wasserstein_to_gaussian(xs, 200, 1);
        CHECK(a.value == b.value);
        CHECK(a.std_error == b.std_error);
        CHECK(a.std_error > 0.0);
    }

    SUBCASE("empty and single samples are rejected") {
        CHECK_THROWS_AS(wasserstein_to_gaussian({}, 10, 1), EmptySampleError);
        CHECK_THROWS_AS(wasserstein_to_gaussian({1.0}, 10, 1), EmptySampleError);
    }
}

TEST_CASE("mc_distance") {
    SUBCASE("zero field gives the point-mass distance") {
        McSettings mc;
        mc.replications = 4000;
        mc.workers = 2;
        const WassersteinEstimate est = mc_distance(make_zero_field(2, 1.0), mc);
        CHECK(est.value == doctest::Approx(std::sqrt(2.0 / M_PI)).epsilon(1e-12));
    }

    SUBCASE("same seed twice is identical; bound dominates") {
        const KernelEvaluator ke = make_ke();
        const RadialFieldFamily fam = build_radial_family(make_profile("g_plus", 1.0, 2), 2);
        const ScalarField f = fam.member(16);
        McSettings mc;
        mc.replications = 20000;
        mc.workers = 2;
        mc.master_seed = 777;
        const WassersteinEstimate a = mc_distance(f, mc);
        mc.workers = 1;
        const WassersteinEstimate b = mc_distance(f, mc);
        CHECK(a.value == b.value); // worker count cannot change the result
        CHECK(a.std_error == b.std_error);
        CHECK(a.value <= classical_bound(f) + 4.0 * a.std_error);
        CHECK(a.value <= third_cumulant_bound(f, ke) + 4.0 * a.std_error);
    }
}
