#include <doctest.h>

#include "steinlab/errors.hpp"
#include "steinlab/sampling.hpp"
#include "steinlab/stats.hpp"

#include <cmath>

using namespace steinlab;

TEST_CASE("poisson count matches intensity mass") {
    // d=2, R=1: E[N] = Var[N] = pi.
    const int reps = 100000;
    std::vector<double> counts(reps);
    for (int i = 0; i < reps; ++i) {
        SamplerSpec sp{2, 1.0, derive_seed(11, i)};
        counts[i] = static_cast<double>(sample_configuration(sp).size());
    }
    const MeanVar mv = mean_var(counts);
    CHECK(std::fabs(mv.mean - M_PI) <= 4.0 * mv.se_mean);
    CHECK(std::fabs(mv.var - M_PI) <= 4.0 * mv.se_var);
}

TEST_CASE("points are uniform on the ball") {
    // Fraction with |x| <= R/2 is 1/4 in d=2.
    std::size_t inside = 0, total = 0;
    for (int i = 0; i < 20000; ++i) {
        SamplerSpec sp{2, 1.0, derive_seed(22, i)};
        const Configuration cfg = sample_configuration(sp);
        for (std::size_t j = 0; j < cfg.size(); ++j) {
            ++total;
            if (norm2(cfg.point(j)) <= 0.5) ++inside;
        }
    }
    const double frac = static_cast<double>(inside) / total;
    const double se = std::sqrt(0.25 * 0.75 / total);
    CHECK(std::fabs(frac - 0.25) <= 5.0 * se);
}

TEST_CASE("same seed reproduces the configuration byte for byte") {
    SamplerSpec sp{3, 2.0, 987654321};
    const Configuration a = sample_configuration(sp);
    const Configuration b = sample_configuration(sp);
    REQUIRE(a.size() == b.size());
    CHECK(a.pts == b.pts);
}

TEST_CASE("all points lie in the open ball") {
    for (int i = 0; i < 50; ++i) {
        SamplerSpec sp{3, 1.7, derive_seed(33, i)};
        const Configuration cfg = sample_configuration(sp);
        for (std::size_t j = 0; j < cfg.size(); ++j) CHECK(norm2(cfg.point(j)) < 1.7);
    }
}

TEST_CASE("sampler rejects invalid specs") {
    CHECK_THROWS_AS(sample_configuration(SamplerSpec{1, 1.0, 0}), ConfigError);
    CHECK_THROWS_AS(sample_configuration(SamplerSpec{2, -1.0, 0}), ConfigError);
}
