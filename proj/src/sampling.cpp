#include "steinlab/sampling.hpp"

#include "steinlab/errors.hpp"

namespace steinlab {

Configuration sample_configuration(const SamplerSpec& spec) {
    if (spec.dim < 2) throw ConfigError("sample_configuration: dim must be >= 2");
    if (!(spec.radius > 0.0)) throw ConfigError("sample_configuration: radius must be > 0");
    Rng rng(spec.seed);
    const double mass = ball_volume(spec.dim, spec.radius);
    const std::uint64_t n = rng.poisson(mass);
    Configuration cfg;
    cfg.dim = spec.dim;
    cfg.radius = spec.radius;
    cfg.pts.resize(n * spec.dim);
    for (std::uint64_t i = 0; i < n; ++i) {
        rng.point_in_ball(spec.dim, spec.radius,
                          std::span<double>(cfg.pts.data() + i * spec.dim, spec.dim));
    }
    return cfg;
}

} // namespace steinlab
