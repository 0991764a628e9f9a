#pragma once

#include "steinlab/geometry.hpp"
#include "steinlab/rng.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace steinlab {

// Finite realization of the Poisson random measure on B(0, radius).
struct Configuration {
    int dim = 2;
    double radius = 1.0;
    std::vector<double> pts; // flat, size() * dim

    std::size_t size() const { return dim > 0 ? pts.size() / dim : 0; }
    std::span<const double> point(std::size_t i) const {
        return {pts.data() + i * dim, static_cast<std::size_t>(dim)};
    }
};

struct SamplerSpec {
    int dim = 2;       // d >= 2
    double radius = 1.0;
    std::uint64_t seed = 0;
};

// N ~ Poisson(v_d R^d), then N points uniform on B(0, R). Deterministic
// given the seed.
Configuration sample_configuration(const SamplerSpec& spec);

// Monte Carlo run settings. Replication i always uses derive_seed(master_seed,
// i); chunked accumulation merges in fixed order, so results do not depend on
// the worker count.
struct McSettings {
    std::size_t replications = 100000;
    std::uint64_t master_seed = 1;
    int workers = 2;
    std::size_t chunk = 1024;
};

} // namespace steinlab
