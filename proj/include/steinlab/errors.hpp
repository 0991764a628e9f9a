#pragma once

#include <stdexcept>
#include <string>

namespace steinlab {

// Thrown by kernel evaluation when |x - y| is below the singularity guard.
struct CoincidentPointsError : std::domain_error {
    explicit CoincidentPointsError(const std::string& what) : std::domain_error(what) {}
};

// Adaptive quadrature failed to reach its tolerance within the doubling budget.
struct QuadratureBudgetExceeded : std::runtime_error {
    explicit QuadratureBudgetExceeded(const std::string& what) : std::runtime_error(what) {}
};

struct SupportExceedsCarrierError : std::invalid_argument {
    explicit SupportExceedsCarrierError(const std::string& what) : std::invalid_argument(what) {}
};

struct InvalidOrderError : std::invalid_argument {
    explicit InvalidOrderError(const std::string& what) : std::invalid_argument(what) {}
};

struct DegenerateProfileError : std::invalid_argument {
    explicit DegenerateProfileError(const std::string& what) : std::invalid_argument(what) {}
};

struct EmptySampleError : std::invalid_argument {
    explicit EmptySampleError(const std::string& what) : std::invalid_argument(what) {}
};

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace steinlab
