#pragma once

#include "steinlab/fields.hpp"
#include "steinlab/kernel.hpp"
#include "steinlab/sampling.hpp"

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace steinlab {

// Smooth map R^m -> R with first partial derivatives.
struct SmoothRm {
    int arity = 1;
    std::function<double(std::span<const double>)> value;
    std::function<void(std::span<const double>, std::span<double>)> partials;
};

SmoothRm smooth_constant(double c);
SmoothRm smooth_linear_sum(int arity);   // a_1 + ... + a_m
SmoothRm smooth_sin_sum(int arity);      // sin(a_1 + ... + a_m)
SmoothRm smooth_tanh_sum(int arity);     // tanh(a_1 + ... + a_m)

// F = phi(<h_1, gamma>, ..., <h_m, gamma>) with <h, gamma> = sum_i h(X_i).
// Each h_j is compactly supported inside the carrier ball, which gives the
// continuity condition of the cylindrical class for free.
struct CylindricalFunctional {
    SmoothRm phi;
    std::vector<ScalarField> fields;

    void args(const Configuration& cfg, std::span<double> out) const;
    double eval(const Configuration& cfg) const;
    // Largest first coordinate reachable by the fields' supports (order metadata).
    double support_first_max() const;
};

struct SimpleProcessTerm {
    ScalarField g;
    CylindricalFunctional G;
};

// u = sum_i g_i G_i. `predictable` declares the first-coordinate order
// metadata A_i <= Supp(g_i); validate with check_predictable_order.
struct SimpleProcess {
    std::vector<SimpleProcessTerm> terms;
    bool predictable = false;

    double eval(const Configuration& cfg, std::span<const double> x) const;
};

bool check_predictable_order(const SimpleProcess& u);

// D_y F = sum_j d_j phi * sum_i <G_eta(X_i, y), grad h_j(X_i)>; atoms within
// the excision radius of y are skipped.
double gradient_D(const KernelEvaluator& ke, const CylindricalFunctional& F,
                  const Configuration& cfg, std::span<const double> y);

// D_y u_x = sum_t g_t(x) D_y G_t.
double process_gradient_D(const KernelEvaluator& ke, const SimpleProcess& u,
                          const Configuration& cfg, std::span<const double> x,
                          std::span<const double> y);

// Correction term <g, DG> of one Skorohod summand, by quadrature.
double skorohod_correction_term(const KernelEvaluator& ke, const SimpleProcessTerm& term,
                                const Configuration& cfg);

// delta(u) = sum_i (G_i delta(g_i) - <g_i, DG_i>). The correction vanishes for
// predictable u and is skipped there unless force_correction is set.
double skorohod(const KernelEvaluator& ke, const SimpleProcess& u, const Configuration& cfg,
                bool force_correction = false);

// <u, DF>_{L^2} for one realization.
double inner_u_DF(const KernelEvaluator& ke, const SimpleProcess& u,
                  const CylindricalFunctional& F, const Configuration& cfg);

// Covariant derivative. Deterministic h: D term vanishes and the value is
// <G_eta(x, y), grad h(x)>.
double covariant_nabla(const KernelEvaluator& ke, const ScalarField& h,
                       std::span<const double> x, std::span<const double> y);
double covariant_nabla(const KernelEvaluator& ke, const SimpleProcess& u,
                       const Configuration& cfg, std::span<const double> x,
                       std::span<const double> y);

struct PowerGridSpec {
    int n_radial = 56;
    int n_sphere = 96;
};

// (nabla~ h)^n f: iterates x -> <V_f(x), grad h(x)> materialized on a polar
// grid over B(ke.R()) and re-interpolated linearly between nodes.
ScalarField operator_power_apply(const KernelEvaluator& ke, const ScalarField& h, int n,
                                 const ScalarField& f, const PowerGridSpec& grid = {});

// <a, b>_{L^2(B(0,R))} on the polar quadrature grid.
double field_inner_l2(const ScalarField& a, const ScalarField& b, int dim, double R,
                      const PowerGridSpec& grid = {});

double field_l2_norm_grid(const ScalarField& a, int dim, double R,
                          const PowerGridSpec& grid = {});

// Gamma_k applied to 1 for deterministic h, through the operator-power route
// <(nabla~ h)^{k-2} h, h> (the DF term vanishes on constants).
double gamma_deterministic(const KernelEvaluator& ke, const ScalarField& h, int k,
                           const PowerGridSpec& grid = {});

// Scalar test function with derivatives up to order 3.
struct TestFunction {
    std::string name;
    std::array<std::function<double(double)>, 4> deriv;
    double eval(int order, double z) const { return deriv[order](z); }
};
TestFunction test_function_sin();
TestFunction test_function_linear();
TestFunction make_test_function(const std::string& name);

struct EdgeworthResult {
    double lhs = 0.0;                     // E[delta(f) g(delta(f))]
    std::vector<double> expansion_terms;  // (kappa_{k+1}/k!) E[g^(k)], k = 1..n+1
    double residual = 0.0;                // lhs - sum of terms
    double residual_se = 0.0;
    double remainder_bound = 0.0;         // (K_d v_d R')^{n+1} ||f||_2 ||grad f||_inf^{n+1}
    std::size_t replications = 0;
};

// Monte Carlo check of the Edgeworth expansion for a deterministic integrand,
// all expectations on common random numbers. order n in {0, 1, 2}.
EdgeworthResult edgeworth_residual(const KernelEvaluator& ke, const ScalarField& f,
                                   const TestFunction& g, int order, const McSettings& mc);

// Pathwise |D_y delta(h) - h(y) - delta(covariant_nabla_y h)|; the compensator
// of the covariant derivative is evaluated by quadrature.
double commutation_check(const KernelEvaluator& ke, const ScalarField& h,
                         const Configuration& cfg, std::span<const double> y);

// Built-in fixture pairs (u, F) for the duality checks. Index 0 is
// predictable; index 1 exercises the nonzero correction path.
struct DualityFixture {
    std::string name;
    SimpleProcess u;
    CylindricalFunctional F;
};
DualityFixture make_duality_fixture(int index, const KernelEvaluator& ke);

struct McMeanResult {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t replications = 0;
};

// E[<u, DF> - F delta(u)] with paired samples; duality says the mean is 0.
McMeanResult duality_gap(const KernelEvaluator& ke, const DualityFixture& fixture,
                         const McSettings& mc);

// E[delta(u)^2 - int u^2 dLebesgue] for predictable u (isometry).
McMeanResult predictable_isometry_gap(const KernelEvaluator& ke, const SimpleProcess& u,
                                      const McSettings& mc);

} // namespace steinlab
