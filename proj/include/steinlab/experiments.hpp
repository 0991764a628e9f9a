#pragma once

#include "steinlab/config.hpp"
#include "steinlab/fields.hpp"
#include "steinlab/kernel.hpp"
#include "steinlab/sampling.hpp"

#include <optional>
#include <string>
#include <vector>

namespace steinlab {

enum class ExperimentKind { VerifyKernel, Identities, Rates, Bounds, Edgeworth };

const char* experiment_name(ExperimentKind kind);
ExperimentKind experiment_from_name(const std::string& name);

struct ExperimentSpec {
    ExperimentKind kind = ExperimentKind::VerifyKernel;
    int dim = 2;
    double R = 1.0;
    std::string profile;            // builtin name(s) or poly:..., per experiment defaults
    std::vector<int> k_grid = {1, 4, 16, 64};
    McSettings mc;
    QuadraturePolicy quad;
    std::optional<double> eta_center_x1; // kernel placement override (negative controls)
    std::optional<double> eta_rho;
    std::vector<int> edgeworth_orders = {1, 2};
    int edgeworth_k = 16;
    std::string edgeworth_test_g = "sin";
    std::size_t kd_pairs = 10000;
    std::string out_dir;
};

// Builds a spec from flat config text; rejects unknown keys and invalid
// values (ConfigError).
ExperimentSpec spec_from_config(ExperimentKind kind, const KeyValueConfig& cfg);

// Builtin profiles on [0, R]: g_plus (sign-definite), g_balanced (cubic
// balance, int g^3 r^{d-1} dr = 0 by root-finding), or poly:c0,c1,... in
// s = r/R with sum c_i = 0.
RadialProfile make_profile(const std::string& name, double R, int dim);

struct CheckRow {
    std::string name;
    bool pass = false;
    double value = 0.0;
    double threshold = 0.0;
    std::string detail;
};

struct ExperimentResult {
    std::vector<CheckRow> checks;
    std::string csv_header;
    std::vector<std::string> csv_rows;
    std::vector<std::string> summary;
    std::vector<std::pair<std::string, std::string>> plot_files; // name -> content
    std::string provenance;

    bool all_passed() const;
};

ExperimentResult run_verify_kernel(const ExperimentSpec& spec);
ExperimentResult run_identities(const ExperimentSpec& spec);
ExperimentResult run_rates(const ExperimentSpec& spec);
ExperimentResult run_bounds(const ExperimentSpec& spec);
ExperimentResult run_edgeworth(const ExperimentSpec& spec);
ExperimentResult run_experiment(const ExperimentSpec& spec);

// Writes <name>.csv, <name>_checks.txt and the plot files under out_dir.
void write_outputs(const ExperimentResult& result, const ExperimentSpec& spec,
                   const std::string& out_dir);

// Kernel evaluator from the experiment's kernel settings (including placement
// overrides), with K_d estimated from the master seed.
KernelEvaluator build_kernel(const ExperimentSpec& spec);

} // namespace steinlab
