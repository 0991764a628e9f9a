#include "steinlab/errors.hpp"
#include "steinlab/experiments.hpp"
#include "steinlab/version.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>

using namespace steinlab;

namespace {

int run_subcommand(ExperimentKind kind, const std::string& config_path,
                   const std::string& out_dir, const std::string& seed_opt, int workers) {
    KeyValueConfig cfg = KeyValueConfig::from_file(config_path);
    ExperimentSpec spec = spec_from_config(kind, cfg);

    // Seed precedence: config < STEINLAB_SEED < --seed.
    if (const char* env = std::getenv("STEINLAB_SEED")) {
        try {
            spec.mc.master_seed = std::stoull(env);
        } catch (const std::exception&) {
            throw ConfigError(std::string("STEINLAB_SEED is not a u64: ") + env);
        }
    }
    if (!seed_opt.empty()) {
        try {
            spec.mc.master_seed = std::stoull(seed_opt);
        } catch (const std::exception&) {
            throw ConfigError("--seed is not a u64: " + seed_opt);
        }
    }
    if (workers > 0) spec.mc.workers = workers;
    if (!out_dir.empty()) spec.out_dir = out_dir;

    const ExperimentResult result = run_experiment(spec);

    std::cout << result.provenance;
    for (const auto& c : result.checks) {
        std::cout << (c.pass ? "[PASS] " : "[FAIL] ") << c.name << " value=" << c.value
                  << " threshold=" << c.threshold;
        if (!c.detail.empty()) std::cout << " (" << c.detail << ")";
        std::cout << "\n";
    }
    for (const auto& s : result.summary) std::cout << "# " << s << "\n";
    if (!result.csv_rows.empty() && spec.out_dir.empty()) {
        std::cout << result.csv_header << "\n";
        for (const auto& row : result.csv_rows) std::cout << row << "\n";
    }
    write_outputs(result, spec, spec.out_dir);
    return result.all_passed() ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"steinlab: Stein bounds and Malliavin identities for compensated "
                 "Poisson integrals on balls"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);

    static const char* names[] = {"verify-kernel", "identities", "rates", "bounds", "edgeworth"};
    struct Opts {
        std::string config;
        std::string out;
        std::string seed;
        int workers = 0;
    };
    std::vector<Opts> opts(5);
    for (int i = 0; i < 5; ++i) {
        CLI::App* sub = app.add_subcommand(names[i]);
        sub->add_option("--config", opts[i].config, "config file (key = value)")->required();
        sub->add_option("--out", opts[i].out, "output directory");
        sub->add_option("--seed", opts[i].seed, "master seed override");
        sub->add_option("--workers", opts[i].workers, "worker thread count");
    }

    CLI11_PARSE(app, argc, argv);

    try {
        for (int i = 0; i < 5; ++i) {
            if (app.get_subcommands().at(0)->get_name() == names[i]) {
                return run_subcommand(experiment_from_name(names[i]), opts[i].config,
                                      opts[i].out, opts[i].seed, opts[i].workers);
            }
        }
        std::cerr << "error: no subcommand\n";
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
