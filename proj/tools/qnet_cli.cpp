// qnet: command-line front end for runs, sweeps, steady-state solves and the oracle suite.

#include <iomanip>
#include <iostream>

#include "CLI11.hpp"
#include "qnet/config.hpp"
#include "qnet/error.hpp"
#include "qnet/runner.hpp"
#include "qnet/validate.hpp"

namespace {

struct Flags {
    std::string config;
    std::string output;
    std::optional<double> dt;
    std::optional<std::uint64_t> seed;
    int workers = 0;

    qnet::RunOptions options() const {
        qnet::RunOptions o;
        if (!output.empty()) o.output_directory = output;
        o.dt = dt;
        o.seed = seed;
        o.workers = workers;
        return o;
    }
};

void add_common(CLI::App* cmd, Flags& flags, bool needs_config) {
    auto* c = cmd->add_option("-c,--config", flags.config, "JSON config document");
    if (needs_config) c->required()->check(CLI::ExistingFile);
    cmd->add_option("-o,--output", flags.output, "output directory (overrides the config)");
    cmd->add_option("--dt", flags.dt, "fixed-step size override")->check(CLI::PositiveNumber);
    cmd->add_option("--seed", flags.seed, "seed for random noise profiles");
    cmd->add_option("-j,--workers", flags.workers, "concurrent sweep points (0 = all cores)")
        ->check(CLI::NonNegativeNumber);
}

int list_presets() {
    for (const auto& info : qnet::preset_catalog()) {
        std::cout << info.name << ": " << info.summary << '\n';
        for (const auto& [k, v] : info.defaults) std::cout << "    " << k << " = " << v << '\n';
        for (const auto& [k, v] : info.option_defaults) std::cout << "    " << k << " = \"" << v << "\"\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Lindblad simulator for open quantum networks"};
    app.set_version_flag("--version", qnet::kToolVersion);
    app.require_subcommand(1);

    Flags flags;
    auto* run_cmd = app.add_subcommand("run", "propagate one configuration");
    add_common(run_cmd, flags, true);
    auto* sweep_cmd = app.add_subcommand("sweep", "propagate one configuration per parameter value");
    add_common(sweep_cmd, flags, true);
    auto* steady_cmd = app.add_subcommand("steady", "null space of the superoperator");
    add_common(steady_cmd, flags, true);
    auto* validate_cmd = app.add_subcommand("validate", "oracle-vs-numerics suite");
    double validate_dt = qnet::ValidationOptions{}.dt;
    validate_cmd->add_option("--dt", validate_dt, "fixed-step size of the integrator checks")
        ->check(CLI::PositiveNumber);
    app.add_subcommand("presets", "list presets and their parameters");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*run_cmd) {
            const auto outcome = qnet::run(qnet::load_run_config(flags.config), flags.options());
            if (!outcome.table.empty()) std::cout << outcome.table.string() << '\n';
            std::cout << outcome.metadata.string() << '\n';
            return 0;
        }
        if (*sweep_cmd) {
            const auto outcome = qnet::sweep(qnet::load_sweep_config(flags.config), flags.options());
            std::cout << outcome.table.string() << '\n' << outcome.metadata.string() << '\n';
            if (outcome.effect)
                std::cout << qnet::to_string(outcome.effect->effect) << ": "
                          << (outcome.effect->detected ? "detected" : "not detected") << " ("
                          << outcome.effect->diagnostics << ")\n";
            return 0;
        }
        if (*steady_cmd) {
            const auto report = qnet::steady(qnet::load_run_config(flags.config), flags.options());
            std::cout << report.dump(2) << '\n';
            return 0;
        }
        if (*validate_cmd) {
            const auto report = qnet::run_validation({validate_dt});
            qnet::print_report(std::cout, report);
            return report.all_passed() ? 0 : static_cast<int>(qnet::ErrorKind::oracle_mismatch);
        }
        return list_presets();
    } catch (const qnet::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return e.exit_code();
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: malformed config: " << e.what() << '\n';
        return 1;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
