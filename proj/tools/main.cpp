#include "stemdde/commands.hpp"
#include "stemdde/errors.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>

using namespace stemdde;

int main(int argc, char** argv) {
    CLI::App app{"stemdde - simulator for a two-component stem-cell maturation system with a "
                 "threshold-defined state-dependent delay"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool seed_set = false;
    bool auto_compat = false;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "path to the JSON run configuration")->required();
        sub->add_option("--out", out_dir, "output directory (overrides config and STEMDDE_OUT)");
        sub->add_option("--seed", seed, "RNG seed override")->each([&](const std::string&) {
            seed_set = true;
        });
    };

    CLI::App* sim = app.add_subcommand("simulate", "integrate the system and write trajectory.csv");
    add_common(sim);
    sim->add_flag("--auto-compat", auto_compat,
                  "project the initial history onto the solution manifold first");

    CLI::App* chk = app.add_subcommand("check", "run the model-hypothesis checks (G, Lb, S)");
    add_common(chk);

    CLI::App* dchk = app.add_subcommand("derivcheck", "derivative formulas vs finite differences");
    add_common(dchk);

    CLI::App* eq = app.add_subcommand("equilibria", "locate equilibria and their residuals");
    add_common(eq);

    CLI11_PARSE(app, argc, argv);

    try {
        RunConfig cfg = RunConfig::load_file(config_path);
        if (seed_set) cfg.seed = seed;
        if (auto_compat) cfg.auto_compat = true;
        std::string dir = cfg.out_dir;
        if (const char* env = std::getenv("STEMDDE_OUT"); env && *env) dir = env;
        if (!out_dir.empty()) dir = out_dir;

        if (sim->parsed()) return cmd_simulate(cfg, dir);
        if (chk->parsed()) return cmd_check(cfg, dir);
        if (dchk->parsed()) return cmd_derivcheck(cfg, dir);
        if (eq->parsed()) return cmd_equilibria(cfg, dir);
    } catch (const ConfigError& ex) {
        std::cerr << "config error: " << ex.what() << "\n";
        return exit_config_error;
    } catch (const CompatibilityError& ex) {
        std::cerr << "precondition error: " << ex.what() << "\n";
        return exit_config_error;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return exit_inner_failure;
    }
    return exit_config_error;
}
