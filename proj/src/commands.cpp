#include "stemdde/commands.hpp"

#include "stemdde/errors.hpp"
#include "stemdde/verification.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace stemdde {

namespace {

std::filesystem::path ensure_out_dir(const std::string& out_dir) {
    std::filesystem::path dir(out_dir);
    std::filesystem::create_directories(dir);
    return dir;
}

int status_to_exit(TerminationStatus s) {
    switch (s) {
    case TerminationStatus::reached_T: return exit_ok;
    case TerminationStatus::domain_exit: return exit_domain_exit;
    case TerminationStatus::norm_blowup: return exit_norm_blowup;
    case TerminationStatus::inner_failure: return exit_inner_failure;
    }
    return exit_inner_failure;
}

void write_report(const ConditionReport& report, const std::filesystem::path& dir) {
    {
        std::ofstream txt(dir / "report.txt");
        txt << report.to_text();
    }
    {
        std::ofstream js(dir / "report.json");
        js << report.to_json_string() << "\n";
    }
}

} // namespace

int cmd_simulate(const RunConfig& cfg, const std::string& out_dir) {
    const auto dir = ensure_out_dir(out_dir);
    HistorySegment phi0 = cfg.build_initial_history();
    InnerOptions inner{cfg.integrator.inner_m};
    if (cfg.auto_compat) {
        phi0 = make_compatible(cfg.rates, phi0, inner);
    } else if (manifold_residual(cfg.rates, phi0, inner) > cfg.integrator.x_tol) {
        throw CompatibilityError(
            "initial history is off the solution manifold; set auto_compat or fix the history");
    }
    const auto result = integrate(cfg.rates, phi0, cfg.T, cfg.integrator);
    std::ofstream csv(dir / "trajectory.csv");
    result.trajectory.write_csv(csv, result.termination);
    std::cout << "simulate: status=" << to_string(result.termination.status)
              << " t_stop=" << result.termination.t_stop << " steps="
              << result.trajectory.records().size() - 1 << " -> " << (dir / "trajectory.csv").string()
              << "\n";
    return status_to_exit(result.termination.status);
}

int cmd_check(const RunConfig& cfg, const std::string& out_dir) {
    const auto dir = ensure_out_dir(out_dir);
    ConditionReport report;
    report.entries.push_back(check_G(cfg.rates, cfg.check.y_lo, cfg.check.y_hi, cfg.check.n_grid));

    // The remaining checks evaluate the functionals along sampled histories;
    // if the quantitative bounds above are broken those can fail loudly.
    for (const char* functional : {"tau", "F"}) {
        try {
            report.entries.push_back(estimate_Lb(functional, cfg.rates, cfg.check.sampler,
                                                 cfg.check.lb_pairs, cfg.seed,
                                                 InnerOptions{cfg.integrator.inner_m}));
        } catch (const std::runtime_error& ex) {
            CheckEntry e;
            e.name = std::string("Lb-") + functional;
            e.verdict = Verdict::fail;
            e.witness_text = std::string("error while sampling: ") + ex.what();
            report.entries.push_back(std::move(e));
        }
    }
    try {
        report.entries.push_back(check_S(cfg.rates, cfg.check.s_probes, cfg.seed,
                                         cfg.check.sampler, InnerOptions{cfg.integrator.inner_m}));
    } catch (const std::runtime_error& ex) {
        CheckEntry e;
        e.name = "S";
        e.verdict = Verdict::fail;
        e.witness_text = std::string("error while probing: ") + ex.what();
        report.entries.push_back(std::move(e));
    }

    write_report(report, dir);
    std::cout << report.to_text();
    return report.all_passed() ? exit_ok : exit_check_failed;
}

int cmd_derivcheck(const RunConfig& cfg, const std::string& out_dir) {
    const auto dir = ensure_out_dir(out_dir);
    ConditionReport report;
    report.entries.push_back(check_S(cfg.rates, cfg.check.s_probes, cfg.seed, cfg.check.sampler,
                                     InnerOptions{cfg.integrator.inner_m}));
    write_report(report, dir);
    std::cout << report.to_text();
    return report.all_passed() ? exit_ok : exit_check_failed;
}

int cmd_equilibria(const RunConfig& cfg, const std::string& out_dir) {
    const auto dir = ensure_out_dir(out_dir);
    const double v_lo = std::max(cfg.check.y_lo, cfg.rates.params.R_minus + 1e-6);
    const auto eqs = find_equilibria(cfg.rates, v_lo, cfg.check.y_hi, 256,
                                     InnerOptions{cfg.integrator.inner_m});
    nlohmann::json out = nlohmann::json::array();
    std::cout << "w_bar            v_bar            type        residual\n";
    for (const auto& e : eqs) {
        char line[128];
        std::snprintf(line, sizeof(line), "%-16.10g %-16.10g %-11s %.3e", e.w_bar, e.v_bar,
                      e.trivial ? "trivial" : "nontrivial", e.residual);
        std::cout << line << "\n";
        out.push_back({{"w_bar", e.w_bar},
                       {"v_bar", e.v_bar},
                       {"type", e.trivial ? "trivial" : "nontrivial"},
                       {"residual", e.residual}});
    }
    std::ofstream js(dir / "equilibria.json");
    js << out.dump(2) << "\n";
    return exit_ok;
}

} // namespace stemdde
