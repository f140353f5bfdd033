// Acceptance suite: every release criterion with its pinned tolerance, one
// pass/fail line each. Exit code = number of failed criteria.

#include "stemdde/commands.hpp"
#include "stemdde/config.hpp"
#include "stemdde/maturation.hpp"
#include "stemdde/semiflow.hpp"
#include "stemdde/verification.hpp"

#include "oracle_fixed_delay.hpp"
#include "test_support.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace stemdde;
using namespace testsupport;

namespace {

int g_failures = 0;

void report(int id, const std::string& title, bool ok, const std::string& detail) {
    std::printf("[%s] C%02d %-34s %s\n", ok ? "PASS" : "FAIL", id, title.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!ok) ++g_failures;
}

double now_ms() {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

double lsq_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = double(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

ScalarFn kinked_direction(double h, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> val(-1.0, 1.0);
    const double a = val(rng), b = val(rng), c = val(rng);
    return [h, a, b, c](double theta) {
        const double mid = -0.5 * h;
        if (theta <= mid) return a + (b - a) * ((theta + h) / (h / 2.0));
        return b + (c - b) * ((theta - mid) / (h / 2.0));
    };
}

HistorySegment smooth_phi0(double h, double w0, double v0) {
    return HistorySegment::from_function2(
        h, 48,
        [=](double t) {
            return std::array<double, 2>{w0 + 0.1 * std::sin(1.3 * t),
                                         v0 + 0.15 * std::cos(0.9 * t)};
        },
        [=](double t) {
            return std::array<double, 2>{0.13 * std::cos(1.3 * t), -0.135 * std::sin(0.9 * t)};
        });
}

// --- C1: closed-form delay, and runtime budget -----------------------------
void criterion_1() {
    bool ok = true;
    std::ostringstream detail;
    double worst = 0.0;
    for (double gamma : {1.0, 0.8}) {
        const auto rc = const_rates(gamma, 0.0);
        const double tau_exact = (rc.params.x2 - rc.params.x1) / gamma;
        SegmentSampler sampler({}, rc.params.horizon(), rc.params.R_minus, 11);
        for (int i = 0; i < 10; ++i) {
            const auto psi = sampler.draw();
            const double tau = solve_maturation(rc, psi, {256}).tau;
            worst = std::max(worst, std::abs(tau - tau_exact) / tau_exact);
        }
    }
    ok = worst <= 1e-10;

    const auto rc = const_rates(1.0, 0.0);
    const auto psi = HistorySegment::constant(1, rc.params.horizon(), {0.5, 0.0});
    const double t0 = now_ms();
    const int reps = 100;
    double sink = 0.0;
    for (int i = 0; i < reps; ++i) sink += solve_maturation(rc, psi, {256}).tau;
    const double per_call = (now_ms() - t0) / reps;
    if (!(per_call < 10.0) || sink <= 0.0) ok = false;
    detail << "worst rel err " << worst << ", " << per_call << " ms/call at m=256";
    report(1, "closed-form delay", ok, detail.str());
}

// --- C2: closed-form growth factor ------------------------------------------
void criterion_2() {
    double worst = 0.0;
    for (auto [gamma, delta] : {std::pair{1.0, 0.2}, std::pair{0.8, 0.3}, std::pair{0.9, -0.15}}) {
        const auto rc = const_rates(gamma, delta);
        const double expected = std::exp(delta * (rc.params.x2 - rc.params.x1) / gamma);
        SegmentSampler sampler({}, rc.params.horizon(), rc.params.R_minus, 23);
        for (int i = 0; i < 5; ++i) {
            const double F = solve_maturation(rc, sampler.draw(), {256}).F;
            worst = std::max(worst, std::abs(F - expected) / expected);
        }
    }
    std::ostringstream detail;
    detail << "worst rel err " << worst;
    report(2, "closed-form growth factor", worst <= 1e-10, detail.str());
}

// --- C3: derivative formulas vs finite differences --------------------------
void criterion_3() {
    const auto rs = demo_rates();
    const double h = rs.params.horizon();
    SegmentSampler sampler({}, h, rs.params.R_minus, 314);
    int failures = 0;
    double worst = 0.0;
    const int probes = 50;
    for (int p = 0; p < probes; ++p) {
        const auto psi = sampler.draw();
        const bool smooth = (p % 2 == 0);
        const auto chi_seg = sampler.draw_direction_smooth();
        const ScalarFn chi =
            smooth ? as_fn(chi_seg) : kinked_direction(h, 1000 + 13 * p);
        double chi_norm = 0.0;
        for (int i = 0; i <= 128; ++i)
            chi_norm = std::max(chi_norm, std::abs(chi(-h * i / 128.0)));
        if (chi_norm < 1e-9) continue;

        const auto sol = solve_maturation(rs, psi);
        const auto dd = directional_derivatives(rs, sol, as_fn(psi), chi);
        const double t_star = (0.3 + 0.4 * (p % 3) / 2.0) * h;

        auto fd_best = [&](auto value_of, double analytic) {
            double best = 1e300;
            for (double d0 : {1e-4, 1e-5, 1e-6}) {
                const double delta = d0 / chi_norm;
                auto plus = [&](double th) { return psi.evaluate1(th) + delta * chi(th); };
                auto minus = [&](double th) { return psi.evaluate1(th) - delta * chi(th); };
                const double fd =
                    (value_of(solve_maturation(rs, plus)) - value_of(solve_maturation(rs, minus))) /
                    (2.0 * delta);
                best = std::min(best,
                                std::abs(fd - analytic) / std::max(std::abs(analytic), 1e-12));
            }
            return best;
        };

        const double ry = fd_best(
            [&](const MaturationResult& r) { return r.y_path.eval(0, t_star); },
            dd.dy_path.eval(0, t_star));
        const double rt = fd_best([&](const MaturationResult& r) { return r.tau; }, dd.d_tau);
        const double rf = fd_best([&](const MaturationResult& r) { return r.F; }, dd.d_F);
        for (double r : {ry, rt, rf}) {
            worst = std::max(worst, r);
            if (!(r <= 1e-4)) ++failures;
        }
    }
    std::ostringstream detail;
    detail << probes << " probes per formula (smooth + kinked chi), worst rel err " << worst;
    report(3, "derivative formulas vs FD", failures == 0, detail.str());
}

// --- C4: threshold identity --------------------------------------------------
void criterion_4() {
    const auto rs = demo_rates();
    const double h = rs.params.horizon();
    SegmentSampler sampler({}, h, rs.params.R_minus, 2718);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const auto psi = sampler.draw();
        const auto sol = solve_maturation(rs, psi);
        std::size_t hint = 0;
        const double integral = simpson_on_grid(
            [&](double s) { return rs.g_eval(sol.y_path.eval(0, s, hint), psi.evaluate1(-s)); },
            sol.tau, h / sol.m);
        worst = std::max(worst, std::abs(integral - (rs.params.x2 - rs.params.x1)));
    }
    std::ostringstream detail;
    detail << "100 random histories, worst |integral - (x2-x1)| = " << worst;
    report(4, "threshold integral identity", worst <= 1e-8, detail.str());
}

struct ReductionSetup {
    RateSet rc;
    HistorySegment phi0;
    oracle::FixedDelayOracle orc;
    double tau_bar;
};

ReductionSetup make_reduction() {
    const double gamma = 1.0, delta = 0.25, beta0 = 0.8, q0 = -0.15, mu = 0.12;
    auto rc = const_rates(gamma, delta, beta0, q0, mu);
    auto phi0 = make_compatible(rc, smooth_phi0(rc.params.horizon(), 0.6, 0.8));
    oracle::FixedDelayOracle orc;
    orc.tau = (rc.params.x2 - rc.params.x1) / gamma;
    orc.Fbar = std::exp(delta * orc.tau);
    orc.mu = mu;
    orc.q = [q0](double) { return q0; };
    orc.beta = [beta0](double) { return beta0; };
    orc.w_hist = [phi0](double t) { return phi0.evaluate(t)[0]; };
    orc.v_hist = [phi0](double t) { return phi0.evaluate(t)[1]; };
    return {std::move(rc), std::move(phi0), std::move(orc), orc.tau};
}

// --- C5: fixed-delay reduction oracle ----------------------------------------
void criterion_5() {
    auto setup = make_reduction();
    const double T = 10.0 * setup.tau_bar;

    const double t0 = now_ms();
    IntegratorOptions opts;
    opts.dt = 0.025;
    const auto result = integrate(setup.rc, setup.phi0, T, opts);
    const double t_sim = (now_ms() - t0) / 1000.0;

    const double t1 = now_ms();
    setup.orc.run(T, 0.002);
    const double t_orc = (now_ms() - t1) / 1000.0;

    double sup_err = 0.0;
    for (int i = 0; i <= 500; ++i) {
        const double t = T * i / 500.0;
        const auto xv = result.trajectory.value(t);
        sup_err = std::max({sup_err, std::abs(xv[0] - setup.orc.w_at(t)),
                            std::abs(xv[1] - setup.orc.v_at(t))});
    }
    const bool ok = result.termination.status == TerminationStatus::reached_T &&
                    sup_err <= 1e-7 && t_sim < 5.0 && t_orc < 5.0;
    std::ostringstream detail;
    detail << "sup err " << sup_err << " over [0, 10 tau]; runtimes " << t_sim << " s / " << t_orc
           << " s";
    report(5, "fixed-delay reduction oracle", ok, detail.str());
}

// --- C6: outer convergence order ----------------------------------------------
void criterion_6() {
    auto setup = make_reduction();
    const double T = 10.0 * setup.tau_bar;
    setup.orc.run(T, 0.002);
    std::vector<double> log_dt, log_err;
    for (double dt : {0.2, 0.1, 0.05, 0.025}) {
        IntegratorOptions opts;
        opts.dt = dt;
        const auto res = integrate(setup.rc, setup.phi0, T, opts);
        double sup = 0.0;
        for (int i = 0; i <= 400; ++i) {
            const double t = T * i / 400.0;
            const auto xv = res.trajectory.value(t);
            sup = std::max({sup, std::abs(xv[0] - setup.orc.w_at(t)),
                            std::abs(xv[1] - setup.orc.v_at(t))});
        }
        log_dt.push_back(std::log(dt));
        log_err.push_back(std::log(sup));
    }
    const double slope = lsq_slope(log_dt, log_err);
    std::ostringstream detail;
    detail << "global error slope " << slope << " over dt = 0.2 .. 0.025";
    report(6, "outer convergence order", std::abs(slope - 4.0) <= 0.4, detail.str());
}

// --- C7: nonnegativity ----------------------------------------------------------
void criterion_7() {
    const auto rs = demo_rates();
    const double T = 20.0 * rs.params.horizon();
    SegmentSampler sampler({0.3, 1.2, 0.4, 12}, rs.params.horizon(), rs.params.R_minus, 555);
    double min_val = 1e300;
    int completed = 0;
    IntegratorOptions opts;
    opts.dt = 0.1;
    opts.inner_m = 128;
    for (int run = 0; run < 100; ++run) {
        const auto phi0 = make_compatible(rs, sampler.draw_pair(), {opts.inner_m});
        const auto result = integrate(rs, phi0, T, opts);
        if (result.termination.status != TerminationStatus::reached_T) continue;
        ++completed;
        for (const auto& rec : result.trajectory.records())
            min_val = std::min({min_val, rec.w, rec.v});
    }
    const bool ok = completed == 100 && min_val >= -1e-12;
    std::ostringstream detail;
    detail << completed << "/100 runs reached T=20h; min component " << min_val;
    report(7, "nonnegativity of the flow", ok, detail.str());
}

// --- C8: variation-of-constants residual ----------------------------------------
void criterion_8() {
    const auto cfg = RunConfig::load_file(std::string(STEMDDE_CONFIG_DIR) + "/demo.json");
    const auto phi0 = make_compatible(cfg.rates, cfg.build_initial_history());
    std::vector<double> samples;
    for (int i = 1; i <= 20; ++i) samples.push_back(cfg.T * i / 20.0);

    std::vector<double> log_dt, log_res;
    double res_default = 0.0;
    for (double dt : {0.16, 0.08, 0.04, 0.02}) {
        IntegratorOptions opts = cfg.integrator;
        opts.dt = dt;
        const auto run = integrate(cfg.rates, phi0, cfg.T, opts);
        if (run.termination.status != TerminationStatus::reached_T) {
            report(8, "variation-of-constants residual", false, "run did not reach T");
            return;
        }
        const auto res = voc_residual(cfg.rates, run.trajectory, samples);
        const double worst = std::max(res[0], res[1]);
        log_dt.push_back(std::log(dt));
        log_res.push_back(std::log(worst));
        if (dt == 0.02) res_default = worst;
    }
    const double slope = lsq_slope(log_dt, log_res);
    const bool ok = res_default <= 1e-6 && slope >= 3.5;
    std::ostringstream detail;
    detail << "residual " << res_default << " at dt=0.02, refinement order " << slope;
    report(8, "variation-of-constants residual", ok, detail.str());
}

// --- C9: semiflow restart consistency ---------------------------------------------
void criterion_9() {
    const auto rs = demo_rates();
    const double h = rs.params.horizon();
    SegmentSampler sampler({0.4, 1.4, 0.4, 12}, h, rs.params.R_minus, 808);
    double worst = 0.0;
    int completed = 0;
    const double T = 3.0, s = 1.5;
    for (int run = 0; run < 20; ++run) {
        const auto phi0 = make_compatible(rs, sampler.draw_pair());
        const auto direct = integrate(rs, phi0, T);
        const auto first = integrate(rs, phi0, s);
        const auto second = integrate(rs, first.trajectory.segment_at(s), T - s);
        if (direct.termination.status != TerminationStatus::reached_T ||
            second.termination.status != TerminationStatus::reached_T)
            continue;
        ++completed;
        const auto a = direct.trajectory.segment_at(T);
        const auto b = second.trajectory.segment_at(T - s);
        double dist = 0.0;
        for (int i = 0; i <= 600; ++i) {
            const double th = -h + h * i / 600.0;
            const auto va = a.evaluate(th), vb = b.evaluate(th);
            const auto da = a.derivative(th), db = b.derivative(th);
            for (int c = 0; c < 2; ++c)
                dist = std::max({dist, std::abs(va[c] - vb[c]), std::abs(da[c] - db[c])});
        }
        worst = std::max(worst, dist);
    }
    const bool ok = completed == 20 && worst <= 1e-7;
    std::ostringstream detail;
    detail << completed << "/20 runs, worst restart mismatch " << worst << " (C1 sup)";
    report(9, "semiflow restart consistency", ok, detail.str());
}

// --- C10: hypothesis checker -------------------------------------------------------
void criterion_10() {
    const auto cfg = RunConfig::load_file(std::string(STEMDDE_CONFIG_DIR) + "/demo.json");
    bool ok = true;
    std::ostringstream detail;

    ConditionReport demo_report;
    demo_report.entries.push_back(
        check_G(cfg.rates, cfg.check.y_lo, cfg.check.y_hi, cfg.check.n_grid));
    demo_report.entries.push_back(
        estimate_Lb("tau", cfg.rates, cfg.check.sampler, cfg.check.lb_pairs, cfg.seed));
    demo_report.entries.push_back(
        estimate_Lb("F", cfg.rates, cfg.check.sampler, cfg.check.lb_pairs, cfg.seed));
    demo_report.entries.push_back(check_S(cfg.rates, cfg.check.s_probes, cfg.seed));
    if (!demo_report.all_passed()) {
        ok = false;
        detail << "demo config did not pass; ";
    }

    // (a) speed floor violation
    {
        auto bad = cfg.rates;
        bad.params.eps = 0.95;
        bad.params.x1 = 0.5;
        const auto e = check_G(bad, cfg.check.y_lo, cfg.check.y_hi, cfg.check.n_grid);
        const bool witness_ok = e.verdict == Verdict::fail && e.witness.count("g3_lower_y") &&
                                bad.g.eval(e.witness.at("g3_lower_x"),
                                           e.witness.at("g3_lower_y")) < bad.params.eps;
        if (!witness_ok) {
            ok = false;
            detail << "G3-lower violation not caught; ";
        }
    }
    // (b) window violation
    {
        auto bad = cfg.rates;
        bad.params.x1 = -0.6; // window 1.6 > 1.05
        const auto e = check_G(bad, cfg.check.y_lo, cfg.check.y_hi, cfg.check.n_grid);
        const bool witness_ok = e.verdict == Verdict::fail &&
                                e.witness_text.find("G3-window") != std::string::npos &&
                                e.witness.at("window") > e.witness.at("window_cap");
        if (!witness_ok) {
            ok = false;
            detail << "window violation not caught; ";
        }
    }
    // (c) strict slope bound violation
    {
        RateSet bad;
        bad.params = RateParams{};
        bad.params.eps = 0.05;
        bad.params.x1 = 0.95;
        bad.g = PlanarRate::make_separable(ScalarRate::make_exp_decay(0.66, 0.8),
                                           ScalarRate::make_constant(1.0));
        bad.d = PlanarRate::make_constant(0.0);
        bad.beta = ScalarRate::make_constant(1.0);
        bad.q = ScalarRate::make_constant(-0.1);
        bad.validate();
        const auto e = check_G(bad, cfg.check.y_lo, cfg.check.y_hi, cfg.check.n_grid);
        const bool witness_ok =
            e.verdict == Verdict::fail && e.witness.count("g2_x") &&
            std::abs(bad.g.d1(e.witness.at("g2_x"), e.witness.at("g2_y"))) >=
                bad.params.K / bad.params.b;
        if (!witness_ok) {
            ok = false;
            detail << "G2 violation not caught; ";
        }
    }
    if (ok) detail << "demo passes; all three constructed violations fail with valid witnesses";
    report(10, "hypothesis checker", ok, detail.str());
}

// --- C11: (Lb) statistical stability -------------------------------------------------
void criterion_11() {
    const auto rs = demo_rates();
    bool ok = true;
    std::ostringstream detail;
    for (const char* fn : {"tau", "F"}) {
        const auto e = estimate_Lb(fn, rs, SamplerSpec{}, 500, 42);
        const double rel = e.witness.at("rel_change");
        detail << fn << ": max " << e.witness.at("max_quotient_2N") << " (drift "
               << rel * 100.0 << "%) ";
        if (e.verdict == Verdict::fail || rel > 0.20) ok = false;
    }
    report(11, "(Lb) quotient stability", ok, detail.str());
}

// --- C12: blow-up detection ------------------------------------------------------------
void criterion_12() {
    const auto cfg = RunConfig::load_file(std::string(STEMDDE_CONFIG_DIR) + "/blowup.json");
    const auto phi0 = make_compatible(cfg.rates, cfg.build_initial_history());
    const auto result = integrate(cfg.rates, phi0, cfg.T, cfg.integrator);
    bool ok = result.termination.status == TerminationStatus::norm_blowup;
    const auto& recs = result.trajectory.records();
    if (recs.size() < 12) ok = false;
    if (ok)
        for (std::size_t i = recs.size() - 10; i + 1 < recs.size(); ++i)
            if (!(recs[i + 1].c1norm > recs[i].c1norm)) ok = false;
    std::ostringstream detail;
    detail << "status " << to_string(result.termination.status) << " at t=" << result.termination.t_stop
           << ", tail of c1 norms monotone increasing";
    report(12, "blow-up detection", ok, detail.str());
}

} // namespace

int main() {
    const double t0 = now_ms();
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    criterion_10();
    criterion_11();
    criterion_12();
    std::printf("%d/12 criteria passed (%.1f s)\n", 12 - g_failures, (now_ms() - t0) / 1000.0);
    return g_failures;
}
