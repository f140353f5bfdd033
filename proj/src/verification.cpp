#include "stemdde/verification.hpp"

#include "stemdde/errors.hpp"
#include "stemdde/maturation.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace stemdde {

using nlohmann::json;

const char* to_string(Verdict v) {
    switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    case Verdict::statistical_pass: return "statistical-pass";
    }
    return "unknown";
}

namespace {
Verdict verdict_from_string(const std::string& s) {
    if (s == "pass") return Verdict::pass;
    if (s == "fail") return Verdict::fail;
    if (s == "statistical-pass") return Verdict::statistical_pass;
    throw ConfigError("unknown verdict: " + s);
}
} // namespace

bool ConditionReport::all_passed() const {
    for (const auto& e : entries)
        if (e.verdict == Verdict::fail) return false;
    return true;
}

std::string ConditionReport::to_text() const {
    std::ostringstream os;
    for (const auto& e : entries) {
        os << "[" << to_string(e.verdict) << "] " << e.name;
        if (e.samples_used > 0) os << " (samples: " << e.samples_used << ")";
        os << "\n";
        if (!e.witness_text.empty()) os << "    " << e.witness_text << "\n";
        for (const auto& [k, v] : e.witness) os << "    " << k << " = " << v << "\n";
    }
    return os.str();
}

std::string ConditionReport::to_json_string() const {
    json checks = json::array();
    for (const auto& e : entries) {
        json w(e.witness);
        checks.push_back({{"name", e.name},
                          {"verdict", to_string(e.verdict)},
                          {"witness_text", e.witness_text},
                          {"witness", std::move(w)},
                          {"samples_used", e.samples_used}});
    }
    return json{{"checks", checks}}.dump(2);
}

ConditionReport ConditionReport::from_json_string(const std::string& s) {
    ConditionReport rep;
    const json j = json::parse(s);
    for (const auto& c : j.at("checks")) {
        CheckEntry e;
        e.name = c.at("name").get<std::string>();
        e.verdict = verdict_from_string(c.at("verdict").get<std::string>());
        e.witness_text = c.at("witness_text").get<std::string>();
        for (const auto& [k, v] : c.at("witness").items()) e.witness[k] = v.get<double>();
        e.samples_used = c.at("samples_used").get<long>();
        rep.entries.push_back(std::move(e));
    }
    return rep;
}

CheckEntry check_G(const RateSet& rates, double y_lo, double y_hi, int n) {
    if (!(y_lo > rates.params.R_minus))
        throw std::invalid_argument("check_G: y box must lie inside I");
    if (n < 10) throw std::invalid_argument("check_G: need n >= 10 grid points per axis");
    const RateParams& p = rates.params;
    const double x_lo = p.x2 - p.b, x_hi = p.x2 + p.b;
    const BoxBounds bb = rates.g.bounds_on_box(x_lo, x_hi, y_lo, y_hi, n);

    CheckEntry e;
    e.name = "G";
    e.samples_used = bb.exact ? 0 : static_cast<long>(n) * n;
    e.witness["inf_g"] = bb.inf;
    e.witness["sup_g"] = bb.sup;
    e.witness["sup_abs_d1g"] = bb.sup_abs_d1;
    e.witness["slope_cap"] = p.K / p.b;
    e.witness["window"] = p.x2 - p.x1;
    e.witness["window_cap"] = (p.b / p.K) * p.eps;

    std::ostringstream fails;
    bool ok = true;
    if (!(bb.inf >= p.eps)) {
        ok = false;
        fails << "G3-lower: inf g = " << bb.inf << " < eps = " << p.eps << " at (x, y) = ("
              << bb.arg_inf[0] << ", " << bb.arg_inf[1] << "); ";
        e.witness["g3_lower_x"] = bb.arg_inf[0];
        e.witness["g3_lower_y"] = bb.arg_inf[1];
        e.witness["g3_lower_value"] = bb.inf;
    }
    if (!(bb.sup <= p.K)) {
        ok = false;
        fails << "G3-upper: sup g = " << bb.sup << " > K = " << p.K << " at (x, y) = ("
              << bb.arg_sup[0] << ", " << bb.arg_sup[1] << "); ";
        e.witness["g3_upper_x"] = bb.arg_sup[0];
        e.witness["g3_upper_y"] = bb.arg_sup[1];
        e.witness["g3_upper_value"] = bb.sup;
    }
    if (!(bb.sup_abs_d1 < p.K / p.b)) {
        ok = false;
        fails << "G2: sup |d1 g| = " << bb.sup_abs_d1 << " >= K/b = " << p.K / p.b
              << " at (x, y) = (" << bb.arg_d1[0] << ", " << bb.arg_d1[1] << "); ";
        e.witness["g2_x"] = bb.arg_d1[0];
        e.witness["g2_y"] = bb.arg_d1[1];
        e.witness["g2_value"] = bb.sup_abs_d1;
    } else {
        e.witness["g2_margin"] = p.K / p.b - bb.sup_abs_d1;
    }
    const double window = p.x2 - p.x1;
    const double cap = (p.b / p.K) * p.eps;
    if (!(window > 0.0 && window < cap)) {
        ok = false;
        fails << "G3-window: x2 - x1 = " << window << " outside (0, " << cap << "); ";
    }

    if (ok) {
        e.verdict = bb.exact ? Verdict::pass : Verdict::statistical_pass;
        std::ostringstream os;
        os << "eps <= g <= K, |d1 g| < K/b and the x2-x1 window hold on the "
           << (bb.exact ? "exact family bounds" : "sampled grid");
        e.witness_text = os.str();
    } else {
        e.verdict = Verdict::fail;
        e.witness_text = fails.str();
    }
    return e;
}

namespace {

double sup_norm_of_difference(const HistorySegment& a, const HistorySegment& b) {
    // Same sampler grid: the difference is again a Hermite segment.
    const auto& da = a.data();
    const auto& db = b.data();
    std::vector<double> knots(da.knots());
    std::vector<std::array<double, 2>> vals(knots.size()), ders(knots.size());
    for (std::size_t i = 0; i < knots.size(); ++i) {
        vals[i] = {da.value_at_knot(i)[0] - db.value_at_knot(i)[0], 0.0};
        ders[i] = {da.deriv_at_knot(i)[0] - db.deriv_at_knot(i)[0], 0.0};
    }
    return PiecewiseHermite(1, std::move(knots), std::move(vals), std::move(ders)).sup_norm();
}

struct LbRun {
    double max_q = 0.0;
    double median_q = 0.0;
    long rejected = 0;
};

LbRun lb_quotients(const std::string& functional, const RateSet& rates, const SamplerSpec& spec,
                   int N, std::uint64_t seed, InnerOptions inner) {
    SegmentSampler sampler(spec, rates.params.horizon(), rates.params.R_minus, seed);
    auto value_of = [&](const HistorySegment& psi) {
        const auto sol = solve_maturation(rates, psi, inner);
        return functional == "tau" ? sol.tau : sol.F;
    };
    std::vector<double> quotients;
    quotients.reserve(static_cast<std::size_t>(N));
    for (int i = 0; i < N; ++i) {
        const auto psi1 = sampler.draw();
        const auto psi2 = sampler.draw();
        const double dist = sup_norm_of_difference(psi1, psi2);
        if (dist < 1e-12) continue;
        quotients.push_back(std::abs(value_of(psi1) - value_of(psi2)) / dist);
    }
    LbRun run;
    run.rejected = sampler.rejected();
    if (quotients.empty()) return run;
    std::sort(quotients.begin(), quotients.end());
    run.max_q = quotients.back();
    run.median_q = quotients[quotients.size() / 2];
    return run;
}

} // namespace

CheckEntry estimate_Lb(const std::string& functional, const RateSet& rates,
                       const SamplerSpec& spec, int N, std::uint64_t seed, InnerOptions inner) {
    if (functional != "tau" && functional != "F")
        throw std::invalid_argument("estimate_Lb: functional must be \"tau\" or \"F\"");
    if (N < 100) throw std::invalid_argument("estimate_Lb: need N >= 100 pairs");

    // The 2N run extends the N run's stream, so stability asks whether
    // doubling the sample adds mass above the current max.
    const LbRun run1 = lb_quotients(functional, rates, spec, N, seed, inner);
    const LbRun run2 = lb_quotients(functional, rates, spec, 2 * N, seed, inner);

    CheckEntry e;
    e.name = "Lb-" + functional;
    e.samples_used = 3L * N;
    e.witness["max_quotient_N"] = run1.max_q;
    e.witness["max_quotient_2N"] = run2.max_q;
    e.witness["median_quotient"] = run2.median_q;
    e.witness["rejected_draws"] = static_cast<double>(run1.rejected + run2.rejected);

    const double scale = std::max({run1.max_q, run2.max_q, 1e-300});
    const double rel_change = std::abs(run2.max_q - run1.max_q) / scale;
    e.witness["rel_change"] = rel_change;
    if (run2.max_q == 0.0 && run1.max_q == 0.0) {
        e.verdict = Verdict::pass;
        e.witness_text = "all difference quotients vanish (functional constant on the family)";
    } else if (rel_change <= 0.20) {
        e.verdict = Verdict::statistical_pass;
        std::ostringstream os;
        os << "sup-norm difference quotient max stable within 20% under N -> 2N (N = " << N
           << "); sample max is not the (Lb) constant itself";
        e.witness_text = os.str();
    } else {
        e.verdict = Verdict::fail;
        std::ostringstream os;
        os << "quotient max moved by " << rel_change * 100.0 << "% between N = " << N
           << " and 2N; no stable Lipschitz bound observed";
        e.witness_text = os.str();
    }
    return e;
}

namespace {

// Piecewise-linear direction with a kink at -h/2; probes the extension of
// the derivative to merely continuous arguments.
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

struct FdProbe {
    double best_rel = 0.0;
    double analytic = 0.0;
    double fd = 0.0;
    bool ok = false;
};

FdProbe fd_compare(double analytic, const std::function<double(double)>& value_at_delta,
                   double chi_norm) {
    FdProbe probe;
    probe.analytic = analytic;
    probe.best_rel = std::numeric_limits<double>::infinity();
    const double scale = std::max(chi_norm, 1e-12);
    for (double d0 : {1e-4, 1e-5, 1e-6}) {
        const double delta = d0 / scale;
        const double fd = value_at_delta(delta);
        const double denom = std::max(std::abs(analytic), 1e-12);
        const double rel = std::abs(fd - analytic) / denom;
        if (rel < probe.best_rel) {
            probe.best_rel = rel;
            probe.fd = fd;
        }
    }
    // Vanishing derivative: accept on absolute agreement.
    if (std::abs(analytic) < 1e-12 && std::abs(probe.fd) < 1e-9) probe.ok = true;
    if (probe.best_rel <= 1e-4) probe.ok = true;
    return probe;
}

} // namespace

CheckEntry check_S(const RateSet& rates, int n_probes, std::uint64_t seed,
                   const SamplerSpec& spec, InnerOptions inner) {
    if (n_probes < 10) throw std::invalid_argument("check_S: need n_probes >= 10");
    const double h = rates.params.horizon();
    SegmentSampler sampler(spec, h, rates.params.R_minus, seed);

    CheckEntry e;
    e.name = "S";
    e.samples_used = n_probes;
    double worst_rel = 0.0;
    std::string failure;

    for (int probe = 0; probe < n_probes && failure.empty(); ++probe) {
        const HistorySegment psi = sampler.draw();
        const bool smooth = (probe % 2 == 0);
        HistorySegment chi_seg = sampler.draw_direction_smooth();
        ScalarFn chi = smooth ? as_fn(chi_seg)
                              : kinked_direction(h, seed + 7919ULL * (probe + 1));
        double chi_norm = 0.0;
        if (smooth) {
            chi_norm = chi_seg.norms().sup_norm;
        } else {
            for (int i = 0; i <= 64; ++i) chi_norm = std::max(chi_norm, std::abs(chi(-h * i / 64.0)));
        }
        if (chi_norm < 1e-9) continue;

        const auto sol = solve_maturation(rates, psi, inner);
        const auto dd = directional_derivatives(rates, sol, as_fn(psi), chi);
        const double t_star = 0.25 * h + 0.5 * h * (probe % 5) / 5.0;

        auto psi_shift = [&](double delta) {
            return [&psi, &chi, delta](double th) { return psi.evaluate1(th) + delta * chi(th); };
        };
        auto fd_y = fd_compare(dd.dy_path.eval(0, t_star), [&](double delta) {
            const auto p = solve_maturation(rates, psi_shift(delta), inner);
            const auto m = solve_maturation(rates, psi_shift(-delta), inner);
            return (p.y_path.eval(0, t_star) - m.y_path.eval(0, t_star)) / (2.0 * delta);
        }, chi_norm);
        auto fd_tau = fd_compare(dd.d_tau, [&](double delta) {
            const auto p = solve_maturation(rates, psi_shift(delta), inner);
            const auto m = solve_maturation(rates, psi_shift(-delta), inner);
            return (p.tau - m.tau) / (2.0 * delta);
        }, chi_norm);
        auto fd_F = fd_compare(dd.d_F, [&](double delta) {
            const auto p = solve_maturation(rates, psi_shift(delta), inner);
            const auto m = solve_maturation(rates, psi_shift(-delta), inner);
            return (p.F - m.F) / (2.0 * delta);
        }, chi_norm);

        for (const auto* p : {&fd_y, &fd_tau, &fd_F}) {
            if (std::isfinite(p->best_rel)) worst_rel = std::max(worst_rel, std::min(p->best_rel, 1.0));
        }
        if (!fd_y.ok || !fd_tau.ok || !fd_F.ok) {
            std::ostringstream os;
            os << "probe " << probe << (smooth ? " (smooth chi)" : " (kinked chi)")
               << ": FD mismatch: Dy rel " << fd_y.best_rel << ", Dtau rel " << fd_tau.best_rel
               << ", DF rel " << fd_F.best_rel;
            failure = os.str();
            e.witness["probe"] = probe;
            e.witness["Dy_analytic"] = fd_y.analytic;
            e.witness["Dy_fd"] = fd_y.fd;
            e.witness["Dtau_analytic"] = fd_tau.analytic;
            e.witness["Dtau_fd"] = fd_tau.fd;
            e.witness["DF_analytic"] = fd_F.analytic;
            e.witness["DF_fd"] = fd_F.fd;
            break;
        }

        // Continuity of (psi, chi) -> D(psi)chi: O(delta) response across
        // two decades of joint perturbations.
        if (probe < 4) {
            HistorySegment rho = sampler.draw_direction_smooth();
            const ScalarFn rho_fn = as_fn(rho);
            double ratios[3];
            int idx = 0;
            for (double delta : {1e-2, 1e-3, 1e-4}) {
                auto psi_p = [&](double th) { return psi.evaluate1(th) + delta * rho_fn(th); };
                auto chi_p = [&](double th) { return chi(th) + delta * rho_fn(th); };
                const auto sol_p = solve_maturation(rates, psi_p, inner);
                const auto dd_p = directional_derivatives(rates, sol_p, psi_p, chi_p);
                ratios[idx++] = std::abs(dd_p.d_tau - dd.d_tau) / delta;
            }
            const double rmax = std::max({ratios[0], ratios[1], ratios[2]});
            const double rmin = std::min({ratios[0], ratios[1], ratios[2]});
            e.witness["continuity_ratio_spread"] =
                std::max(e.witness["continuity_ratio_spread"], rmax / std::max(rmin, 1e-9));
            if (rmax > 1e3 * std::max(1.0, rmin)) {
                std::ostringstream os;
                os << "probe " << probe << ": D_e tau response not O(delta): ratios " << ratios[0]
                   << ", " << ratios[1] << ", " << ratios[2];
                failure = os.str();
                break;
            }
        }
    }

    e.witness["worst_rel_error"] = worst_rel;
    if (failure.empty()) {
        e.verdict = Verdict::statistical_pass;
        std::ostringstream os;
        os << "Dy, Dtau, DF match central differences on " << n_probes
           << " random probes (incl. kinked directions); worst rel error " << worst_rel;
        e.witness_text = os.str();
    } else {
        e.verdict = Verdict::fail;
        e.witness_text = failure;
    }
    return e;
}

CheckEntry check_B(const Trajectory& traj) {
    const auto& recs = traj.records();
    if (recs.size() < 3) throw std::invalid_argument("check_B: trajectory too short");

    CheckEntry e;
    e.name = "B";
    e.samples_used = static_cast<long>(recs.size());

    // a(x_s) = (q(v(s)), -mu); both components are recorded per step.
    double K1 = 0.0;
    for (const auto& r : recs) K1 = std::max(K1, std::hypot(r.a1, r.a2));

    std::vector<std::pair<double, double>> pts; // (s, log |b2|)
    for (const auto& r : recs)
        if (std::abs(r.b2) > 1e-300) pts.emplace_back(r.t, std::log(std::abs(r.b2)));

    double C = 0.0, K2 = 0.0;
    if (pts.empty()) {
        e.witness_text = "forcing component vanishes along the run; trivial envelope";
        e.verdict = Verdict::pass;
    } else {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (auto [x, y] : pts) {
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        const double nn = static_cast<double>(pts.size());
        const double det = nn * sxx - sx * sx;
        K2 = det != 0.0 ? (nn * sxy - sx * sy) / det : 0.0;
        double logC = -std::numeric_limits<double>::infinity();
        for (auto [x, y] : pts) logC = std::max(logC, y - K2 * x);
        C = std::exp(logC);
        bool dominated = true;
        for (auto [x, y] : pts)
            if (y > logC + K2 * x + 1e-9) dominated = false;
        e.verdict = dominated ? Verdict::statistical_pass : Verdict::fail;
        std::ostringstream os;
        os << "|a| <= " << K1 << " and |b2| <= " << C << " * exp(" << K2
           << " s) dominate the recorded run";
        e.witness_text = os.str();
    }
    e.witness["K1"] = K1;
    e.witness["C"] = C;
    e.witness["K2"] = K2;
    return e;
}

} // namespace stemdde
