#include "stemdde/semiflow.hpp"

#include "stemdde/errors.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

namespace stemdde {

namespace {

void format_double(std::ostream& os, double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    os << buf;
}

double euclid(std::array<double, 2> v) { return std::hypot(v[0], v[1]); }

// Dense history together with one provisional extension piece; the view the
// stage functionals read while a step is still in flight.
struct ExtendedView {
    const PiecewiseHermite* base = nullptr;
    bool has_ext = false;
    double ext_t0 = 0.0, ext_t1 = 0.0;
    std::array<double, 2> ev0{}, ed0{}, ev1{}, ed1{};

    double eval(int c, double t, std::size_t& hint) const {
        if (has_ext && t > ext_t0) {
            const double dt = ext_t1 - ext_t0;
            const double s = std::min((t - ext_t0) / dt, 1.0);
            return hermite::value(ev0[c], ed0[c], ev1[c], ed1[c], dt, s);
        }
        return base->eval(c, t, hint);
    }
};

// Hereditary data of the right-hand side at absolute time s: everything
// that depends on the segment as a whole rather than on the running value.
struct Hereditary {
    double tau = 0.0, F = 1.0;
    double w_lag = 0.0, v_lag = 0.0;
};

Hereditary hereditary_at(const RateSet& rates, const ExtendedView& view, double s, int inner_m) {
    std::size_t hint_psi = 0;
    ScalarFn psi = [&](double theta) { return view.eval(1, s + theta, hint_psi); };
    const auto sol = solve_maturation(rates, psi, {inner_m});
    Hereditary hd;
    hd.tau = sol.tau;
    hd.F = sol.F;
    std::size_t hint = 0;
    hd.w_lag = view.eval(0, s - sol.tau, hint);
    hd.v_lag = view.eval(1, s - sol.tau, hint);
    return hd;
}

std::array<double, 2> f_of(const RateSet& rates, const Hereditary& hd, std::array<double, 2> Y) {
    return {rates.q_eval(Y[1]) * Y[0],
            rates.beta_eval(hd.v_lag) * hd.w_lag * hd.F - rates.params.mu * Y[1]};
}

ExtendedView base_view(const PiecewiseHermite& dense) {
    ExtendedView v;
    v.base = &dense;
    return v;
}

} // namespace

const char* to_string(TerminationStatus s) {
    switch (s) {
    case TerminationStatus::reached_T: return "reached_T";
    case TerminationStatus::domain_exit: return "domain_exit";
    case TerminationStatus::norm_blowup: return "norm_blowup";
    case TerminationStatus::inner_failure: return "inner_failure";
    }
    return "unknown";
}

std::array<double, 2> rhs(const RateSet& rates, const HistorySegment& phi, InnerOptions inner) {
    if (phi.dim() != 2) throw std::invalid_argument("rhs: phi must be a dim-2 segment");
    const auto view = base_view(phi.data());
    const auto hd = hereditary_at(rates, view, 0.0, inner.m);
    return f_of(rates, hd, phi.evaluate(0.0));
}

double manifold_residual(const RateSet& rates, const HistorySegment& phi, InnerOptions inner) {
    const auto f = rhs(rates, phi, inner);
    const auto d = phi.derivative(0.0);
    return euclid({d[0] - f[0], d[1] - f[1]});
}

HistorySegment make_compatible(const RateSet& rates, const HistorySegment& phi_raw,
                               InnerOptions inner, double h_blend, double tol, int max_passes) {
    if (phi_raw.dim() != 2) throw std::invalid_argument("make_compatible: phi must be dim 2");
    const double h = phi_raw.h();
    if (h_blend <= 0.0) h_blend = h / 8.0;
    h_blend = std::min(h_blend, 0.5 * h);

    HistorySegment phi = phi_raw;
    std::vector<double> history;
    for (int pass = 0; pass < max_passes; ++pass) {
        const auto f = rhs(rates, phi, inner);
        const auto d0 = phi.derivative(0.0);
        const std::array<double, 2> e{d0[0] - f[0], d0[1] - f[1]};
        const double res = euclid(e);
        history.push_back(res);
        if (res <= tol) return phi;

        // Cubic blend bump: B(-h_blend)=0, B(0)=1, B'=0 at both ends.
        auto bump = [&](double theta) {
            const double s = (theta + h_blend) / h_blend;
            return s * s * (3.0 - 2.0 * s);
        };
        auto bump_int = [&](double theta) { // integral of B from -h_blend to theta
            const double s = (theta + h_blend) / h_blend;
            return h_blend * (s * s * s - 0.5 * s * s * s * s);
        };

        const PiecewiseHermite& data = phi.data();
        std::vector<double> knots;
        std::vector<std::array<double, 2>> vals, ders;
        const double tol_knot = 1e-14 * std::max(1.0, h);
        bool has_blend_start = false;
        for (std::size_t i = 0; i < data.knot_count(); ++i) {
            const double k = data.knot(i);
            if (k < -h_blend - tol_knot) {
                knots.push_back(k);
                vals.push_back(data.value_at_knot(i));
                ders.push_back(data.deriv_at_knot(i));
            } else if (std::abs(k + h_blend) <= tol_knot) {
                knots.push_back(k);
                vals.push_back(data.value_at_knot(i));
                ders.push_back(data.deriv_at_knot(i));
                has_blend_start = true;
            }
        }
        if (!has_blend_start) {
            knots.push_back(-h_blend);
            vals.push_back(phi.evaluate(-h_blend));
            ders.push_back(phi.derivative(-h_blend));
        }
        // Window grid: original knots inside the window plus a uniform
        // refinement to at least 8 intervals.
        std::vector<double> wk;
        for (std::size_t i = 0; i < data.knot_count(); ++i) {
            const double k = data.knot(i);
            if (k > -h_blend + tol_knot && k < -tol_knot) wk.push_back(k);
        }
        for (int j = 1; j < 8; ++j) wk.push_back(-h_blend + h_blend * j / 8.0);
        wk.push_back(0.0);
        std::sort(wk.begin(), wk.end());
        wk.erase(std::unique(wk.begin(), wk.end(),
                             [&](double a, double b) { return std::abs(a - b) <= tol_knot; }),
                 wk.end());
        if (std::abs(wk.back()) <= tol_knot) wk.back() = 0.0;

        for (double theta : wk) {
            const auto v_old = phi.evaluate(theta);
            const auto d_old = phi.derivative(theta);
            std::array<double, 2> v_new{}, d_new{};
            for (int c = 0; c < 2; ++c) {
                d_new[c] = d_old[c] - e[c] * bump(theta);
                v_new[c] = v_old[c] - e[c] * bump_int(theta);
            }
            knots.push_back(theta);
            vals.push_back(v_new);
            ders.push_back(d_new);
        }
        phi = HistorySegment(PiecewiseHermite(2, std::move(knots), std::move(vals), std::move(ders)));
    }
    std::ostringstream os;
    os << "make_compatible: no convergence after " << max_passes << " passes; residuals:";
    for (double r : history) os << ' ' << r;
    throw CompatibilityError(os.str());
}

namespace {

struct StepOutcome {
    bool converged = false;
    std::array<double, 2> x_next{}, d_next{};
    Hereditary hd_end;
};

StepOutcome attempt_step(const RateSet& rates, const PiecewiseHermite& dense, double t,
                         std::array<double, 2> x, std::array<double, 2> k1, double dt,
                         const IntegratorOptions& opts) {
    ExtendedView view = base_view(dense);
    view.has_ext = true;
    view.ext_t0 = t;
    view.ext_t1 = t + dt;
    view.ev0 = x;
    view.ed0 = k1;
    // Predictor: Hermite extrapolation of the current state.
    view.ev1 = {x[0] + dt * k1[0], x[1] + dt * k1[1]};
    view.ed1 = k1;

    StepOutcome out;
    for (int sweep = 0; sweep < opts.max_corrector_sweeps; ++sweep) {
        const auto hd_mid = hereditary_at(rates, view, t + 0.5 * dt, opts.inner_m);
        const auto hd_end = hereditary_at(rates, view, t + dt, opts.inner_m);
        const std::array<double, 2> Y2{x[0] + 0.5 * dt * k1[0], x[1] + 0.5 * dt * k1[1]};
        const auto k2 = f_of(rates, hd_mid, Y2);
        const std::array<double, 2> Y3{x[0] + 0.5 * dt * k2[0], x[1] + 0.5 * dt * k2[1]};
        const auto k3 = f_of(rates, hd_mid, Y3);
        const std::array<double, 2> Y4{x[0] + dt * k3[0], x[1] + dt * k3[1]};
        const auto k4 = f_of(rates, hd_end, Y4);

        std::array<double, 2> x_next{}, d_next{};
        for (int c = 0; c < 2; ++c)
            x_next[c] = x[c] + dt / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
        d_next = f_of(rates, hd_end, x_next);

        // Sup distance of two candidate pieces sharing their left data:
        // |dv1| + (4/27) dt |dd1|; gate on it so the hereditary inputs of
        // the next sweep have settled.
        double delta = 0.0;
        for (int c = 0; c < 2; ++c) {
            delta = std::max(delta, std::abs(x_next[c] - view.ev1[c]) +
                                        0.15 * dt * std::abs(d_next[c] - view.ed1[c]));
        }
        view.ev1 = x_next;
        view.ed1 = d_next;
        if (delta <= opts.pc_tol) {
            out.converged = true;
            out.x_next = x_next;
            out.d_next = d_next;
            out.hd_end = hd_end;
            return out;
        }
    }
    return out;
}

} // namespace

SimulationResult integrate(const RateSet& rates, const HistorySegment& phi0, double T,
                           const IntegratorOptions& opts) {
    if (phi0.dim() != 2) throw std::invalid_argument("integrate: phi0 must be dim 2");
    if (!(T > 0.0)) throw std::invalid_argument("integrate: T must be positive");
    const double h = rates.params.horizon();
    if (std::abs(phi0.h() - h) > 1e-9 * std::max(1.0, h))
        throw std::invalid_argument("integrate: phi0 horizon does not match b/K");

    const double res0 = manifold_residual(rates, phi0, {opts.inner_m});
    if (res0 > opts.x_tol) {
        std::ostringstream os;
        os << "integrate: initial history off the solution manifold: residual " << res0
           << " > x_tol " << opts.x_tol << "; pass it through make_compatible first";
        throw CompatibilityError(os.str());
    }

    PiecewiseHermite dense = phi0.data();
    std::vector<StepRecord> records;
    const double R = rates.params.R_minus;
    const double domain_margin = 1e-12 * std::max(1.0, std::abs(R));

    auto c1_at = [&](double t) {
        double sup = 0.0, dsup = 0.0;
        for (int c = 0; c < 2; ++c) {
            const auto vr = dense.value_range(c, t - h, t);
            const auto sr = dense.slope_range(c, t - h, t);
            sup = std::max({sup, std::abs(vr.lo), std::abs(vr.hi)});
            dsup = std::max({dsup, std::abs(sr.lo), std::abs(sr.hi)});
        }
        return sup + dsup;
    };

    auto push_record = [&](double t, std::array<double, 2> xv, std::array<double, 2> dv,
                           const Hereditary& hd) {
        records.push_back({t, xv[0], xv[1], dv[0], dv[1], hd.tau, hd.F, c1_at(t),
                           rates.q_eval(xv[1]), -rates.params.mu,
                           rates.beta_eval(hd.v_lag) * hd.w_lag * hd.F});
    };

    std::array<double, 2> x = phi0.evaluate(0.0);
    std::array<double, 2> dx = phi0.derivative(0.0);
    const auto hd0 = hereditary_at(rates, base_view(dense), 0.0, opts.inner_m);
    push_record(0.0, x, dx, hd0);

    TerminationRecord term{TerminationStatus::reached_T, T, ""};
    const double dt_base = std::min(opts.dt, 0.5 * rates.params.tau_lower_bound());
    const double t_tiny = 1e-12 * std::max(1.0, T);

    double t = 0.0;
    while (t < T - t_tiny) {
        double dt = std::min(dt_base, T - t);
        if (T - t - dt <= t_tiny) dt = T - t; // swallow the float remainder
        StepOutcome step;
        std::string last_error;
        bool fatal_domain = false;
        for (int halving = 0; halving <= opts.max_halvings; ++halving) {
            try {
                step = attempt_step(rates, dense, t, x, dx, dt, opts);
            } catch (const DomainError& ex) {
                last_error = ex.what();
                fatal_domain = true;
                dt *= 0.5;
                continue;
            } catch (const std::runtime_error& ex) {
                last_error = ex.what();
                fatal_domain = false;
                dt *= 0.5;
                continue;
            }
            if (step.converged) break;
            last_error = "predictor-corrector gate not met";
            fatal_domain = false;
            dt *= 0.5;
        }
        if (!step.converged) {
            // A persistent domain error at vanishing step means the
            // regulation component is leaving I right now.
            term.status = fatal_domain ? TerminationStatus::domain_exit
                                       : TerminationStatus::inner_failure;
            term.t_stop = t;
            term.witness = last_error;
            break;
        }

        double t_next = t + dt;
        if (std::abs(T - t_next) <= t_tiny) t_next = T;
        dense.push_knot(t_next, step.x_next, step.d_next);
        t = t_next;
        x = step.x_next;
        dx = step.d_next;
        push_record(t, x, dx, step.hd_end);

        const auto v_range = dense.value_range(1, t - dt, t);
        if (v_range.lo <= R + domain_margin) {
            term.status = TerminationStatus::domain_exit;
            term.t_stop = t;
            std::ostringstream os;
            os << "v reached " << v_range.lo << " at t = " << v_range.arg_lo
               << " (R_minus = " << R << ")";
            term.witness = os.str();
            break;
        }
        if (records.back().c1norm > opts.norm_cap) {
            term.status = TerminationStatus::norm_blowup;
            term.t_stop = t;
            std::ostringstream os;
            os << "c1 norm " << records.back().c1norm << " exceeded cap " << opts.norm_cap;
            term.witness = os.str();
            break;
        }
    }
    if (term.status == TerminationStatus::reached_T) term.t_stop = t;

    Trajectory traj(std::move(dense), std::move(records), h, res0);
    return {std::move(traj), std::move(term)};
}

HistorySegment Trajectory::segment_at(double t) const {
    if (t < 0.0 || t > t_end() + 1e-12)
        throw DomainError("segment_at: time outside [0, t_end]");
    const double tol = 1e-14 * std::max(1.0, h_);
    std::vector<double> knots;
    std::vector<std::array<double, 2>> vals, ders;
    knots.push_back(-h_);
    vals.push_back(dense_.eval_all(t - h_));
    ders.push_back(dense_.slope_all(t - h_));
    for (std::size_t i = 0; i < dense_.knot_count(); ++i) {
        const double k = dense_.knot(i);
        if (k <= t - h_ + tol || k >= t - tol) continue;
        knots.push_back(k - t);
        vals.push_back(dense_.value_at_knot(i));
        ders.push_back(dense_.deriv_at_knot(i));
    }
    knots.push_back(0.0);
    vals.push_back(dense_.eval_all(t));
    ders.push_back(dense_.slope_all(t));
    return HistorySegment(PiecewiseHermite(2, std::move(knots), std::move(vals), std::move(ders)));
}

void Trajectory::write_csv(std::ostream& os, const TerminationRecord& term) const {
    os << "t,w,v,dw,dv,tau,F,c1norm\n";
    for (const auto& r : records_) {
        const double cols[8] = {r.t, r.w, r.v, r.dw, r.dv, r.tau, r.F, r.c1norm};
        for (int i = 0; i < 8; ++i) {
            if (i) os << ',';
            format_double(os, cols[i]);
        }
        os << "\n";
    }
    os << "# termination: status=" << to_string(term.status) << " t_stop=";
    format_double(os, term.t_stop);
    if (!term.witness.empty()) os << " witness=" << term.witness;
    os << "\n";
}

std::array<double, 2> voc_residual(const RateSet& rates, const Trajectory& traj,
                                   std::span<const double> sample_times, InnerOptions inner) {
    const auto& recs = traj.records();
    if (recs.size() < 2) throw std::invalid_argument("voc_residual: trajectory too short");
    const auto& dense = traj.dense();
    const double mu = rates.params.mu;
    const auto view = base_view(dense);

    auto q_at = [&](double s) { return rates.q_eval(dense.eval(1, s)); };
    auto forcing_at = [&](double s) {
        const auto hd = hereditary_at(rates, view, s, inner.m);
        return std::exp(mu * s) * rates.beta_eval(hd.v_lag) * hd.F * hd.w_lag;
    };

    // Prefix integrals on the accepted-step grid (Simpson with dense midpoints).
    const std::size_t n = recs.size();
    std::vector<double> Iq(n, 0.0), Jb(n, 0.0);
    double q_left = q_at(recs[0].t);
    double b_left = forcing_at(recs[0].t);
    for (std::size_t k = 0; k + 1 < n; ++k) {
        const double a = recs[k].t, b = recs[k + 1].t;
        const double mid = 0.5 * (a + b);
        const double q_right = q_at(b), b_right = forcing_at(b);
        Iq[k + 1] = Iq[k] + (b - a) / 6.0 * (q_left + 4.0 * q_at(mid) + q_right);
        Jb[k + 1] = Jb[k] + (b - a) / 6.0 * (b_left + 4.0 * forcing_at(mid) + b_right);
        q_left = q_right;
        b_left = b_right;
    }

    const double w0 = recs[0].w, v0 = recs[0].v;
    std::array<double, 2> worst{0.0, 0.0};
    for (double ts : sample_times) {
        if (ts < 0.0 || ts > traj.t_end() + 1e-12)
            throw std::invalid_argument("voc_residual: sample outside trajectory");
        std::size_t k = 0;
        while (k + 2 < n && recs[k + 1].t <= ts) ++k;
        const double a = recs[k].t;
        double iq = Iq[k], jb = Jb[k];
        if (ts > a) {
            const double mid = 0.5 * (a + ts);
            iq += (ts - a) / 6.0 * (q_at(a) + 4.0 * q_at(mid) + q_at(ts));
            jb += (ts - a) / 6.0 * (forcing_at(a) + 4.0 * forcing_at(mid) + forcing_at(ts));
        }
        const double w_voc = w0 * std::exp(iq);
        const double v_voc = std::exp(-mu * ts) * (v0 + jb);
        worst[0] = std::max(worst[0], std::abs(dense.eval(0, ts) - w_voc));
        worst[1] = std::max(worst[1], std::abs(dense.eval(1, ts) - v_voc));
    }
    return worst;
}

std::vector<Equilibrium> find_equilibria(const RateSet& rates, double v_lo, double v_hi,
                                         int n_seeds, InnerOptions inner) {
    (void)rates.check_in_I(v_lo, "equilibria search interval start");
    if (!(v_hi > v_lo)) throw std::invalid_argument("find_equilibria: empty interval");
    n_seeds = std::max(n_seeds, 2);

    std::vector<Equilibrium> out;
    out.push_back({0.0, 0.0, true,
                   manifold_residual(rates, HistorySegment::constant(2, rates.params.horizon(),
                                                                     {0.0, 0.0}),
                                     inner)});

    std::vector<double> roots;
    double prev_v = v_lo, prev_q = rates.q_eval(v_lo);
    for (int i = 1; i <= n_seeds; ++i) {
        const double v = v_lo + (v_hi - v_lo) * i / n_seeds;
        const double qv = rates.q_eval(v);
        if (prev_q == 0.0) roots.push_back(prev_v);
        if (prev_q * qv < 0.0) {
            double lo = prev_v, hi = v, flo = prev_q;
            for (int it = 0; it < 200; ++it) {
                const double mid = 0.5 * (lo + hi);
                const double fm = rates.q_eval(mid);
                if (fm == 0.0) { lo = hi = mid; break; }
                if (flo * fm < 0.0)
                    hi = mid;
                else {
                    lo = mid;
                    flo = fm;
                }
                if (hi - lo <= 1e-15 * std::max(1.0, std::abs(hi))) break;
            }
            roots.push_back(0.5 * (lo + hi));
        }
        prev_v = v;
        prev_q = qv;
    }
    if (prev_q == 0.0) roots.push_back(prev_v);

    for (double vbar : roots) {
        if (!out.empty()) {
            bool dup = false;
            for (const auto& e : out)
                if (!e.trivial && std::abs(e.v_bar - vbar) <= 1e-9 * std::max(1.0, std::abs(vbar)))
                    dup = true;
            if (dup) continue;
        }
        const double beta_v = rates.beta_eval(vbar);
        const double h = rates.params.horizon();
        const auto const_psi = HistorySegment::constant(1, h, {vbar, 0.0});
        const double F = solve_maturation(rates, const_psi, inner).F;
        double wbar;
        if (std::abs(beta_v * F) < 1e-300) {
            if (std::abs(rates.params.mu * vbar) > 0.0) continue; // no finite w solves the balance
            wbar = 0.0;
        } else {
            wbar = rates.params.mu * vbar / (beta_v * F);
        }
        const auto seg = HistorySegment::constant(2, h, {wbar, vbar});
        const double res = manifold_residual(rates, seg, inner);
        if (res <= 1e-9) out.push_back({wbar, vbar, false, res});
    }
    return out;
}

} // namespace stemdde
