#include "stemdde/maturation.hpp"

#include "stemdde/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace stemdde {

namespace {

// Dense-output Newton for the threshold crossing inside one step.
// yh is the Hermite interpolant on [lo, hi] with yh(lo) > x1 >= yh(hi).
double polish_root(const PiecewiseHermite& y_path, const RateSet& rates, const ScalarFn& psi,
                   double lo, double hi, double x1, double stop_tol, double& residual) {
    std::size_t hint = 0;
    auto f = [&](double t) { return y_path.eval(0, t, hint) - x1; };
    double t = 0.5 * (lo + hi);
    double ft = f(t);
    double best_t = t, best = std::abs(ft);
    int non_contracting = 0;
    bool bisect = false;
    for (int it = 0; it < 60 && best > stop_tol; ++it) {
        if (!bisect) {
            const double slope = -rates.g_eval(y_path.eval(0, t, hint), psi(-t));
            double t_new = (slope != 0.0) ? t - ft / slope : lo - 1.0;
            if (!(t_new > lo) || !(t_new < hi)) t_new = 0.5 * (lo + hi);
            const double f_new = f(t_new);
            if (std::abs(f_new) >= std::abs(ft)) {
                if (++non_contracting >= 3) bisect = true;
            } else {
                non_contracting = 0;
            }
            t = t_new;
            ft = f_new;
        } else {
            t = 0.5 * (lo + hi);
            ft = f(t);
        }
        if (ft > 0.0)
            lo = t;
        else
            hi = t;
        if (std::abs(ft) < best) {
            best = std::abs(ft);
            best_t = t;
        }
    }
    residual = best;
    return best_t;
}

} // namespace

MaturationResult solve_maturation(const RateSet& rates, const HistorySegment& psi,
                                  InnerOptions opts) {
    if (psi.dim() != 1)
        throw std::invalid_argument("solve_maturation: psi must be a dim-1 segment");
    const double h = rates.params.horizon();
    if (std::abs(psi.h() - h) > 1e-9 * std::max(1.0, h)) {
        std::ostringstream os;
        os << "solve_maturation: psi horizon " << psi.h() << " does not match b/K = " << h;
        throw std::invalid_argument(os.str());
    }
    // Exact range pre-check against I; the callable path re-checks pointwise.
    const auto r = psi.data().value_range(0);
    (void)rates.check_in_I(r.lo, "psi range minimum");
    return solve_maturation(rates, as_fn(psi), opts);
}

MaturationResult solve_maturation(const RateSet& rates, const ScalarFn& psi, InnerOptions opts) {
    const RateParams& p = rates.params;
    const double h = p.horizon();
    const int m = std::max(opts.m, 2);
    const double dt = h / m;
    const double ball_tol = 1e-9 * std::max(1.0, p.b);

    MaturationResult out;
    out.h = h;
    out.m = m;

    double y = p.x2;
    double acc_d = 0.0; // cumulative integral of d along the path
    double u0 = psi(0.0);
    (void)rates.check_in_I(u0, "psi(0)");

    PiecewiseHermite path(1, 0.0, {y, 0.0}, {-rates.g_eval(y, u0), 0.0});
    PiecewiseHermite dint(1, 0.0, {0.0, 0.0}, {rates.d_eval(y, u0), 0.0});

    int cross_step = -1; // first step index whose right node is at/below x1
    double u_left = u0;
    for (int i = 0; i < m; ++i) {
        const double s0 = i * dt;
        const double s_mid = s0 + 0.5 * dt;
        const double s1 = (i + 1 == m) ? h : s0 + dt;
        const double um = psi(-s_mid);
        const double u1 = psi(-s1);

        const double k1 = -rates.g_eval(y, u_left);
        const double k2 = -rates.g_eval(y + 0.5 * dt * k1, um);
        const double k3 = -rates.g_eval(y + 0.5 * dt * k2, um);
        const double k4 = -rates.g_eval(y + dt * k3, u1);
        const double l1 = rates.d_eval(y, u_left);
        const double l2 = rates.d_eval(y + 0.5 * dt * k1, um);
        const double l3 = rates.d_eval(y + 0.5 * dt * k2, um);
        const double l4 = rates.d_eval(y + dt * k3, u1);

        const double y_next = y + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        acc_d += dt / 6.0 * (l1 + 2.0 * l2 + 2.0 * l3 + l4);

        if (std::abs(y_next - p.x2) > p.b + ball_tol) {
            if (cross_step < 0) {
                std::ostringstream os;
                os << "maturation path left the closed ball B(x2=" << p.x2 << ", b=" << p.b
                   << ") before the threshold: y(" << s1 << ") = " << y_next
                   << "; the speed bounds fail along this history";
                throw ModelViolationError(os.str());
            }
            break; // threshold already located; truncate the tail
        }

        y = y_next;
        path.push_knot(s1, {y, 0.0}, {-rates.g_eval(y, u1), 0.0});
        dint.push_knot(s1, {acc_d, 0.0}, {rates.d_eval(y, u1), 0.0});
        u_left = u1;
        if (cross_step < 0 && y <= p.x1) cross_step = i;
    }

    if (cross_step < 0) {
        std::ostringstream os;
        os << "threshold unreachable: y - x1 has no sign change on [0, " << path.t_back()
           << "] (y stays in [" << path.value_range(0).lo << ", " << p.x2 << "], x1 = " << p.x1
           << ")";
        throw ThresholdError(os.str());
    }

    const double stop_tol = 1e-12 * std::max(1.0, std::abs(p.x2 - p.x1));
    const double lo = path.knot(static_cast<std::size_t>(cross_step));
    const double hi = path.knot(static_cast<std::size_t>(cross_step) + 1);
    double residual = 0.0;
    double tau;
    if (path.value_at_knot(static_cast<std::size_t>(cross_step) + 1)[0] == p.x1) {
        tau = hi;
    } else {
        tau = polish_root(path, rates, psi, lo, hi, p.x1, stop_tol, residual);
    }

    out.tau = tau;
    out.threshold_residual = residual;
    out.F = std::exp(dint.eval(0, tau));
    out.y_path = std::move(path);
    out.d_integral = std::move(dint);
    return out;
}

double simpson_on_grid(const std::function<double(double)>& fn, double t_end, double step) {
    if (t_end <= 0.0) return 0.0;
    double acc = 0.0;
    double a = 0.0;
    double fa = fn(0.0);
    const double tiny = 1e-14 * std::max(1.0, t_end);
    while (a + step <= t_end + tiny) {
        const double b = std::min(a + step, t_end);
        const double fb = fn(b);
        acc += (b - a) / 6.0 * (fa + 4.0 * fn(0.5 * (a + b)) + fb);
        a = b;
        fa = fb;
        if (t_end - a <= tiny) return acc;
    }
    const double w = t_end - a;
    if (w > tiny) acc += w / 6.0 * (fa + 4.0 * fn(a + 0.5 * w) + fn(t_end));
    return acc;
}

PiecewiseHermite dir_deriv_y_path(const RateSet& rates, const MaturationResult& sol,
                                  const ScalarFn& psi, const ScalarFn& chi) {
    const PiecewiseHermite& yp = sol.y_path;
    std::size_t hint = 0;
    // z' = A(s) z + B(s), A = -d1g(y, psi(-s)), B = -d2g(y, psi(-s)) chi(-s)
    auto A = [&](double s) { return -rates.g_d1(yp.eval(0, s, hint), psi(-s)); };
    auto B = [&](double s) { return -rates.g_d2(yp.eval(0, s, hint), psi(-s)) * chi(-s); };

    double z = 0.0;
    PiecewiseHermite zp(1, 0.0, {0.0, 0.0}, {B(0.0), 0.0});
    for (std::size_t i = 0; i + 1 < yp.knot_count(); ++i) {
        const double s0 = yp.knot(i), s1 = yp.knot(i + 1);
        const double dt = s1 - s0;
        const double sm = 0.5 * (s0 + s1);
        const double A0 = A(s0), B0 = B(s0);
        const double Am = A(sm), Bm = B(sm);
        const double A1 = A(s1), B1 = B(s1);
        const double k1 = A0 * z + B0;
        const double k2 = Am * (z + 0.5 * dt * k1) + Bm;
        const double k3 = Am * (z + 0.5 * dt * k2) + Bm;
        const double k4 = A1 * (z + dt * k3) + B1;
        z += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        zp.push_knot(s1, {z, 0.0}, {A1 * z + B1, 0.0});
    }
    return zp;
}

DirectionalDerivatives directional_derivatives(const RateSet& rates, const MaturationResult& sol,
                                               const ScalarFn& psi, const ScalarFn& chi) {
    DirectionalDerivatives out;
    out.dy_path = dir_deriv_y_path(rates, sol, psi, chi);
    const double tau = sol.tau;
    const double step = sol.h / sol.m;
    std::size_t hy = 0, hz = 0;

    auto tau_integrand = [&](double s) {
        const double y = sol.y_path.eval(0, s, hy);
        const double u = psi(-s);
        const double z = out.dy_path.eval(0, s, hz);
        return rates.g_d1(y, u) * z + rates.g_d2(y, u) * chi(-s);
    };
    const double denom = rates.g_eval(rates.params.x1, psi(-tau));
    out.d_tau = -simpson_on_grid(tau_integrand, tau, step) / denom;

    auto f_integrand = [&](double s) {
        const double y = sol.y_path.eval(0, s, hy);
        const double u = psi(-s);
        const double z = out.dy_path.eval(0, s, hz);
        return rates.d_d1(y, u) * z + rates.d_d2(y, u) * chi(-s);
    };
    const double bracket =
        simpson_on_grid(f_integrand, tau, step) + rates.d_eval(rates.params.x1, psi(-tau)) * out.d_tau;
    out.d_F = sol.F * bracket;
    return out;
}

double dir_deriv_y(const RateSet& rates, const HistorySegment& psi, const ScalarFn& chi, double t,
                   InnerOptions opts) {
    const auto sol = solve_maturation(rates, psi, opts);
    const auto zp = dir_deriv_y_path(rates, sol, as_fn(psi), chi);
    return zp.eval(0, t);
}

double dir_deriv_tau(const RateSet& rates, const HistorySegment& psi, const ScalarFn& chi,
                     InnerOptions opts) {
    const auto sol = solve_maturation(rates, psi, opts);
    return directional_derivatives(rates, sol, as_fn(psi), chi).d_tau;
}

double dir_deriv_F(const RateSet& rates, const HistorySegment& psi, const ScalarFn& chi,
                   InnerOptions opts) {
    const auto sol = solve_maturation(rates, psi, opts);
    return directional_derivatives(rates, sol, as_fn(psi), chi).d_F;
}

} // namespace stemdde
