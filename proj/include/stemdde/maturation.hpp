#pragma once

#include "stemdde/hermite.hpp"
#include "stemdde/history.hpp"
#include "stemdde/rates.hpp"

#include <functional>

namespace stemdde {

/// A scalar function of time; used for regulation histories psi (argument in
/// [-h, 0]) and for derivative directions chi, which only need to be
/// continuous (their values are read, never their derivatives).
using ScalarFn = std::function<double(double)>;

/// Solution of the inner threshold problem for one history psi: the
/// maturation path y(., psi), the delay tau(psi), and the growth factor
/// F(psi) = exp( integral_0^tau d(y(s), psi(-s)) ds ).
struct MaturationResult {
    PiecewiseHermite y_path;     // dim 1, forward time on [0, h]
    PiecewiseHermite d_integral; // dim 1, cumulative integral of d along the path
    double tau = 0.0;            // unique root of y(tau) = x1, in (0, h)
    double F = 1.0;
    double threshold_residual = 0.0; // |y(tau) - x1| after root polish
    double h = 0.0;
    int m = 0; // inner grid resolution used
};

/// Options of the inner fixed-step RK4 integrator.
struct InnerOptions {
    int m = 512; // steps across [0, h]
};

/// Solve y'(s) = -g(y(s), psi(-s)), y(0) = x2 on [0, h] and locate the
/// threshold crossing y(tau) = x1 (sign-change bracketing on the dense
/// output, Newton polish with the analytic slope -g, bisection fallback).
///
/// Errors: DomainError if psi leaves I; ModelViolationError if y exits the
/// closed maturity ball before the threshold; ThresholdError if y - x1 has
/// no sign change on [0, h].
MaturationResult solve_maturation(const RateSet& rates, const HistorySegment& psi,
                                  InnerOptions opts = {});
MaturationResult solve_maturation(const RateSet& rates, const ScalarFn& psi,
                                  InnerOptions opts = {});

/// Directional derivative t -> Dy(psi)chi(t) as a dense path on [0, h],
/// computed from the companion linear ODE
///   z' = -d1g(y, psi(-t)) z - d2g(y, psi(-t)) chi(-t),  z(0) = 0
/// along a stored maturation result. chi needs only to be continuous.
PiecewiseHermite dir_deriv_y_path(const RateSet& rates, const MaturationResult& sol,
                                  const ScalarFn& psi, const ScalarFn& chi);

/// Dtau(psi)chi and DF(psi)chi evaluated together with the Dy path
/// (shares the path solve; preferred when more than one is needed).
struct DirectionalDerivatives {
    PiecewiseHermite dy_path;
    double d_tau = 0.0;
    double d_F = 0.0;
};
DirectionalDerivatives directional_derivatives(const RateSet& rates, const MaturationResult& sol,
                                               const ScalarFn& psi, const ScalarFn& chi);

/// Single-shot wrappers (each solves the inner problem internally).
double dir_deriv_y(const RateSet& rates, const HistorySegment& psi, const ScalarFn& chi,
                   double t, InnerOptions opts = {});
double dir_deriv_tau(const RateSet& rates, const HistorySegment& psi, const ScalarFn& chi,
                     InnerOptions opts = {});
double dir_deriv_F(const RateSet& rates, const HistorySegment& psi, const ScalarFn& chi,
                   InnerOptions opts = {});

/// Composite Simpson quadrature of fn over [0, t_end] on the inner step grid
/// (full steps of width step, one partial step at the end). Matches the
/// integrator's design order; used for the threshold identity and the
/// derivative formulas.
double simpson_on_grid(const std::function<double(double)>& fn, double t_end, double step);

[[nodiscard]] inline ScalarFn as_fn(HistorySegment seg) {
    return [seg = std::move(seg)](double theta) { return seg.evaluate1(theta); };
}

} // namespace stemdde
