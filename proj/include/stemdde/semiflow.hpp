#pragma once

#include "stemdde/history.hpp"
#include "stemdde/maturation.hpp"
#include "stemdde/rates.hpp"

#include <array>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace stemdde {

/// The semiflow state at time t: the current history segment x_t = (w_t, v_t).
struct SystemState {
    HistorySegment segment;
    double t = 0.0;
};

struct IntegratorOptions {
    double dt = 0.02;        // outer step cap; the effective step is min(dt, tau_lb/2)
    int inner_m = 512;       // inner grid resolution per delay evaluation
    double pc_tol = 1e-10;   // predictor-corrector acceptance gate
    double norm_cap = 1e8;   // operational blow-up detector on the C1 norm
    double x_tol = 1e-8;     // admissible manifold residual of the initial history
    int max_halvings = 4;    // step halvings before giving up on a step
    int max_corrector_sweeps = 3;
};

enum class TerminationStatus { reached_T, domain_exit, norm_blowup, inner_failure };

[[nodiscard]] const char* to_string(TerminationStatus s);

struct TerminationRecord {
    TerminationStatus status = TerminationStatus::reached_T;
    double t_stop = 0.0;
    std::string witness;
};

/// Per-accepted-step diagnostics. (a1, a2) = (q(v(t)), -mu) and
/// b2 = beta*F*w(t - tau) are the diagonal and forcing parts of the
/// right-hand side, recorded for the exponential-bound check.
struct StepRecord {
    double t, w, v, dw, dv, tau, F, c1norm, a1, a2, b2;
};

/// Dense C1 solution on [-h, T] with per-step diagnostics.
class Trajectory {
public:
    Trajectory(PiecewiseHermite dense, std::vector<StepRecord> records, double h,
               double initial_residual)
        : dense_(std::move(dense)), records_(std::move(records)), h_(h),
          initial_residual_(initial_residual) {}

    [[nodiscard]] const std::vector<StepRecord>& records() const { return records_; }
    [[nodiscard]] double h() const { return h_; }
    [[nodiscard]] double t_end() const { return dense_.t_back(); }
    [[nodiscard]] double initial_manifold_residual() const { return initial_residual_; }
    [[nodiscard]] const PiecewiseHermite& dense() const { return dense_; }

    [[nodiscard]] std::array<double, 2> value(double t) const { return dense_.eval_all(t); }
    [[nodiscard]] std::array<double, 2> derivative(double t) const { return dense_.slope_all(t); }

    /// The state x_t as a fresh segment on [-h, 0]; requires t in [0, t_end].
    [[nodiscard]] HistorySegment segment_at(double t) const;
    [[nodiscard]] SystemState state_at(double t) const { return {segment_at(t), t}; }

    /// CSV columns t,w,v,dw,dv,tau,F,c1norm, one row per accepted step;
    /// the termination record goes into a footer comment line.
    void write_csv(std::ostream& os, const TerminationRecord& term) const;

private:
    PiecewiseHermite dense_;
    std::vector<StepRecord> records_;
    double h_;
    double initial_residual_;
};

struct SimulationResult {
    Trajectory trajectory;
    TerminationRecord termination;
};

/// Right-hand side f(phi) of the two-component system for a dim-2 history phi:
///   ( q(psi(0)) phi_1(0),  beta(psi(-tau)) phi_1(-tau) F(psi) - mu psi(0) )
/// with tau, F from the inner threshold problem of the second component.
std::array<double, 2> rhs(const RateSet& rates, const HistorySegment& phi, InnerOptions inner = {});

/// |phi'(0) - f(phi)| (Euclidean): distance from the solution manifold
/// compatibility condition.
double manifold_residual(const RateSet& rates, const HistorySegment& phi, InnerOptions inner = {});

/// Adjust the derivative track of phi_raw on the trailing window
/// [-h_blend, 0] (cubic blend, values re-integrated on the window) so that
/// phi'(0) = f(phi); iterated until the residual falls below tol.
/// Values outside the blend window are untouched.
HistorySegment make_compatible(const RateSet& rates, const HistorySegment& phi_raw,
                               InnerOptions inner = {}, double h_blend = -1.0,
                               double tol = 1e-10, int max_passes = 10);

/// Method-of-steps RK4 with C1 dense history and a predictor-corrector for
/// the state-dependent delay overlap. phi0 must satisfy the manifold
/// condition within opts.x_tol (see make_compatible).
SimulationResult integrate(const RateSet& rates, const HistorySegment& phi0, double T,
                           const IntegratorOptions& opts = {});

/// Max residuals of the variation-of-constants identities over the samples:
///   w(t) = w(0) exp( int_0^t q(v) )
///   v(t) = e^{-mu t} [ v(0) + int_0^t e^{mu s} beta(v(s-tau)) F(v_s) w(s-tau) ds ]
std::array<double, 2> voc_residual(const RateSet& rates, const Trajectory& traj,
                                   std::span<const double> sample_times, InnerOptions inner = {});

struct Equilibrium {
    double w_bar = 0.0, v_bar = 0.0;
    bool trivial = false;
    double residual = 0.0;
};

/// The trivial equilibrium (0,0) plus nontrivial ones with q(v) = 0 located
/// by sign-change bisection over [v_lo, v_hi] and w = mu v / (beta(v) F).
std::vector<Equilibrium> find_equilibria(const RateSet& rates, double v_lo, double v_hi,
                                         int n_seeds, InnerOptions inner = {});

} // namespace stemdde
