#pragma once

#include <array>
#include <cstddef>
#include <vector>

namespace stemdde {

/// One cubic Hermite interval of a 1- or 2-component track.
/// Left endpoint data must splice C1 against the segment it is appended to.
struct HermitePiece {
    double dt = 0.0; // interval length, >= 0
    std::array<double, 2> v0{}, d0{}; // value / derivative at the left end
    std::array<double, 2> v1{}, d1{}; // value / derivative at the right end
};

/// Dense piecewise cubic Hermite track with 1 or 2 components.
///
/// Value and first derivative are stored per knot and shared between
/// neighbouring intervals, so the represented function is C1 by
/// construction. Evaluation is exact at knots (stored data is returned
/// bitwise). Norms, ranges and integrals are computed exactly for the
/// interpolant via the closed-form critical points of each cubic.
class PiecewiseHermite {
public:
    PiecewiseHermite() = default;

    /// Start an empty track at time t0 with the given node data.
    PiecewiseHermite(int dim, double t0, std::array<double, 2> v0, std::array<double, 2> d0);

    PiecewiseHermite(int dim, std::vector<double> knots,
                     std::vector<std::array<double, 2>> values,
                     std::vector<std::array<double, 2>> derivs);

    [[nodiscard]] int dim() const { return dim_; }
    [[nodiscard]] std::size_t knot_count() const { return knots_.size(); }
    [[nodiscard]] double knot(std::size_t i) const { return knots_[i]; }
    [[nodiscard]] const std::vector<double>& knots() const { return knots_; }
    [[nodiscard]] double t_front() const { return knots_.front(); }
    [[nodiscard]] double t_back() const { return knots_.back(); }
    [[nodiscard]] std::array<double, 2> value_at_knot(std::size_t i) const { return values_[i]; }
    [[nodiscard]] std::array<double, 2> deriv_at_knot(std::size_t i) const { return derivs_[i]; }

    /// Append a node at time t (> t_back), extending the track by one interval.
    void push_knot(double t, std::array<double, 2> value, std::array<double, 2> deriv);

    /// Interpolated value of component c; exact (bitwise) at knots.
    /// Out-of-domain t is clamped within an absolute tolerance of 1e-12,
    /// beyond that a DomainError is raised.
    [[nodiscard]] double eval(int c, double t) const;
    [[nodiscard]] double slope(int c, double t) const;
    [[nodiscard]] std::array<double, 2> eval_all(double t) const;
    [[nodiscard]] std::array<double, 2> slope_all(double t) const;

    /// Cursor variants: `hint` caches the interval index between calls with
    /// nearby arguments (the hot path of the inner integrator).
    [[nodiscard]] double eval(int c, double t, std::size_t& hint) const;
    [[nodiscard]] double slope(int c, double t, std::size_t& hint) const;

    /// Exact integral of component c over [a, b] (antiderivative of the cubic).
    [[nodiscard]] double integral(int c, double a, double b) const;

    /// Exact range of component c over [a, b], with locations of the extrema.
    struct Range {
        double lo = 0.0, hi = 0.0;
        double arg_lo = 0.0, arg_hi = 0.0;
    };
    [[nodiscard]] Range value_range(int c, double a, double b) const;
    [[nodiscard]] Range slope_range(int c, double a, double b) const;
    [[nodiscard]] Range value_range(int c) const { return value_range(c, t_front(), t_back()); }
    [[nodiscard]] Range slope_range(int c) const { return slope_range(c, t_front(), t_back()); }

    /// sup over t of max_c |x_c(t)|  (max norm across components, exact).
    [[nodiscard]] double sup_norm() const;
    /// sup over t of max_c |x_c'(t)| (exact for the interpolant derivative).
    [[nodiscard]] double deriv_sup_norm() const;

private:
    [[nodiscard]] std::size_t locate(double t) const;
    double clamp_domain(double t) const;

    int dim_ = 1;
    std::vector<double> knots_;
    std::vector<std::array<double, 2>> values_;
    std::vector<std::array<double, 2>> derivs_;
};

namespace hermite {

/// p(s), s in [0,1], for the cubic with endpoint data (v0,d0)-(v1,d1) on width dt.
double value(double v0, double d0, double v1, double d1, double dt, double s);
/// dp/dt at s.
double slope(double v0, double d0, double v1, double d1, double dt, double s);
/// Integral of p over t in [t0 + s0*dt, t0 + s1*dt].
double integral(double v0, double d0, double v1, double d1, double dt, double s0, double s1);

} // namespace hermite

} // namespace stemdde
