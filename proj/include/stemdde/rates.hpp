#pragma once

#include <array>
#include <string>

namespace stemdde {

/// Scalar model parameters. The regulation variable lives in the open
/// interval I = (R_minus, inf); the maturity variable in the closed ball
/// around x2 of radius b. The horizon of a history segment is h = b/K.
struct RateParams {
    double x1 = 0.0;      // threshold maturity
    double x2 = 1.0;      // initial maturity
    double b = 1.5;       // maturity ball radius around x2
    double K = 1.0;       // upper speed bound on the ball
    double eps = 0.7;     // lower speed bound on the ball
    double mu = 0.1;      // mature-cell decay rate
    double R_minus = -1.0; // left end of I

    [[nodiscard]] double horizon() const { return b / K; }
    [[nodiscard]] double tau_lower_bound() const { return (x2 - x1) / K; }
    [[nodiscard]] double tau_upper_bound() const { return (x2 - x1) / eps; }

    /// Structural validation (positivity, ordering). The quantitative speed
    /// window x2-x1 < (b/K)*eps is a model hypothesis and is verified by the
    /// condition checker, not here.
    void validate() const;
};

enum class ScalarFamily { constant, affine, hill, exp_decay };

/// A C1 scalar rate v -> r(v) on I from a closed set of parametric families
/// with closed-form derivatives:
///   constant   r(v) = c
///   affine     r(v) = a + b*v
///   hill       r(v) = c / (1 + (v/k)^n)
///   exp_decay  r(v) = c * exp(-r*v)
struct ScalarRate {
    ScalarFamily family = ScalarFamily::constant;
    double c = 0.0;
    double a = 0.0, b = 0.0;
    double k = 1.0;
    int n = 1;
    double r = 0.0;

    [[nodiscard]] static ScalarRate make_constant(double c);
    [[nodiscard]] static ScalarRate make_affine(double a, double b);
    [[nodiscard]] static ScalarRate make_hill(double c, double k, int n);
    [[nodiscard]] static ScalarRate make_exp_decay(double c, double r);

    [[nodiscard]] double eval(double v) const;
    [[nodiscard]] double deriv(double v) const;

    /// Exact range of the value over [lo, hi] (endpoints plus closed-form
    /// interior critical points).
    void value_range(double lo, double hi, double& vmin, double& vmax,
                     double& arg_min, double& arg_max) const;
    /// Exact max of |r'| over [lo, hi].
    void abs_deriv_max(double lo, double hi, double& m, double& arg) const;

    /// True if r(v) >= 0 holds for every v in (R_minus, inf), decided from
    /// family-specific analytic bounds.
    [[nodiscard]] bool nonnegative_on(double R_minus) const;
    /// Throws ConfigError if the family has a pole inside (R_minus, inf).
    void validate_on_interval(double R_minus, const std::string& name) const;

    [[nodiscard]] std::string describe() const;
};

/// Sampled or exact extrema of a planar rate on a box, with witnesses.
struct BoxBounds {
    double inf = 0.0, sup = 0.0;
    double sup_abs_d1 = 0.0, sup_abs_d2 = 0.0;
    bool exact = false;
    std::array<double, 2> arg_inf{}, arg_sup{}, arg_d1{}, arg_d2{};
};

enum class PlanarFamily { constant, affine_x, hill_y, separable };

/// A C1 planar rate (x, y) -> r(x, y) on J x I, J = R:
///   constant   r = c
///   affine_x   r = a + b*x
///   hill_y     r = base + amp / (1 + (y/k)^n)
///   separable  r = fx(x) * fy(y) with scalar-family factors
struct PlanarRate {
    PlanarFamily family = PlanarFamily::constant;
    double c = 0.0;
    double a = 0.0, b = 0.0;
    double base = 0.0, amp = 0.0, k = 1.0;
    int n = 1;
    ScalarRate fx, fy;

    [[nodiscard]] static PlanarRate make_constant(double c);
    [[nodiscard]] static PlanarRate make_affine_x(double a, double b);
    [[nodiscard]] static PlanarRate make_hill_y(double base, double amp, double k, int n);
    [[nodiscard]] static PlanarRate make_separable(ScalarRate fx, ScalarRate fy);

    [[nodiscard]] double eval(double x, double y) const;
    [[nodiscard]] double d1(double x, double y) const;
    [[nodiscard]] double d2(double x, double y) const;

    /// Extrema of value and |partials| on [x_lo,x_hi] x [y_lo,y_hi].
    /// Constant, affine_x and separable families return exact analytic
    /// bounds (exact = true); hill_y is scanned on an n_samples^2 grid.
    [[nodiscard]] BoxBounds bounds_on_box(double x_lo, double x_hi, double y_lo, double y_hi,
                                          int n_samples) const;

    void validate_on_interval(double R_minus, double x_lo, double x_hi,
                              const std::string& name) const;

    [[nodiscard]] std::string describe() const;
};

/// The full set of model ingredients: maturation speed g, net growth rate d,
/// commitment rate beta, stem-cell net growth rate q, plus scalar parameters.
/// Immutable after validation; evaluation helpers enforce the I-domain.
struct RateSet {
    RateParams params;
    PlanarRate g, d;
    ScalarRate beta, q;

    void validate() const;

    [[nodiscard]] double check_in_I(double v, const char* what) const;

    [[nodiscard]] double g_eval(double x, double y) const { return g.eval(x, check_in_I(y, "g regulation argument")); }
    [[nodiscard]] double g_d1(double x, double y) const { return g.d1(x, check_in_I(y, "g regulation argument")); }
    [[nodiscard]] double g_d2(double x, double y) const { return g.d2(x, check_in_I(y, "g regulation argument")); }
    [[nodiscard]] double d_eval(double x, double y) const { return d.eval(x, check_in_I(y, "d regulation argument")); }
    [[nodiscard]] double d_d1(double x, double y) const { return d.d1(x, check_in_I(y, "d regulation argument")); }
    [[nodiscard]] double d_d2(double x, double y) const { return d.d2(x, check_in_I(y, "d regulation argument")); }
    [[nodiscard]] double beta_eval(double v) const { return beta.eval(check_in_I(v, "beta argument")); }
    [[nodiscard]] double beta_deriv(double v) const { return beta.deriv(check_in_I(v, "beta argument")); }
    [[nodiscard]] double q_eval(double v) const { return q.eval(check_in_I(v, "q argument")); }
    [[nodiscard]] double q_deriv(double v) const { return q.deriv(check_in_I(v, "q argument")); }
};

} // namespace stemdde
