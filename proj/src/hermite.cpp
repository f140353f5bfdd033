#include "stemdde/hermite.hpp"

#include "stemdde/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace stemdde {

namespace {

constexpr double kDomainTol = 1e-12;

// Monomial coefficients of the cubic in s: p(s) = ((A s + B) s + C) s + D.
struct Coeffs {
    double A, B, C, D;
};

inline Coeffs coeffs(double v0, double d0, double v1, double d1, double dt) {
    const double m0 = dt * d0;
    const double m1 = dt * d1;
    return {2.0 * v0 + m0 - 2.0 * v1 + m1,
            -3.0 * v0 - 2.0 * m0 + 3.0 * v1 - m1,
            m0, v0};
}

// Real roots of a*s^2 + b*s + c in the open interval (0,1).
inline int quad_roots_in_unit(double a, double b, double c, double out[2]) {
    int n = 0;
    if (std::abs(a) < 1e-300) {
        if (std::abs(b) > 0.0) {
            const double s = -c / b;
            if (s > 0.0 && s < 1.0) out[n++] = s;
        }
        return n;
    }
    const double disc = b * b - 4.0 * a * c;
    if (disc < 0.0) return 0;
    const double sq = std::sqrt(disc);
    // Numerically stable pair.
    const double q = -0.5 * (b + (b >= 0.0 ? sq : -sq));
    const double r1 = q / a;
    const double r2 = (std::abs(q) > 0.0) ? c / q : r1;
    for (double s : {r1, r2}) {
        if (s > 0.0 && s < 1.0) out[n++] = s;
    }
    if (n == 2 && out[0] == out[1]) n = 1;
    return n;
}

} // namespace

namespace hermite {

double value(double v0, double d0, double v1, double d1, double dt, double s) {
    const Coeffs c = coeffs(v0, d0, v1, d1, dt);
    return ((c.A * s + c.B) * s + c.C) * s + c.D;
}

double slope(double v0, double d0, double v1, double d1, double dt, double s) {
    const Coeffs c = coeffs(v0, d0, v1, d1, dt);
    return ((3.0 * c.A * s + 2.0 * c.B) * s + c.C) / dt;
}

double integral(double v0, double d0, double v1, double d1, double dt, double s0, double s1) {
    const Coeffs c = coeffs(v0, d0, v1, d1, dt);
    auto anti = [&](double s) {
        return (((c.A / 4.0 * s + c.B / 3.0) * s + c.C / 2.0) * s + c.D) * s;
    };
    return dt * (anti(s1) - anti(s0));
}

} // namespace hermite

PiecewiseHermite::PiecewiseHermite(int dim, double t0, std::array<double, 2> v0,
                                   std::array<double, 2> d0)
    : dim_(dim) {
    if (dim != 1 && dim != 2) throw std::invalid_argument("PiecewiseHermite: dim must be 1 or 2");
    knots_.push_back(t0);
    values_.push_back(v0);
    derivs_.push_back(d0);
}

PiecewiseHermite::PiecewiseHermite(int dim, std::vector<double> knots,
                                   std::vector<std::array<double, 2>> values,
                                   std::vector<std::array<double, 2>> derivs)
    : dim_(dim), knots_(std::move(knots)), values_(std::move(values)), derivs_(std::move(derivs)) {
    if (dim != 1 && dim != 2) throw std::invalid_argument("PiecewiseHermite: dim must be 1 or 2");
    if (knots_.size() < 2 || values_.size() != knots_.size() || derivs_.size() != knots_.size())
        throw std::invalid_argument("PiecewiseHermite: need >= 2 knots with matching data");
    for (std::size_t i = 1; i < knots_.size(); ++i)
        if (!(knots_[i] > knots_[i - 1]))
            throw std::invalid_argument("PiecewiseHermite: knots must be strictly increasing");
}

void PiecewiseHermite::push_knot(double t, std::array<double, 2> value,
                                 std::array<double, 2> deriv) {
    if (!(t > knots_.back())) throw std::invalid_argument("push_knot: time must increase");
    knots_.push_back(t);
    values_.push_back(value);
    derivs_.push_back(deriv);
}

double PiecewiseHermite::clamp_domain(double t) const {
    if (t < knots_.front()) {
        if (t < knots_.front() - kDomainTol) {
            std::ostringstream os;
            os << "argument " << t << " below domain start " << knots_.front();
            throw DomainError(os.str());
        }
        return knots_.front();
    }
    if (t > knots_.back()) {
        if (t > knots_.back() + kDomainTol) {
            std::ostringstream os;
            os << "argument " << t << " above domain end " << knots_.back();
            throw DomainError(os.str());
        }
        return knots_.back();
    }
    return t;
}

std::size_t PiecewiseHermite::locate(double t) const {
    auto it = std::upper_bound(knots_.begin(), knots_.end(), t);
    std::size_t i = static_cast<std::size_t>(it - knots_.begin());
    if (i > 0) --i;
    if (i >= knots_.size() - 1) i = knots_.size() - 2;
    return i;
}

double PiecewiseHermite::eval(int c, double t) const {
    std::size_t hint = locate(clamp_domain(t));
    return eval(c, t, hint);
}

double PiecewiseHermite::slope(int c, double t) const {
    std::size_t hint = locate(clamp_domain(t));
    return slope(c, t, hint);
}

double PiecewiseHermite::eval(int c, double t, std::size_t& hint) const {
    t = clamp_domain(t);
    if (hint >= knots_.size() - 1 || t < knots_[hint] || t > knots_[hint + 1]) hint = locate(t);
    if (t == knots_[hint]) return values_[hint][c];
    if (t == knots_[hint + 1]) return values_[hint + 1][c];
    const double dt = knots_[hint + 1] - knots_[hint];
    const double s = (t - knots_[hint]) / dt;
    return hermite::value(values_[hint][c], derivs_[hint][c], values_[hint + 1][c],
                          derivs_[hint + 1][c], dt, s);
}

double PiecewiseHermite::slope(int c, double t, std::size_t& hint) const {
    t = clamp_domain(t);
    if (hint >= knots_.size() - 1 || t < knots_[hint] || t > knots_[hint + 1]) hint = locate(t);
    if (t == knots_[hint]) return derivs_[hint][c];
    if (t == knots_[hint + 1]) return derivs_[hint + 1][c];
    const double dt = knots_[hint + 1] - knots_[hint];
    const double s = (t - knots_[hint]) / dt;
    return hermite::slope(values_[hint][c], derivs_[hint][c], values_[hint + 1][c],
                          derivs_[hint + 1][c], dt, s);
}

std::array<double, 2> PiecewiseHermite::eval_all(double t) const {
    std::array<double, 2> out{};
    for (int c = 0; c < dim_; ++c) out[c] = eval(c, t);
    return out;
}

std::array<double, 2> PiecewiseHermite::slope_all(double t) const {
    std::array<double, 2> out{};
    for (int c = 0; c < dim_; ++c) out[c] = slope(c, t);
    return out;
}

double PiecewiseHermite::integral(int c, double a, double b) const {
    double sign = 1.0;
    if (b < a) {
        std::swap(a, b);
        sign = -1.0;
    }
    a = clamp_domain(a);
    b = clamp_domain(b);
    const std::size_t ia = locate(a), ib = locate(b);
    double acc = 0.0;
    for (std::size_t i = ia; i <= ib; ++i) {
        const double t0 = knots_[i], t1 = knots_[i + 1];
        const double dt = t1 - t0;
        const double s0 = (std::max(a, t0) - t0) / dt;
        const double s1 = (std::min(b, t1) - t0) / dt;
        if (s1 <= s0) continue;
        acc += hermite::integral(values_[i][c], derivs_[i][c], values_[i + 1][c],
                                 derivs_[i + 1][c], dt, s0, s1);
    }
    return sign * acc;
}

PiecewiseHermite::Range PiecewiseHermite::value_range(int c, double a, double b) const {
    a = clamp_domain(a);
    b = clamp_domain(b);
    Range r;
    r.lo = r.hi = eval(c, a);
    r.arg_lo = r.arg_hi = a;
    auto consider = [&](double t, double val) {
        if (val < r.lo) { r.lo = val; r.arg_lo = t; }
        if (val > r.hi) { r.hi = val; r.arg_hi = t; }
    };
    consider(b, eval(c, b));
    const std::size_t ia = locate(a), ib = locate(b);
    for (std::size_t i = ia; i <= ib; ++i) {
        const double t0 = knots_[i], t1 = knots_[i + 1];
        const double dt = t1 - t0;
        if (t0 >= a && t0 <= b) consider(t0, values_[i][c]);
        if (t1 >= a && t1 <= b) consider(t1, values_[i + 1][c]);
        const Coeffs co = coeffs(values_[i][c], derivs_[i][c], values_[i + 1][c], derivs_[i + 1][c], dt);
        double roots[2];
        const int n = quad_roots_in_unit(3.0 * co.A, 2.0 * co.B, co.C, roots);
        for (int j = 0; j < n; ++j) {
            const double t = t0 + roots[j] * dt;
            if (t >= a && t <= b)
                consider(t, ((co.A * roots[j] + co.B) * roots[j] + co.C) * roots[j] + co.D);
        }
    }
    return r;
}

PiecewiseHermite::Range PiecewiseHermite::slope_range(int c, double a, double b) const {
    a = clamp_domain(a);
    b = clamp_domain(b);
    Range r;
    r.lo = r.hi = slope(c, a);
    r.arg_lo = r.arg_hi = a;
    auto consider = [&](double t, double val) {
        if (val < r.lo) { r.lo = val; r.arg_lo = t; }
        if (val > r.hi) { r.hi = val; r.arg_hi = t; }
    };
    consider(b, slope(c, b));
    const std::size_t ia = locate(a), ib = locate(b);
    for (std::size_t i = ia; i <= ib; ++i) {
        const double t0 = knots_[i], t1 = knots_[i + 1];
        const double dt = t1 - t0;
        if (t0 >= a && t0 <= b) consider(t0, derivs_[i][c]);
        if (t1 >= a && t1 <= b) consider(t1, derivs_[i + 1][c]);
        // The Hermite slope is quadratic in s; its extremum sits at s* = -B/(3A).
        const Coeffs co = coeffs(values_[i][c], derivs_[i][c], values_[i + 1][c], derivs_[i + 1][c], dt);
        if (std::abs(co.A) > 1e-300) {
            const double s = -co.B / (3.0 * co.A);
            if (s > 0.0 && s < 1.0) {
                const double t = t0 + s * dt;
                if (t >= a && t <= b)
                    consider(t, ((3.0 * co.A * s + 2.0 * co.B) * s + co.C) / dt);
            }
        }
    }
    return r;
}

double PiecewiseHermite::sup_norm() const {
    double m = 0.0;
    for (int c = 0; c < dim_; ++c) {
        const Range r = value_range(c);
        m = std::max({m, std::abs(r.lo), std::abs(r.hi)});
    }
    return m;
}

double PiecewiseHermite::deriv_sup_norm() const {
    double m = 0.0;
    for (int c = 0; c < dim_; ++c) {
        const Range r = slope_range(c);
        m = std::max({m, std::abs(r.lo), std::abs(r.hi)});
    }
    return m;
}

} // namespace stemdde
