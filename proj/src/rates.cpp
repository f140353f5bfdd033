#include "stemdde/rates.hpp"

#include "stemdde/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

namespace stemdde {

void RateParams::validate() const {
    std::ostringstream os;
    if (!(b > 0.0)) { os << "params.b must be positive, got " << b; throw ConfigError(os.str()); }
    if (!(K > 0.0)) { os << "params.K must be positive, got " << K; throw ConfigError(os.str()); }
    if (!(eps > 0.0)) { os << "params.eps must be positive, got " << eps; throw ConfigError(os.str()); }
    if (!(eps <= K)) { os << "params.eps must not exceed K (eps=" << eps << ", K=" << K << ")"; throw ConfigError(os.str()); }
    if (!(x2 > x1)) { os << "params.x2 must exceed x1 (x1=" << x1 << ", x2=" << x2 << ")"; throw ConfigError(os.str()); }
    if (!(mu >= 0.0)) { os << "params.mu must be nonnegative, got " << mu; throw ConfigError(os.str()); }
    if (!(R_minus < 0.0)) { os << "params.R_minus must be negative, got " << R_minus; throw ConfigError(os.str()); }
}

ScalarRate ScalarRate::make_constant(double c) {
    ScalarRate r;
    r.family = ScalarFamily::constant;
    r.c = c;
    return r;
}

ScalarRate ScalarRate::make_affine(double a, double b) {
    ScalarRate r;
    r.family = ScalarFamily::affine;
    r.a = a;
    r.b = b;
    return r;
}

ScalarRate ScalarRate::make_hill(double c, double k, int n) {
    if (!(k > 0.0)) throw ConfigError("hill: k must be positive");
    if (n < 1) throw ConfigError("hill: n must be >= 1");
    ScalarRate r;
    r.family = ScalarFamily::hill;
    r.c = c;
    r.k = k;
    r.n = n;
    return r;
}

ScalarRate ScalarRate::make_exp_decay(double c, double rr) {
    ScalarRate r;
    r.family = ScalarFamily::exp_decay;
    r.c = c;
    r.r = rr;
    return r;
}

double ScalarRate::eval(double v) const {
    switch (family) {
    case ScalarFamily::constant: return c;
    case ScalarFamily::affine: return a + b * v;
    case ScalarFamily::hill: {
        const double u = std::pow(v / k, n);
        return c / (1.0 + u);
    }
    case ScalarFamily::exp_decay: return c * std::exp(-r * v);
    }
    return 0.0;
}

double ScalarRate::deriv(double v) const {
    switch (family) {
    case ScalarFamily::constant: return 0.0;
    case ScalarFamily::affine: return b;
    case ScalarFamily::hill: {
        const double u = std::pow(v / k, n);
        const double den = 1.0 + u;
        // d/dv [c/(1+(v/k)^n)] = -c*n*(v/k)^(n-1) / (k*(1+(v/k)^n)^2)
        return -c * n * std::pow(v / k, n - 1) / (k * den * den);
    }
    case ScalarFamily::exp_decay: return -c * r * std::exp(-r * v);
    }
    return 0.0;
}

namespace {
void consider_point(double v, double x, double& vmin, double& vmax, double& amin, double& amax) {
    if (v < vmin) { vmin = v; amin = x; }
    if (v > vmax) { vmax = v; amax = x; }
}
} // namespace

void ScalarRate::value_range(double lo, double hi, double& vmin, double& vmax,
                             double& arg_min, double& arg_max) const {
    vmin = vmax = eval(lo);
    arg_min = arg_max = lo;
    consider_point(eval(hi), hi, vmin, vmax, arg_min, arg_max);
    if (family == ScalarFamily::hill && n >= 2 && lo < 0.0 && hi > 0.0) {
        // interior critical point of the value: u = 0
        consider_point(eval(0.0), 0.0, vmin, vmax, arg_min, arg_max);
    }
}

void ScalarRate::abs_deriv_max(double lo, double hi, double& m, double& arg) const {
    m = std::abs(deriv(lo));
    arg = lo;
    auto consider = [&](double x) {
        const double v = std::abs(deriv(x));
        if (v > m) { m = v; arg = x; }
    };
    consider(hi);
    if (family == ScalarFamily::hill) {
        // |r'| peaks where (n-1)(1+u^n) = 2n u^n, i.e. u = ((n-1)/(n+1))^(1/n).
        if (n >= 2) {
            const double u = std::pow((n - 1.0) / (n + 1.0), 1.0 / n);
            for (double x : {k * u, -k * u}) {
                if (x > lo && x < hi) consider(x);
            }
        }
        if (lo < 0.0 && hi > 0.0) consider(0.0);
    }
}

bool ScalarRate::nonnegative_on(double R_minus) const {
    switch (family) {
    case ScalarFamily::constant: return c >= 0.0;
    case ScalarFamily::affine:
        if (b == 0.0) return a >= 0.0;
        if (b < 0.0) return false; // tends to -inf as v -> inf
        return a + b * R_minus >= 0.0;
    case ScalarFamily::hill: return c >= 0.0; // pole-free on I by validate_on_interval
    case ScalarFamily::exp_decay: return c >= 0.0;
    }
    return false;
}

void ScalarRate::validate_on_interval(double R_minus, const std::string& name) const {
    if (family == ScalarFamily::hill && (n % 2 == 1) && R_minus < -k) {
        std::ostringstream os;
        os << name << ": hill family with odd n=" << n << " has a pole at v=" << -k
           << " inside I=(" << R_minus << ", inf); raise R_minus or use even n";
        throw ConfigError(os.str());
    }
}

std::string ScalarRate::describe() const {
    std::ostringstream os;
    switch (family) {
    case ScalarFamily::constant: os << "constant(c=" << c << ")"; break;
    case ScalarFamily::affine: os << "affine(a=" << a << ", b=" << b << ")"; break;
    case ScalarFamily::hill: os << "hill(c=" << c << ", k=" << k << ", n=" << n << ")"; break;
    case ScalarFamily::exp_decay: os << "exp_decay(c=" << c << ", r=" << r << ")"; break;
    }
    return os.str();
}

PlanarRate PlanarRate::make_constant(double c) {
    PlanarRate r;
    r.family = PlanarFamily::constant;
    r.c = c;
    return r;
}

PlanarRate PlanarRate::make_affine_x(double a, double b) {
    PlanarRate r;
    r.family = PlanarFamily::affine_x;
    r.a = a;
    r.b = b;
    return r;
}

PlanarRate PlanarRate::make_hill_y(double base, double amp, double k, int n) {
    if (!(k > 0.0)) throw ConfigError("hill_y: k must be positive");
    if (n < 1) throw ConfigError("hill_y: n must be >= 1");
    PlanarRate r;
    r.family = PlanarFamily::hill_y;
    r.base = base;
    r.amp = amp;
    r.k = k;
    r.n = n;
    return r;
}

PlanarRate PlanarRate::make_separable(ScalarRate fx, ScalarRate fy) {
    PlanarRate r;
    r.family = PlanarFamily::separable;
    r.fx = fx;
    r.fy = fy;
    return r;
}

double PlanarRate::eval(double x, double y) const {
    switch (family) {
    case PlanarFamily::constant: return c;
    case PlanarFamily::affine_x: return a + b * x;
    case PlanarFamily::hill_y: return base + amp / (1.0 + std::pow(y / k, n));
    case PlanarFamily::separable: return fx.eval(x) * fy.eval(y);
    }
    return 0.0;
}

double PlanarRate::d1(double x, double y) const {
    switch (family) {
    case PlanarFamily::constant: return 0.0;
    case PlanarFamily::affine_x: return b;
    case PlanarFamily::hill_y: return 0.0;
    case PlanarFamily::separable: return fx.deriv(x) * fy.eval(y);
    }
    return 0.0;
}

double PlanarRate::d2(double x, double y) const {
    switch (family) {
    case PlanarFamily::constant: return 0.0;
    case PlanarFamily::affine_x: return 0.0;
    case PlanarFamily::hill_y: {
        const double u = std::pow(y / k, n);
        const double den = 1.0 + u;
        return -amp * n * std::pow(y / k, n - 1) / (k * den * den);
    }
    case PlanarFamily::separable: return fx.eval(x) * fy.deriv(y);
    }
    return 0.0;
}

BoxBounds PlanarRate::bounds_on_box(double x_lo, double x_hi, double y_lo, double y_hi,
                                    int n_samples) const {
    if (!(x_hi >= x_lo) || !(y_hi >= y_lo))
        throw std::invalid_argument("bounds_on_box: empty interval");
    BoxBounds bb;
    switch (family) {
    case PlanarFamily::constant:
        bb.inf = bb.sup = c;
        bb.arg_inf = bb.arg_sup = {x_lo, y_lo};
        bb.arg_d1 = bb.arg_d2 = {x_lo, y_lo};
        bb.exact = true;
        return bb;
    case PlanarFamily::affine_x: {
        const double vl = a + b * x_lo, vh = a + b * x_hi;
        bb.inf = std::min(vl, vh);
        bb.sup = std::max(vl, vh);
        bb.arg_inf = {vl <= vh ? x_lo : x_hi, y_lo};
        bb.arg_sup = {vl <= vh ? x_hi : x_lo, y_lo};
        bb.sup_abs_d1 = std::abs(b);
        bb.arg_d1 = {x_lo, y_lo};
        bb.sup_abs_d2 = 0.0;
        bb.arg_d2 = {x_lo, y_lo};
        bb.exact = true;
        return bb;
    }
    case PlanarFamily::separable: {
        double fx_min, fx_max, fx_amin, fx_amax;
        fx.value_range(x_lo, x_hi, fx_min, fx_max, fx_amin, fx_amax);
        double fy_min, fy_max, fy_amin, fy_amax;
        fy.value_range(y_lo, y_hi, fy_min, fy_max, fy_amin, fy_amax);
        // Independent arguments: product range is spanned by factor extrema.
        struct Cand { double v, x, y; };
        std::vector<Cand> cands = {{fx_min * fy_min, fx_amin, fy_amin},
                                   {fx_min * fy_max, fx_amin, fy_amax},
                                   {fx_max * fy_min, fx_amax, fy_amin},
                                   {fx_max * fy_max, fx_amax, fy_amax}};
        bb.inf = bb.sup = cands[0].v;
        bb.arg_inf = bb.arg_sup = {cands[0].x, cands[0].y};
        for (const auto& cd : cands) {
            if (cd.v < bb.inf) { bb.inf = cd.v; bb.arg_inf = {cd.x, cd.y}; }
            if (cd.v > bb.sup) { bb.sup = cd.v; bb.arg_sup = {cd.x, cd.y}; }
        }
        double dfx_max, dfx_arg, dfy_max, dfy_arg;
        fx.abs_deriv_max(x_lo, x_hi, dfx_max, dfx_arg);
        fy.abs_deriv_max(y_lo, y_hi, dfy_max, dfy_arg);
        const double afx = std::max(std::abs(fx_min), std::abs(fx_max));
        const double afy = std::max(std::abs(fy_min), std::abs(fy_max));
        bb.sup_abs_d1 = dfx_max * afy;
        bb.arg_d1 = {dfx_arg, std::abs(fy_min) >= std::abs(fy_max) ? fy_amin : fy_amax};
        bb.sup_abs_d2 = afx * dfy_max;
        bb.arg_d2 = {std::abs(fx_min) >= std::abs(fx_max) ? fx_amin : fx_amax, dfy_arg};
        bb.exact = true;
        return bb;
    }
    case PlanarFamily::hill_y: {
        const int ns = std::max(n_samples, 2);
        bool first = true;
        auto scan = [&](double x, double y) {
            const double v = eval(x, y);
            const double ad1 = std::abs(d1(x, y));
            const double ad2 = std::abs(d2(x, y));
            if (first) {
                bb.inf = bb.sup = v;
                bb.arg_inf = bb.arg_sup = {x, y};
                bb.sup_abs_d1 = ad1;
                bb.arg_d1 = {x, y};
                bb.sup_abs_d2 = ad2;
                bb.arg_d2 = {x, y};
                first = false;
                return;
            }
            if (v < bb.inf) { bb.inf = v; bb.arg_inf = {x, y}; }
            if (v > bb.sup) { bb.sup = v; bb.arg_sup = {x, y}; }
            if (ad1 > bb.sup_abs_d1) { bb.sup_abs_d1 = ad1; bb.arg_d1 = {x, y}; }
            if (ad2 > bb.sup_abs_d2) { bb.sup_abs_d2 = ad2; bb.arg_d2 = {x, y}; }
        };
        for (int i = 0; i < ns; ++i) {
            const double x = x_lo + (x_hi - x_lo) * i / (ns - 1.0);
            for (int j = 0; j < ns; ++j) scan(x, y_lo + (y_hi - y_lo) * j / (ns - 1.0));
        }
        // Seed the scan with the family's critical candidates (value peak at
        // y = 0, slope peak at the closed-form u*); x is immaterial here.
        std::vector<double> cands = {0.0};
        if (n >= 2) {
            const double u = std::pow((n - 1.0) / (n + 1.0), 1.0 / n);
            cands.push_back(k * u);
            cands.push_back(-k * u);
        }
        for (double y : cands)
            if (y >= y_lo && y <= y_hi) scan(x_lo, y);
        bb.exact = false;
        return bb;
    }
    }
    return bb;
}

void PlanarRate::validate_on_interval(double R_minus, double x_lo, double x_hi,
                                      const std::string& name) const {
    if (family == PlanarFamily::hill_y && (n % 2 == 1) && R_minus < -k) {
        std::ostringstream os;
        os << name << ": hill_y with odd n=" << n << " has a pole at y=" << -k
           << " inside I=(" << R_minus << ", inf)";
        throw ConfigError(os.str());
    }
    if (family == PlanarFamily::separable) {
        fy.validate_on_interval(R_minus, name + ".fy");
        if (fx.family == ScalarFamily::hill && (fx.n % 2 == 1) && -fx.k >= x_lo && -fx.k <= x_hi) {
            std::ostringstream os;
            os << name << ".fx: hill with odd n has a pole at x=" << -fx.k
               << " inside the maturity ball [" << x_lo << ", " << x_hi << "]";
            throw ConfigError(os.str());
        }
    }
}

std::string PlanarRate::describe() const {
    std::ostringstream os;
    switch (family) {
    case PlanarFamily::constant: os << "constant(c=" << c << ")"; break;
    case PlanarFamily::affine_x: os << "affine_x(a=" << a << ", b=" << b << ")"; break;
    case PlanarFamily::hill_y:
        os << "hill_y(base=" << base << ", amp=" << amp << ", k=" << k << ", n=" << n << ")";
        break;
    case PlanarFamily::separable:
        os << "separable(" << fx.describe() << " * " << fy.describe() << ")";
        break;
    }
    return os.str();
}

void RateSet::validate() const {
    params.validate();
    const double x_lo = params.x2 - params.b;
    const double x_hi = params.x2 + params.b;
    g.validate_on_interval(params.R_minus, x_lo, x_hi, "g");
    d.validate_on_interval(params.R_minus, x_lo, x_hi, "d");
    beta.validate_on_interval(params.R_minus, "beta");
    q.validate_on_interval(params.R_minus, "q");
    if (!beta.nonnegative_on(params.R_minus)) {
        throw ConfigError("beta must be nonnegative on I=(" + std::to_string(params.R_minus) +
                          ", inf); family " + beta.describe() + " is not");
    }
}

double RateSet::check_in_I(double v, const char* what) const {
    if (!(v > params.R_minus)) {
        std::ostringstream os;
        os << what << " = " << v << " outside I = (" << params.R_minus << ", inf)";
        throw DomainError(os.str());
    }
    return v;
}

} // namespace stemdde
