#include "stemdde/errors.hpp"
#include "stemdde/semiflow.hpp"

#include "oracle_fixed_delay.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace stemdde;
using namespace testsupport;

namespace {

HistorySegment smooth_phi0(double h, double w0 = 0.6, double v0 = 0.8) {
    return HistorySegment::from_function2(
        h, 48,
        [=](double t) {
            return std::array<double, 2>{w0 + 0.1 * std::sin(1.3 * t),
                                         v0 + 0.15 * std::cos(0.9 * t)};
        },
        [=](double t) {
            return std::array<double, 2>{0.13 * std::cos(1.3 * t),
                                         -0.135 * std::sin(0.9 * t)};
        });
}

double sup_distance(const HistorySegment& a, const HistorySegment& b, int n = 1200) {
    double m = 0.0;
    const double h = a.h();
    for (int i = 0; i <= n; ++i) {
        const double th = -h + h * i / double(n);
        const auto va = a.evaluate(th), vb = b.evaluate(th);
        const auto da = a.derivative(th), db = b.derivative(th);
        for (int c = 0; c < 2; ++c)
            m = std::max({m, std::abs(va[c] - vb[c]), std::abs(da[c] - db[c])});
    }
    return m;
}

} // namespace

TEST_CASE("rhs: zero history and hand-evaluable constants") {
    const auto rs = demo_rates();
    const auto zero = HistorySegment::constant(2, rs.params.horizon(), {0.0, 0.0});
    const auto f0 = rhs(rs, zero);
    CHECK(std::abs(f0[0]) <= 1e-14);
    CHECK(std::abs(f0[1]) <= 1e-14);

    const auto rc = const_rates(1.0, 0.0, 0.7, 0.4, 0.1);
    const auto phi = HistorySegment::constant(2, rc.params.horizon(), {0.5, 0.8});
    const auto f = rhs(rc, phi);
    CHECK(f[0] == doctest::Approx(0.4 * 0.5).epsilon(1e-12));
    CHECK(f[1] == doctest::Approx(0.7 * 0.5 - 0.1 * 0.8).epsilon(1e-12));
}

TEST_CASE("manifold_residual: constructed offset") {
    const auto rs = demo_rates();
    const double h = rs.params.horizon();
    const auto phi = HistorySegment::constant(2, h, {0.5, 0.5});
    const auto f = rhs(rs, phi);
    // constant segment has phi'(0) = 0, so the residual is |f|
    CHECK(manifold_residual(rs, phi) == doctest::Approx(std::hypot(f[0], f[1])).epsilon(1e-12));

    // derivative track offset by 0.1 in the first component at theta = 0
    const auto compat = make_compatible(rs, phi);
    const auto& d = compat.data();
    std::vector<double> knots(d.knots());
    std::vector<std::array<double, 2>> vals, ders;
    for (std::size_t i = 0; i < d.knot_count(); ++i) {
        vals.push_back(d.value_at_knot(i));
        ders.push_back(d.deriv_at_knot(i));
    }
    ders.back()[0] += 0.1;
    const HistorySegment off(PiecewiseHermite(2, std::move(knots), std::move(vals), std::move(ders)));
    CHECK(manifold_residual(rs, off) == doctest::Approx(0.1).epsilon(1e-4));
}

TEST_CASE("make_compatible: fixed point, blend locality, equilibrium identity") {
    const auto rs = demo_rates();
    const double h = rs.params.horizon();

    const auto phi = HistorySegment::constant(2, h, {0.5, 0.5});
    const auto compat = make_compatible(rs, phi);
    CHECK(manifold_residual(rs, compat) <= 1e-10);
    // values untouched left of the blend window
    for (double th : {-h, -0.8 * h, -0.51 * h, -h / 8.0 - 1e-6}) {
        const auto a = phi.evaluate(th), b = compat.evaluate(th);
        CHECK(a[0] == doctest::Approx(b[0]).epsilon(1e-14));
        CHECK(a[1] == doctest::Approx(b[1]).epsilon(1e-14));
    }
    // and adjusted inside it
    CHECK(std::abs(compat.derivative(0.0)[1] - phi.derivative(0.0)[1]) > 1e-6);

    // already-compatible input comes back unchanged
    const auto again = make_compatible(rs, compat);
    CHECK(sup_distance(again, compat) == 0.0);

    // equilibria are fixed points of the projection
    const auto eqs = find_equilibria(rs, 0.5, 4.0, 64);
    REQUIRE(eqs.size() >= 2);
    const auto eq_seg = HistorySegment::constant(2, h, {eqs[1].w_bar, eqs[1].v_bar});
    const auto eq_proj = make_compatible(rs, eq_seg);
    CHECK(sup_distance(eq_proj, eq_seg) <= 1e-9);
}

TEST_CASE("find_equilibria: trivial only for rootless q, hand-solved affine case") {
    const auto rc = const_rates(1.0, 0.0, 1.0, 0.5, 0.1); // q = 0.5 everywhere
    const auto only_trivial = find_equilibria(rc, 0.1, 5.0, 64);
    REQUIRE(only_trivial.size() == 1);
    CHECK(only_trivial[0].trivial);

    // q(v) = 1 - v/2, g = 1, d = 0, beta = 1, mu = 0.1: v = 2, w = 0.2
    RateSet rs = const_rates(1.0, 0.0, 1.0, 0.5, 0.1);
    rs.q = ScalarRate::make_affine(1.0, -0.5);
    rs.validate();
    const auto eqs = find_equilibria(rs, 0.1, 5.0, 64);
    REQUIRE(eqs.size() == 2);
    CHECK(eqs[1].v_bar == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(eqs[1].w_bar == doctest::Approx(0.2).epsilon(1e-10));
    CHECK(eqs[1].residual <= 1e-9);

    // the equilibrium is a root of the right-hand side
    const auto f = rhs(rs, HistorySegment::constant(2, rs.params.horizon(),
                                                    {eqs[1].w_bar, eqs[1].v_bar}));
    CHECK(std::abs(f[0]) <= 1e-9);
    CHECK(std::abs(f[1]) <= 1e-9);
}

TEST_CASE("integrate: equilibrium is a fixed point of the flow") {
    const auto rs = demo_rates();
    const double h = rs.params.horizon();
    const auto eqs = find_equilibria(rs, 0.5, 4.0, 64);
    REQUIRE(eqs.size() >= 2);
    const auto phi0 = HistorySegment::constant(2, h, {eqs[1].w_bar, eqs[1].v_bar});
    IntegratorOptions opts;
    opts.dt = 0.05;
    const auto result = integrate(rs, phi0, 20.0 * h, opts);
    CHECK(result.termination.status == TerminationStatus::reached_T);
    for (const auto& rec : result.trajectory.records()) {
        CHECK(std::abs(rec.w - eqs[1].w_bar) <= 1e-10);
        CHECK(std::abs(rec.v - eqs[1].v_bar) <= 1e-10);
    }
}

TEST_CASE("integrate: constant-speed reduction matches the fixed-delay oracle") {
    const double gamma = 1.0, delta = 0.25, beta0 = 0.8, q0 = -0.15, mu = 0.12;
    const auto rc = const_rates(gamma, delta, beta0, q0, mu);
    const double h = rc.params.horizon();
    const double tau_bar = (rc.params.x2 - rc.params.x1) / gamma;

    const auto phi0 = make_compatible(rc, smooth_phi0(h));
    IntegratorOptions opts;
    opts.dt = 0.025;
    const auto result = integrate(rc, phi0, 10.0 * tau_bar, opts);
    REQUIRE(result.termination.status == TerminationStatus::reached_T);

    oracle::FixedDelayOracle orc;
    orc.tau = tau_bar;
    orc.Fbar = std::exp(delta * tau_bar);
    orc.mu = mu;
    orc.q = [&](double) { return q0; };
    orc.beta = [&](double) { return beta0; };
    orc.w_hist = [&](double t) { return phi0.evaluate(t)[0]; };
    orc.v_hist = [&](double t) { return phi0.evaluate(t)[1]; };
    orc.run(10.0 * tau_bar, 0.005);

    double sup_err = 0.0;
    for (int i = 0; i <= 400; ++i) {
        const double t = 10.0 * tau_bar * i / 400.0;
        const auto xv = result.trajectory.value(t);
        sup_err = std::max({sup_err, std::abs(xv[0] - orc.w_at(t)),
                            std::abs(xv[1] - orc.v_at(t))});
    }
    CHECK(sup_err <= 1e-7);
}

TEST_CASE("integrate: manifold residual stays small along the run") {
    const auto rs = demo_rates();
    const auto phi0 = make_compatible(rs, smooth_phi0(rs.params.horizon()));
    const auto result = integrate(rs, phi0, 6.0);
    REQUIRE(result.termination.status == TerminationStatus::reached_T);
    const double res0 = result.trajectory.initial_manifold_residual();
    for (double t : {1.0, 2.5, 4.0, 6.0}) {
        const auto seg = result.trajectory.segment_at(t);
        CHECK(manifold_residual(rs, seg) <= 10.0 * res0 + 1e-8);
    }
}

TEST_CASE("integrate: semiflow restart consistency") {
    const auto rs = demo_rates();
    const auto phi0 = make_compatible(rs, smooth_phi0(rs.params.horizon(), 0.7, 1.1));
    const double T = 4.0, s = 2.0;
    const auto direct = integrate(rs, phi0, T);
    REQUIRE(direct.termination.status == TerminationStatus::reached_T);

    const auto first = integrate(rs, phi0, s);
    const SystemState state = first.trajectory.state_at(s);
    CHECK(state.t == doctest::Approx(s));
    const auto second = integrate(rs, state.segment, T - s);
    REQUIRE(second.termination.status == TerminationStatus::reached_T);

    const auto final_direct = direct.trajectory.segment_at(T);
    const auto final_restart = second.trajectory.segment_at(T - s);
    CHECK(sup_distance(final_direct, final_restart) <= 1e-7);
}

TEST_CASE("integrate: nonnegative initial data stays nonnegative") {
    const auto rs = demo_rates();
    SegmentSampler sampler({0.3, 1.2, 0.4, 12}, rs.params.horizon(), rs.params.R_minus, 4711);
    for (int run = 0; run < 3; ++run) {
        const auto phi0 = make_compatible(rs, sampler.draw_pair());
        const auto result = integrate(rs, phi0, 8.0);
        REQUIRE(result.termination.status == TerminationStatus::reached_T);
        double min_val = 1e300;
        for (const auto& rec : result.trajectory.records())
            min_val = std::min({min_val, rec.w, rec.v});
        CHECK(min_val >= -1e-12);
    }
}

TEST_CASE("integrate: outer step never exceeds half the delay lower bound") {
    const auto rs = demo_rates(); // tau_lb = (x2 - x1)/K = 1
    const auto eqs = find_equilibria(rs, 0.5, 4.0, 64);
    REQUIRE(eqs.size() >= 2);
    const auto phi0 =
        HistorySegment::constant(2, rs.params.horizon(), {eqs[1].w_bar, eqs[1].v_bar});
    IntegratorOptions opts;
    opts.dt = 5.0; // far above the cap
    const auto result = integrate(rs, phi0, 2.0, opts);
    const auto& recs = result.trajectory.records();
    REQUIRE(recs.size() >= 3);
    for (std::size_t i = 0; i + 1 < recs.size(); ++i)
        CHECK(recs[i + 1].t - recs[i].t <= 0.5 * rs.params.tau_lower_bound() + 1e-12);
}

TEST_CASE("integrate: rejects incompatible initial data") {
    const auto rs = demo_rates();
    const auto raw = HistorySegment::constant(2, rs.params.horizon(), {0.5, 0.5});
    CHECK_THROWS_AS((void)integrate(rs, raw, 1.0), CompatibilityError);
}

TEST_CASE("integrate: blow-up detection with positive q") {
    auto rs = const_rates(1.0, 0.0, 0.8, 0.6, 0.1); // q = 0.6 > 0: w grows like e^{0.6 t}
    const auto phi0 = make_compatible(rs, smooth_phi0(rs.params.horizon(), 1.0, 1.0));
    IntegratorOptions opts;
    opts.dt = 0.1;
    opts.norm_cap = 1e6;
    const auto result = integrate(rs, phi0, 60.0, opts);
    CHECK(result.termination.status == TerminationStatus::norm_blowup);
    CHECK(result.termination.t_stop < 60.0);
    const auto& recs = result.trajectory.records();
    REQUIRE(recs.size() >= 12);
    for (std::size_t i = recs.size() - 10; i + 1 < recs.size(); ++i)
        CHECK(recs[i + 1].c1norm > recs[i].c1norm);
}

TEST_CASE("integrate: domain exit detection") {
    // negative stem-cell mass drives v below R_minus
    auto rs = const_rates(1.0, 0.0, 0.8, 0.1, 0.05);
    const auto phi0 = make_compatible(
        rs, HistorySegment::constant(2, rs.params.horizon(), {-2.0, 0.3}));
    const auto result = integrate(rs, phi0, 40.0);
    CHECK(result.termination.status == TerminationStatus::domain_exit);
    CHECK(!result.termination.witness.empty());
}

TEST_CASE("voc_residual: equilibrium and closed-form first component") {
    const auto rs = demo_rates();
    const auto eqs = find_equilibria(rs, 0.5, 4.0, 64);
    REQUIRE(eqs.size() >= 2);
    const auto phi0 =
        HistorySegment::constant(2, rs.params.horizon(), {eqs[1].w_bar, eqs[1].v_bar});
    const auto eq_run = integrate(rs, phi0, 5.0);
    std::vector<double> samples = {1.0, 2.0, 3.0, 4.5};
    const auto res_eq = voc_residual(rs, eq_run.trajectory, samples);
    CHECK(res_eq[0] <= 1e-9);
    CHECK(res_eq[1] <= 1e-9);

    const auto rc = const_rates(1.0, 0.2, 0.5, 0.3, 0.1);
    const auto phi1 = make_compatible(rc, smooth_phi0(rc.params.horizon()));
    const auto run = integrate(rc, phi1, 6.0);
    REQUIRE(run.termination.status == TerminationStatus::reached_T);
    const auto res = voc_residual(rc, run.trajectory, samples);
    CHECK(res[0] <= 1e-8); // w(t) = w(0) e^{q0 t} exactly
    for (const auto& rec : run.trajectory.records())
        CHECK(rec.w == doctest::Approx(run.trajectory.records()[0].w * std::exp(0.3 * rec.t))
                           .epsilon(1e-8));
}

TEST_CASE("trajectory csv: format and footer") {
    const auto rs = demo_rates();
    const auto eqs = find_equilibria(rs, 0.5, 4.0, 64);
    REQUIRE(eqs.size() >= 2);
    const auto phi0 =
        HistorySegment::constant(2, rs.params.horizon(), {eqs[1].w_bar, eqs[1].v_bar});
    const auto result = integrate(rs, phi0, 1.0);
    std::ostringstream os;
    result.trajectory.write_csv(os, result.termination);
    const std::string text = os.str();
    CHECK(text.rfind("t,w,v,dw,dv,tau,F,c1norm\n", 0) == 0);
    CHECK(text.find("# termination: status=reached_T") != std::string::npos);

    // byte-identical on reruns
    const auto result2 = integrate(rs, phi0, 1.0);
    std::ostringstream os2;
    result2.trajectory.write_csv(os2, result2.termination);
    CHECK(text == os2.str());
}
