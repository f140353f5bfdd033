"""Smoke tests for the python bindings: the main operations drive the same
C++ core that the CLI and the acceptance suite use."""

import math
import os

import pytest

import stemdde

CONFIG_DIR = os.environ.get("STEMDDE_CONFIG_DIR", os.path.join(os.path.dirname(__file__), "..", "..", "configs"))


@pytest.fixture(scope="module")
def demo():
    return stemdde.Config.load(os.path.join(CONFIG_DIR, "demo.json"))


def test_config_roundtrip(demo):
    again = stemdde.Config.from_json(demo.to_json())
    assert again.to_json() == demo.to_json()


def test_closed_form_delay():
    cfg = stemdde.Config.from_json(
        """{
        "params": {"x1": 0.0, "x2": 1.0, "b": 1.5, "K": 1.0, "eps": 1.0,
                   "mu": 0.1, "R_minus": -1.0},
        "rates": {"g": {"family": "constant", "c": 1.0},
                  "d": {"family": "constant", "c": 0.2},
                  "beta": {"family": "constant", "c": 1.0},
                  "q": {"family": "constant", "c": -0.1}}
        }"""
    )
    psi = stemdde.HistorySegment.constant(1, 1.5, 0.7)
    sol = stemdde.solve_maturation(cfg, psi)
    assert abs(sol.tau - 1.0) < 1e-12
    assert abs(sol.F - math.exp(0.2)) < 1e-10
    assert sol.threshold_residual <= 1e-12
    assert abs(sol.y(0.5) - 0.5) < 1e-12


def test_directional_derivative_matches_fd(demo):
    psi = stemdde.HistorySegment.from_function(
        1.5, 64, 1, lambda t: 1.0 + 0.3 * math.sin(2 * t), lambda t: 0.6 * math.cos(2 * t)
    )
    chi = lambda t: math.cos(t)  # noqa: E731
    d_tau = stemdde.dir_deriv_tau(demo, psi, chi)
    delta = 1e-5
    tau = lambda eps: stemdde.solve_maturation(  # noqa: E731
        demo,
        stemdde.HistorySegment.from_function(
            1.5, 256, 1,
            lambda t: 1.0 + 0.3 * math.sin(2 * t) + eps * math.cos(t),
            lambda t: 0.6 * math.cos(2 * t) - eps * math.sin(t),
        ),
    ).tau
    fd = (tau(delta) - tau(-delta)) / (2 * delta)
    assert d_tau == pytest.approx(fd, rel=1e-4)


def test_integrate_equilibrium(demo):
    eqs = stemdde.find_equilibria(demo, 0.5, 4.0, 64)
    nontrivial = [e for e in eqs if e.type == "nontrivial"]
    assert len(nontrivial) == 1
    eq = nontrivial[0]
    assert eq.residual <= 1e-9

    phi0 = stemdde.HistorySegment.constant(2, 1.5, eq.w_bar, eq.v_bar)
    assert stemdde.manifold_residual(demo, phi0) <= 1e-9
    result = stemdde.integrate(demo, phi0, 3.0)
    assert result.termination.status == "reached_T"
    for rec in result.trajectory.records:
        assert abs(rec.w - eq.w_bar) <= 1e-10
        assert abs(rec.v - eq.v_bar) <= 1e-10


def test_integrate_and_voc(demo):
    phi0 = stemdde.make_compatible(demo, demo.initial_history())
    result = stemdde.integrate(demo, phi0, 4.0)
    assert result.termination.status == "reached_T"
    res = stemdde.voc_residual(demo, result.trajectory, [1.0, 2.0, 3.5])
    assert max(res) <= 1e-6

    seg = result.trajectory.segment_at(2.0)
    assert seg.dim == 2
    w, v = result.trajectory.value(2.0)
    assert w == pytest.approx(seg.evaluate(0.0)[0])
    assert v == pytest.approx(seg.evaluate(0.0)[1])


def test_incompatible_history_raises(demo):
    raw = stemdde.HistorySegment.constant(2, 1.5, 0.5, 0.5)
    with pytest.raises(stemdde.CompatibilityError):
        stemdde.integrate(demo, raw, 1.0)


def test_domain_error(demo):
    psi = stemdde.HistorySegment.constant(1, 1.5, -2.0)
    with pytest.raises(stemdde.DomainError):
        stemdde.solve_maturation(demo, psi)


def test_run_commands(tmp_path, demo):
    code = stemdde.run_simulate(demo, str(tmp_path / "out"))
    assert code == 0
    csv = (tmp_path / "out" / "trajectory.csv").read_text()
    assert csv.startswith("t,w,v,dw,dv,tau,F,c1norm")
    assert "# termination: status=reached_T" in csv
