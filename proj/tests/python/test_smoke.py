import json
import math
import os
import subprocess

import pytest

import impulseq as iq


def test_linear_closed_forms():
    p = iq.QueueParams(10.0, 1.0)
    assert iq.linear_solution(p, 0.0, 2.0) == pytest.approx(8.646647167633873, rel=1e-14)
    b = iq.linear_steady_bounds(p, 0.5, 2.0)
    assert b.upper == pytest.approx(9.274211165042462, rel=1e-14)
    assert b.lower == pytest.approx(4.637105582521231, rel=1e-14)
    assert iq.linear_cycle_average(p, 0.5, 2.0) == pytest.approx(7.681447208739385, rel=1e-14)


def test_erlang_closed_forms():
    p = iq.QueueParams(9.0, 5.0, 2.0, 2.0)
    assert iq.capacity_crossing_time(p, 5.0) == pytest.approx(math.log(7.0) / 2, rel=1e-15)
    assert iq.capacity_crossing_time(p, 1.0) is None
    assert iq.erlang_solution(p, 5.0, 2.0) == pytest.approx(1.8011771458521751, rel=1e-14)
    assert iq.classify_regime(p, 1.0) == iq.RegimeCase.UnderStartUnderLoad
    b = iq.erlang_steady_bounds(iq.QueueParams(10.0, 1.0, 2.0, 2.0), 0.5, 2.0)
    assert b.regime_valid
    assert b.bounds.upper == pytest.approx(5.9445452386419495, rel=1e-14)


def test_optimal_times_and_oracle_agree():
    p = iq.QueueParams(9.0, 5.0, 2.0, 2.0)
    opt = iq.erlang_optimal_times(p, 1.0, 1.5, 0.5)
    assert opt.tau_min == pytest.approx(0.6689069783783671, abs=1e-12)
    assert opt.tau_max == 1.5
    assert {c.provenance for c in opt.candidates} >= {"analytic", "endpoint"}
    tau, J = iq.grid_minimize_impulse_time(p, 1.0, 1.5, 0.5, 2000)
    assert abs(tau - opt.tau_min) < 1.5e-3
    assert opt.J_min <= J + 1e-8
    pieces = iq.erlang_subintervals(p, 1.0, 1.5, 0.5)
    assert [s.label for s in pieces] == ["I_{4,1}"]


def test_integrator_and_steady_cycle():
    p = iq.QueueParams(9.0, 5.0, 2.0, 2.0)
    t, q, breaks = iq.integrate_impulsive(p, 5.0, 2.0, m=1.0, tau=10.0)
    assert t[0] == 0.0 and t[-1] == 2.0
    assert len(t) == len(q) >= 2000
    assert breaks[0][1] == "capacity_crossing"
    assert abs(breaks[0][0] - math.log(7.0) / 2) < 1e-9
    bounds, average = iq.steady_cycle_bounds(iq.QueueParams(10.0, 1.0), 0.5, 2.0, dynamics=iq.Dynamics.Linear)
    assert bounds.lower == pytest.approx(4.637105582521231, rel=1e-6)
    assert average == pytest.approx(7.681447208739385, rel=1e-5)


def test_errors_map_to_python_exceptions():
    with pytest.raises(ValueError):
        iq.QueueParams(-1.0, 1.0)
    with pytest.raises(ArithmeticError):
        iq.linear_steady_bounds(iq.QueueParams(10.0, 1.0), 10.0, 2.0)
    with pytest.raises(iq.BoundaryError):
        p = iq.QueueParams(10.0, 1.0, 2.0, 2.0)
        cut = iq.erlang_subintervals(p, 3.0, 5.0, 0.5)[1].lo
        iq.derivative_average(p, 3.0, 5.0, cut, 0.5)


@pytest.mark.skipif("IMPULSEQ_CLI" not in os.environ, reason="CLI path not provided")
def test_cli_matches_bindings(tmp_path):
    cfg = tmp_path / "case.json"
    cfg.write_text(json.dumps({
        "params": {"lambda": 9, "mu": 5, "theta": 2, "c": 2},
        "q0": 1, "T": 1.5, "impulse": {"m": 0.5},
    }))
    out = subprocess.run([os.environ["IMPULSEQ_CLI"], "optimize", "--config", str(cfg)],
                         check=True, capture_output=True, text=True).stdout
    doc = json.loads(out)
    opt = iq.erlang_optimal_times(iq.QueueParams(9.0, 5.0, 2.0, 2.0), 1.0, 1.5, 0.5)
    assert doc["tau_min"] == opt.tau_min
    assert doc["J_min"] == opt.J_min
