import json
import math

import numpy as np
import pytest

import hestoncal as hc


def test_forward_price_matches_analytic():
    market = hc.MarketSpec()
    params = hc.HestonParams()
    grid = hc.build_grid(market, 80, 80, 40)
    traj = hc.solve_forward(params, market, grid)
    assert traj.steps() == 40
    payoff = traj.field(0)
    assert payoff.shape == (81, 81)
    assert np.all(payoff >= 0.0)
    pde = hc.interpolate_price(traj, 10.0, 0.16, 40)
    ref = hc.heston_analytic_put(10.0, 0.16, market, params)
    assert abs(ref - 1.2277179623131387) < 1e-8
    assert abs(pde / ref - 1.0) < 0.01


def test_gradient_and_calibration_on_a_coarse_grid():
    market = hc.MarketSpec()
    grid = hc.build_grid(market, 30, 24, 10)
    data = hc.solve_forward(hc.HestonParams(), market, grid)
    u0 = hc.HestonParams(0.92, 0.05, 5.2, 0.18)
    adj = hc.adjoint_gradient(u0, data, market, grid)
    fd = hc.finite_difference_gradient(u0, data, market, grid)
    for a, b in zip(adj, fd):
        assert abs(a - b) <= 0.1 * abs(b)

    cfg = hc.CalibConfig()
    cfg.max_iters = 3
    res = hc.calibrate(u0, data, market, grid, cfg)
    assert res.iterations >= 1
    assert all(b < a for a, b in zip(res.cost_history, res.cost_history[1:]))
    assert 0.0 < res.improvement < 1.0
    assert res.u_opt.feller()


def test_projection_and_errors():
    p = hc.project(hc.HestonParams(2.0, 0.1, 5.0, 0.16))
    assert p.feller()
    assert math.isclose(p.sigma, math.sqrt(1.6))
    market = hc.MarketSpec()
    with pytest.raises(hc.GridMismatch):
        hc.cost(
            hc.solve_forward(hc.HestonParams(), market, hc.build_grid(market, 10, 8, 4)),
            hc.solve_forward(hc.HestonParams(), market, hc.build_grid(market, 10, 8, 5)),
            hc.HestonParams(),
        )
    with pytest.raises(ValueError):
        hc.MarketSpec(strike=-1.0)


def test_run_study_and_config_errors(tmp_path):
    config = {
        "study": "random",
        "grid": {"n_x": 20, "n_nu": 16, "n_tau": 6},
        "deltas": [0.0, 0.1],
        "samples": 2,
        "calibration": {"max_iters": 2},
        "workers": 1,
    }
    text = hc.run_study(json.dumps(config), tmp_path)
    lines = text.splitlines()
    assert lines[0] == hc.REPORT_HEADER
    assert len(lines) == 5
    assert (tmp_path / "random_runs.csv").read_text() == text
    assert hc.run_study(json.dumps(config)) == text
    with pytest.raises(hc.ConfigError):
        hc.run_study('{"unknown": 1}')
