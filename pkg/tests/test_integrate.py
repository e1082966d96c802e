import json
import os

import numpy as np
import pytest

from oldroyd_spectral.config import build_config
from oldroyd_spectral.integrate import (
    CSV_COLUMNS,
    EXIT_MONITOR,
    EXIT_NUMERICAL,
    EXIT_OK,
    resume_run,
    run,
    step_rk4,
)
from oldroyd_spectral.linear import mode_matrix
from oldroyd_spectral.littlewood_paley import build_ladder
from oldroyd_spectral.model import ModelParams
from oldroyd_spectral.spectral import SYM, GridSpec, SpectralState, forward_transform
from oldroyd_spectral.weight import RadiusTracker
from oracles import mode_evolution


def small_cfg(tmp_path, **over):
    base = {"grid.N": "16", "integration.T": "0.5", "integration.dt": "0.01",
            "integration.snapshot_every": "5", "output.dir": str(tmp_path / "out")}
    base.update({k.replace("__", "."): str(v) for k, v in over.items()})
    return build_config(base)


def test_equilibrium_run(tmp_path):
    res = run(small_cfg(tmp_path, init__epsilon=0.0))
    assert res.exit_code == EXIT_OK
    assert np.abs(res.final_state.flat()).max() == 0
    assert res.final_theta == 0.0
    assert all(s.row.hybrid == 0 for s in res.snapshots)


def test_tau_mode_against_matrix_exponential():
    g = GridSpec(2, 16)
    x = g.coordinates
    z = SpectralState.zeros(g)
    tau = forward_transform(np.stack([np.cos(x[0] + 2 * x[1]), np.zeros(g.shape), 0.5 * np.cos(x[0] + 2 * x[1])]), g, SYM)
    state = SpectralState(z.a, z.u, tau * 1e-3)
    params = ModelParams(k_friedrichs="off", linear_only=True)
    tr = RadiusTracker(0.25, 10.0)
    ladder = build_ladder(g)
    dt, T = 0.005, 1.0
    theta = 0.0
    for _ in range(int(round(T / dt))):
        state, theta = step_rk4(state, theta, dt, params, tr, ladder)
    m = (1, 2)
    v0 = np.zeros(6, complex)
    v0[3:] = 1e-3 * np.array([0.5, 0.0, 0.25])
    ref = mode_evolution(mode_matrix(np.array(m, float)).matrix, v0, T)
    got = state.flat()[(slice(None),) + g.index_of(m)]
    assert np.abs(got - ref).max() <= 1e-8 * np.abs(v0).max()
    assert theta > 0


def test_theta_nondecreasing_and_columns(tmp_path):
    cfg = small_cfg(tmp_path)
    res = run(cfg)
    th = [s.theta for s in res.snapshots]
    assert np.all(np.diff(th) > 0)
    with open(os.path.join(cfg.output_dir, "timeseries.csv")) as fh:
        header = fh.readline().strip().split(",")
    assert header == CSV_COLUMNS
    summary = json.load(open(os.path.join(cfg.output_dir, "summary.json")))
    assert summary["status"] == "completed" and summary["steps"] == 50
    assert os.path.exists(os.path.join(cfg.output_dir, "config.resolved"))
    assert os.path.exists(os.path.join(cfg.output_dir, "final.ckpt"))


def test_rk4_order_on_small_grid():
    cfg = build_config({"grid.N": "16", "init.epsilon": "0.05"})
    from oldroyd_spectral.integrate import initial_state

    s0 = initial_state(cfg)
    tr = RadiusTracker(0.25, 10.0)
    ladder = build_ladder(cfg.grid)

    def integrate(dt, T=1.0):
        s, th = s0, 0.0
        for _ in range(int(round(T / dt))):
            s, th = step_rk4(s, th, dt, cfg.model, tr, ladder)
        return s.flat(), th

    y1, _ = integrate(0.1)
    y2, _ = integrate(0.05)
    y3, _ = integrate(0.025)
    ratio = np.abs(y1 - y2).max() / np.abs(y2 - y3).max()
    assert 12 <= ratio <= 20


def test_monitor_trip_is_graceful(tmp_path):
    cfg = small_cfg(tmp_path, init__epsilon=2.0, integration__T=5.0)
    res = run(cfg)
    assert res.exit_code == EXIT_MONITOR
    assert np.all(np.isfinite(res.final_state.flat()))
    assert os.path.exists(os.path.join(cfg.output_dir, "last_good.ckpt"))


def test_norm_monitor(tmp_path):
    cfg = small_cfg(tmp_path, monitor__norm_bound=1e-9)
    res = run(cfg)
    assert res.exit_code == EXIT_MONITOR and "norm" in res.message


def test_numerical_failure_exit(tmp_path):
    cfg = small_cfg(tmp_path, init__epsilon=400.0, monitor__theta="false",
                    monitor__norm_bound="none", integration__T=2.0)
    res = run(cfg)
    assert res.exit_code == EXIT_NUMERICAL
    assert os.path.exists(os.path.join(cfg.output_dir, "last_good.ckpt"))


def test_determinism(tmp_path):
    a = small_cfg(tmp_path / "a")
    b = small_cfg(tmp_path / "b")
    run(a)
    run(b)
    read = lambda c: open(os.path.join(c.output_dir, "timeseries.csv"), "rb").read()
    assert read(a) == read(b)


def test_resume_matches_uninterrupted(tmp_path):
    full = small_cfg(tmp_path / "full", output__checkpoint_every=20)
    ref = run(full)
    res = resume_run(os.path.join(full.output_dir, "checkpoint_00000020.ckpt"),
                     {"output.dir": str(tmp_path / "resumed")})
    assert res.exit_code == EXIT_OK
    assert np.abs(res.final_state.flat() - ref.final_state.flat()).max() <= 1e-13
    assert res.final_theta == ref.final_theta
    assert res.summary["ledger"]["c_emp"] == pytest.approx(ref.summary["ledger"]["c_emp"], rel=1e-12)
