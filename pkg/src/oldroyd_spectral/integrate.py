"""Explicit RK4 for the augmented system (state, theta) and the run loop."""

from __future__ import annotations

import csv
import json
import logging
import os
from dataclasses import dataclass, field

import numpy as np

from .checkpoint import read_checkpoint, write_checkpoint
from .config import build_config, parse_text
from .diagnostics import EnergyLedger, apriori_ledger, shell_energy_table
from .linear import damping_sweep, log_samples, write_sweep_csv
from .littlewood_paley import HybridNormSpec, build_ladder, hybrid_norm
from .model import VacuumError, full_rhs
from .profiles import init_profile
from .spectral import SpectralState
from .weight import RadiusTracker, radius_rhs, weighted_state

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_MONITOR = 2
EXIT_NUMERICAL = 3
EXIT_CONFIG = 4

CSV_COLUMNS = [
    "t", "theta", "radius", "hybrid_norm", "besov_n2", "ledger_lhs", "ledger_rhs",
    "min_one_plus_a", "tau_asymmetry", "mean_drift",
]


class NumericalFailure(FloatingPointError):
    pass


def augmented_rhs(y, theta, grid, params, tracker, ladder, info=None):
    """(d/dt coefficients, d theta/dt) for flat coefficients ``y``."""
    state = SpectralState.from_flat(grid, y)
    d = full_rhs(state, params, info).flat()
    q = radius_rhs(state, tracker.with_theta(theta), ladder)
    return d, q


def step_rk4(state, theta, dt, params, tracker, ladder=None):
    """One classical RK4 step of (state, theta); theta' is the weighted B^{n/2} norm."""
    grid = state.grid
    ladder = ladder if ladder is not None else build_ladder(grid)
    y = state.flat()
    k1, q1 = augmented_rhs(y, theta, grid, params, tracker, ladder)
    k2, q2 = augmented_rhs(y + 0.5 * dt * k1, theta + 0.5 * dt * q1, grid, params, tracker, ladder)
    k3, q3 = augmented_rhs(y + 0.5 * dt * k2, theta + 0.5 * dt * q2, grid, params, tracker, ladder)
    k4, q4 = augmented_rhs(y + dt * k3, theta + dt * q3, grid, params, tracker, ladder)
    y_new = y + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    theta_new = theta + (dt / 6.0) * (q1 + 2 * q2 + 2 * q3 + q4)
    if not (np.all(np.isfinite(y_new)) and np.isfinite(theta_new)):
        raise NumericalFailure("non-finite value after RK4 step")
    return SpectralState.from_flat(grid, y_new), float(theta_new)


@dataclass
class Snapshot:
    t: float
    checksum: str
    theta: float
    row: dict
    state: SpectralState | None = None


@dataclass
class RunResult:
    status: str
    exit_code: int
    message: str
    snapshots: list
    final_state: SpectralState
    final_theta: float
    final_t: float
    summary: dict = field(default_factory=dict)

    @property
    def ledger_rows(self):
        return [s.row for s in self.snapshots]


def initial_state(cfg):
    grid, params = cfg.grid, cfg.model
    state = init_profile(
        cfg["init.profile"], grid, cfg["init.epsilon"], cfg["init.seed"],
        cfg["weights.lambda0"], params.cutoff(grid), cfg["diagnostics.k0"],
    )
    if params.cutoff(grid) is None:
        state = state.map(lambda f: f.like(f.coeffs * grid.dealias_mask))
    return state


class _Writer:
    def __init__(self, outdir, shells):
        os.makedirs(outdir, exist_ok=True)
        self.outdir = outdir
        self.fh = open(os.path.join(outdir, "timeseries.csv"), "w", newline="")
        self.csv = csv.writer(self.fh, lineterminator="\n")
        self.csv.writerow(CSV_COLUMNS)
        self.shell_fh = None
        if shells:
            self.shell_fh = open(os.path.join(outdir, "shells.csv"), "w", newline="")
            self.shell_csv = csv.writer(self.shell_fh, lineterminator="\n")
            self.shell_csv.writerow(["t", "k", "regime", "E_tilde", "E_plain"])

    def row(self, values):
        self.csv.writerow([repr(float(values[c])) for c in CSV_COLUMNS])

    def shells(self, t, table):
        if self.shell_fh is None:
            return
        for e in table:
            self.shell_csv.writerow([repr(float(t)), e.k, e.regime, repr(e.E_tilde), repr(e.E_plain)])

    def close(self):
        self.fh.close()
        if self.shell_fh:
            self.shell_fh.close()


def run(cfg, resume=None, keep_states=False, write=True):
    """Integrate to T or until a monitor trips; returns a RunResult.

    ``resume`` is a Checkpoint to continue from (its step and theta are used
    verbatim so the continuation is bit-identical to an uninterrupted run).
    """
    grid, params = cfg.grid, cfg.model
    lambda0, lam = cfg["weights.lambda0"], cfg["weights.lam"]
    k0 = cfg["diagnostics.k0"]
    ladder = build_ladder(grid, k0)
    tracker = RadiusTracker(lambda0, lam, 0.0)
    dt = cfg["integration.dt"]
    n_steps = cfg.n_steps
    every = cfg["integration.snapshot_every"]
    ckpt_every = cfg["output.checkpoint_every"]
    norm_bound = cfg.norm_bound()
    plain_spec = HybridNormSpec(grid.n / 2 - 1, grid.n / 2, k0)
    energy = EnergyLedger(grid, lam, k0)

    if resume is None:
        state, theta, step = initial_state(cfg), 0.0, 0
        mass0 = complex(state.a.mean)
    else:
        state, theta, step = resume.state, resume.theta, resume.step
        mass0 = complex(resume.meta["mass0"][0] + 1j * resume.meta["mass0"][1])
        energy.restore(resume.meta["ledger"])

    outdir = cfg.output_dir
    writer = _Writer(outdir, cfg["output.shells"]) if write else None
    if write:
        with open(os.path.join(outdir, "config.resolved"), "w") as fh:
            fh.write(cfg.to_text())
        if cfg["output.sweep"]:
            write_sweep_csv(damping_sweep(grid.n, log_samples(2**-6, 2**6, 64)),
                            os.path.join(outdir, "damping_sweep.csv"))

    snapshots = []
    stats = {"max_tau_asymmetry": 0.0, "max_mean_drift": 0.0, "min_one_plus_a": np.inf,
             "max_mean_removed": 0.0, "mean_warnings": 0}

    def meta():
        return {"config": cfg.to_text(), "mass0": [mass0.real, mass0.imag], "ledger": energy.state_dict()}

    def checkpoint(name, st, th, sp):
        if write:
            write_checkpoint(os.path.join(outdir, name), st, sp * dt, th, sp, meta())

    def snapshot(st, th, sp):
        t = sp * dt
        tr = tracker.with_theta(th)
        info = {}
        full_rhs(st, params, info)
        row = energy.snapshot(t, st, tr)
        drift = abs(complex(st.a.mean) - mass0)
        scale = float(np.sqrt(np.sum(np.abs(st.flat()) ** 2)))
        removed = max(info["mean_G"], info["mean_H"])
        if scale > 0 and removed > 1e-8 * scale:
            stats["mean_warnings"] += 1
            if stats["mean_warnings"] == 1:
                log.warning("zero mode of (G, H) exceeds 1e-8 of the state norm at t=%g", t)
        stats["max_tau_asymmetry"] = max(stats["max_tau_asymmetry"], info["tau_asymmetry"])
        stats["max_mean_drift"] = max(stats["max_mean_drift"], drift)
        stats["min_one_plus_a"] = min(stats["min_one_plus_a"], info["min_one_plus_a"])
        stats["max_mean_removed"] = max(stats["max_mean_removed"], removed / scale if scale else 0.0)
        values = {
            "t": t, "theta": th, "radius": tr.radius, "hybrid_norm": row.hybrid,
            "besov_n2": row.besov_n2, "ledger_lhs": row.lhs, "ledger_rhs": row.rhs,
            "min_one_plus_a": info["min_one_plus_a"], "tau_asymmetry": info["tau_asymmetry"],
            "mean_drift": drift,
        }
        if writer:
            writer.row(values)
            if cfg["output.shells"]:
                writer.shells(t, shell_energy_table(weighted_state(st, tr), ladder))
        snapshots.append(Snapshot(t, st.checksum(), th, row, st if keep_states else None))
        if norm_bound is not None and hybrid_norm(st, plain_spec, ladder) > norm_bound * (1 + 1e-12):
            raise _MonitorTrip(f"norm monitor tripped at t={t:g}")

    status, code, message = "completed", EXIT_OK, "reached final time"
    try:
        if resume is None:
            snapshot(state, theta, step)
        while step < n_steps:
            try:
                new_state, new_theta = step_rk4(state, theta, dt, params, tracker, ladder)
            except (VacuumError, NumericalFailure, FloatingPointError) as e:
                checkpoint("last_good.ckpt", state, theta, step)
                status, code, message = "numerical-failure", EXIT_NUMERICAL, str(e)
                break
            if new_theta < theta:
                raise AssertionError("theta decreased")
            state, theta, step = new_state, new_theta, step + 1
            if cfg["monitor.theta"] and theta > tracker.theta_limit:
                snapshot(state, theta, step)
                checkpoint("last_good.ckpt", state, theta, step)
                status, code = "monitor-trip", EXIT_MONITOR
                message = f"theta={theta:.6g} exceeded lambda0/lambda={tracker.theta_limit:.6g} at t={step * dt:g}"
                break
            if step % every == 0 or step == n_steps:
                snapshot(state, theta, step)
            if ckpt_every and step % ckpt_every == 0 and step < n_steps:
                checkpoint(f"checkpoint_{step:08d}.ckpt", state, theta, step)
    except _MonitorTrip as e:
        checkpoint("last_good.ckpt", state, theta, step)
        status, code, message = "monitor-trip", EXIT_MONITOR, str(e)
    except (VacuumError, FloatingPointError) as e:
        # raised while evaluating diagnostics on an accepted state
        checkpoint("last_good.ckpt", state, theta, step)
        status, code, message = "numerical-failure", EXIT_NUMERICAL, str(e)
    finally:
        if writer:
            writer.close()

    if code == EXIT_OK:
        checkpoint("final.ckpt", state, theta, step)
    summary = {
        "status": status,
        "exit_code": code,
        "message": message,
        "steps": step,
        "t_final": step * dt,
        "theta_final": theta,
        "theta_limit": tracker.theta_limit,
        "radius_final": tracker.with_theta(theta).radius,
        "ledger": apriori_ledger(energy.rows, lam).summary() if energy.rows else None,
        **{k: float(v) for k, v in stats.items()},
    }
    if write:
        with open(os.path.join(outdir, "summary.json"), "w") as fh:
            json.dump(summary, fh, indent=2, sort_keys=True)
    return RunResult(status, code, message, snapshots, state, theta, step * dt, summary)


class _MonitorTrip(Exception):
    pass


def resume_run(path, overrides=None, **kwargs):
    ck = read_checkpoint(path)
    raw = parse_text(ck.meta["config"])
    raw.update(overrides or {})
    cfg = build_config(raw)
    if (cfg.grid.n, cfg.grid.N) != (ck.state.grid.n, ck.state.grid.N):
        raise ValueError("checkpoint grid does not match its configuration")
    return run(cfg, resume=ck, **kwargs)
