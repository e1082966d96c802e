"""Dyadic energy functionals, the cancellation identity and the a priori ledger."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .littlewood_paley import HybridNormSpec, besov_norm, build_ladder, state_shell_norms
from .model import _nonlinear
from .operators import deformation, div_tensor, divergence, gradient, inner, lambda_power
from .paraproduct import mean_free
from .spectral import SYM, SpectralState
from .weight import weighted_state

HIGH = "high"
LOW = "low"


@dataclass
class ShellEnergy:
    k: int
    E_tilde: float
    E_plain: float
    regime: str
    E_tilde_sq: float = 0.0


def _localize(state, k, ladder):
    m = ladder.phi_mask(k)
    return state.map(lambda f: f.like(f.coeffs * m))


def shell_energy(state_weighted, k, regime, ladder=None):
    """E~_k and E_k of the weighted state on shell k.

    high (k >= k0): 2|a|^2 + 2|u|^2 + |tau|^2 + (L^-1 grad a | L^-1 u) + (L^-1 u | L^-1 div tau)
    low  (k <= k0): 2|a|^2 + 2|u|^2 + |tau|^2 + 3/8 2^-k [(grad a | u) + (u | div tau)]
    """
    ladder = ladder if ladder is not None else build_ladder(state_weighted.grid)
    if regime == HIGH and k < ladder.k0 or regime == LOW and k > ladder.k0:
        raise ValueError(f"shell {k} is outside the {regime} regime (k0 = {ladder.k0})")
    if regime not in (HIGH, LOW):
        raise ValueError(f"unknown regime {regime!r}")
    loc = _localize(state_weighted, k, ladder)
    a, u, tau = loc.a, loc.u, loc.tau
    na, nu, nt = inner(a, a), inner(u, u), inner(tau, tau)
    grad_a = gradient(a)
    div_t = div_tensor(tau)
    if regime == HIGH:
        cross = inner(lambda_power(grad_a, -1), lambda_power(u, -1))
        cross += inner(lambda_power(u, -1), lambda_power(div_t, -1))
    else:
        cross = 3.0 / 8.0 * 2.0**-k * (inner(grad_a, u) + inner(u, div_t))
    e2 = 2 * na + 2 * nu + nt + cross
    plain = np.sqrt(na + nu + nt)
    return ShellEnergy(int(k), float(np.sqrt(max(e2, 0.0))), float(plain), regime, float(e2))


def shell_energy_table(state_weighted, ladder=None):
    """Shell energies over the whole ladder, low regime for k <= k0."""
    ladder = ladder if ladder is not None else build_ladder(state_weighted.grid)
    return [
        shell_energy(state_weighted, int(k), LOW if k <= ladder.k0 else HIGH, ladder)
        for k in ladder.js
    ]


def cancellation_terms(state, k=None, ladder=None):
    """The four terms 2(a|div u), 2(grad a|u), -2(div tau|u), -2(tau|D u).

    ``state`` is a SpectralState or an (a, u, tau) tuple whose tau may be a
    full (possibly non-symmetric) matrix field.
    """
    if isinstance(state, SpectralState):
        a, u, tau = state.a, state.u, state.tau
    else:
        a, u, tau = state
    if k is not None:
        ladder = ladder if ladder is not None else build_ladder(a.grid)
        m = ladder.phi_mask(k)
        a, u, tau = (f.like(f.coeffs * m) for f in (a, u, tau))
    tau_full = tau.full_matrix() if tau.rank == SYM else tau
    return np.array([
        2 * inner(a, divergence(u)),
        2 * inner(gradient(a), u),
        -2 * inner(div_tensor(tau_full), u),
        -2 * inner(tau_full, deformation(u)),
    ])


def cancellation_residual(state, k=None, ladder=None):
    """|2(a|div u) + 2(grad a|u) - 2(div tau|u) - 2(tau|D u)|."""
    return float(abs(np.sum(cancellation_terms(state, k, ladder))))


def relative_cancellation_residual(state, k=None, ladder=None):
    """Residual divided by the sum of the absolute values of its four terms."""
    terms = cancellation_terms(state, k, ladder)
    scale = np.sum(np.abs(terms))
    return float(abs(np.sum(terms)) / scale) if scale > 0 else 0.0


@dataclass
class EnergyRow:
    t: float
    theta: float
    radius: float
    hybrid: float        # ||w(t)||_{B^{n/2-1, n/2}}
    besov_n2: float      # ||w(t)||_{B^{n/2}} = d theta/dt
    besov_hi: float      # ||w(t)||_{B^{n/2, n/2+1}}
    int_theta: float     # lambda * int theta' ||w||_{B^{n/2, n/2+1}}
    int_besov: float     # int ||w||_{B^{n/2}}
    int_quadratic: float  # int ||w||_{B^{n/2}} ||w||_{B^{n/2, n/2+1}}
    lhs: float
    rhs: float
    ratio: float


class EnergyLedger:
    """Running a priori bookkeeping over snapshots (trapezoid in time)."""

    def __init__(self, grid, lam, k0=3, initial_norm=None):
        self.grid = grid
        self.lam = float(lam)
        self.ladder = build_ladder(grid, k0)
        n = grid.n
        self.low_spec = HybridNormSpec(n / 2 - 1, n / 2, k0)
        self.high_spec = HybridNormSpec(n / 2, n / 2 + 1, k0)
        self.initial_norm = initial_norm
        self.rows = []

    def norms(self, state, tracker):
        w = weighted_state(state, tracker)
        shells = state_shell_norms(w, self.ladder)
        js = self.ladder.js
        low = js <= self.ladder.k0
        n = self.grid.n
        hybrid = float(np.sum(np.where(low, 2.0 ** ((n / 2 - 1) * js), 2.0 ** (n / 2 * js)) * shells))
        bn2 = float(np.sum(2.0 ** (n / 2 * js) * shells))
        bhi = float(np.sum(np.where(low, 2.0 ** (n / 2 * js), 2.0 ** ((n / 2 + 1) * js)) * shells))
        return hybrid, bn2, bhi

    def snapshot(self, t, state, tracker):
        hybrid, bn2, bhi = self.norms(state, tracker)
        if self.initial_norm is None:
            self.initial_norm = hybrid
        if self.rows:
            p = self.rows[-1]
            h = t - p.t
            int_theta = p.int_theta + self.lam * 0.5 * h * (p.besov_n2 * p.besov_hi + bn2 * bhi)
            int_besov = p.int_besov + 0.5 * h * (p.besov_n2 + bn2)
            int_quad = p.int_quadratic + 0.5 * h * (p.besov_n2 * p.besov_hi + bn2 * bhi)
        else:
            int_theta = int_besov = int_quad = 0.0
        lhs = hybrid + int_theta + int_besov
        rhs = self.initial_norm + int_quad
        row = EnergyRow(float(t), tracker.theta, tracker.radius, hybrid, bn2, bhi,
                        int_theta, int_besov, int_quad, lhs, rhs, lhs / rhs if rhs > 0 else 0.0)
        self.rows.append(row)
        return row

    def state_dict(self):
        return {"initial_norm": self.initial_norm, "last": asdict(self.rows[-1]) if self.rows else None}

    def restore(self, d):
        self.initial_norm = d["initial_norm"]
        if d.get("last"):
            self.rows = [EnergyRow(**d["last"])]


def hybrid_energy_snapshot(state, tracker, t=0.0, ledger=None, lam=None):
    """One EnergyRow; pass the running ``ledger`` to accumulate time integrals."""
    if ledger is None:
        ledger = EnergyLedger(state.grid, lam if lam is not None else tracker.lam)
    return ledger.snapshot(t, state, tracker)


@dataclass
class AprioriLedger:
    times: np.ndarray
    lhs: np.ndarray
    rhs: np.ndarray
    ratio: np.ndarray
    c_emp: float
    lam: float
    lambda_ok: bool

    def summary(self):
        return {
            "c_emp": self.c_emp,
            "lambda": self.lam,
            "lambda_ge_2c_emp": self.lambda_ok,
            "final_lhs": float(self.lhs[-1]),
            "final_rhs": float(self.rhs[-1]),
            "max_quadratic_share": float(np.max(self.rhs - self.rhs[0])) if len(self.rhs) else 0.0,
        }


def apriori_ledger(rows, lam):
    """Fitted constant C_emp = max_t LHS/RHS from EnergyRows."""
    if not rows:
        raise ValueError("empty trajectory")
    times = np.array([r.t for r in rows])
    lhs = np.array([r.lhs for r in rows])
    rhs = np.array([r.rhs for r in rows])
    ratio = np.array([r.ratio for r in rows])
    c_emp = float(ratio.max())
    return AprioriLedger(times, lhs, rhs, ratio, c_emp, float(lam), bool(lam >= 2 * c_emp))


def nonlinear_bound_check(state, tracker, s, gamma=1.4, b=0.0, eps0=0.5, ladder=None):
    """Ratio ||(F,G,H)_Phi||_{B^s} / (||w||_{B^{n/2}} ||w||_{B^{s+1}}), w the weighted state."""
    grid = state.grid
    n = grid.n
    if not (-n / 2 < s <= n / 2):
        raise ValueError(f"s must lie in (-n/2, n/2], got {s}")
    ladder = ladder if ladder is not None else build_ladder(grid)
    f_hat, g_hat, h_hat, _ = _nonlinear(state, gamma, b, grid.dealias_mask)
    rhs_state = SpectralState.from_flat(grid, np.concatenate([f_hat[None], g_hat, h_hat]))
    rhs_w = weighted_state(rhs_state, tracker).map(mean_free)
    w = weighted_state(state, tracker)
    lhs = besov_norm(rhs_w, s, ladder)
    den = besov_norm(w, n / 2, ladder) * besov_norm(w, s + 1, ladder)
    a_norm = besov_norm(state.a, n / 2, ladder)
    return {
        "s": s,
        "lhs": lhs,
        "rhs": den,
        "ratio": lhs / den if den > 0 else 0.0,
        "a_besov": a_norm,
        "small": a_norm <= eps0 < 1,
    }
