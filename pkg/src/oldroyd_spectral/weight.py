"""Analytic weight exp(r |xi|) and the analyticity-radius tracker."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .littlewood_paley import besov_norm, build_ladder

OVERFLOW_EXPONENT = 60.0


class OverflowGuardError(ValueError):
    pass


@dataclass(frozen=True)
class RadiusTracker:
    """theta(t) together with the constants lambda0 and lambda.

    The current analyticity radius is 2*lambda0 - lambda*theta; an accepted
    run keeps it >= lambda0, i.e. theta <= lambda0/lambda.
    """

    lambda0: float
    lam: float
    theta: float = 0.0

    def __post_init__(self):
        if self.lambda0 <= 0 or self.lam <= 0:
            raise ValueError("lambda0 and lambda must be positive")

    @property
    def radius(self):
        return 2.0 * self.lambda0 - self.lam * self.theta

    @property
    def theta_limit(self):
        return self.lambda0 / self.lam

    def with_theta(self, theta):
        return replace(self, theta=float(theta))


def check_overflow(grid, r):
    if abs(r) * grid.kmax > OVERFLOW_EXPONENT:
        raise OverflowGuardError(
            f"weight exponent {abs(r) * grid.kmax:.3g} exceeds {OVERFLOW_EXPONENT} "
            f"(radius {r}, max |xi| {grid.kmax:.4g})"
        )


def max_lambda0(grid):
    """Largest lambda0 allowed by the overflow guard at t = 0."""
    return OVERFLOW_EXPONENT / (2.0 * grid.kmax)


def apply_weight(f, r):
    """f -> F^-1(exp(r|xi|) f_hat)."""
    check_overflow(f.grid, r)
    return f.like(f.coeffs * np.exp(r * f.grid.kmag))


def weighted_state(state, tracker):
    r = tracker.radius
    if r < 0:
        raise ValueError(f"negative analyticity radius {r}")
    check_overflow(state.grid, r)
    w = np.exp(r * state.grid.kmag)
    return state.map(lambda f: f.like(f.coeffs * w))


def radius_rhs(state, tracker, ladder=None):
    """d theta/dt = ||(a_Phi, u_Phi, tau_Phi)||_{B^{n/2}_{2,1}} at the tracker's theta."""
    grid = state.grid
    ladder = ladder if ladder is not None else build_ladder(grid)
    return besov_norm(weighted_state(state, tracker), grid.n / 2, ladder)
