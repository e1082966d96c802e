"""Property suite behind ``verify``: Bernstein, Bony, cancellation, equivalence, product ensembles."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .diagnostics import HIGH, LOW, relative_cancellation_residual, shell_energy
from .littlewood_paley import build_ladder
from .operators import l2_norm, lambda_power, pointwise_product
from .paraproduct import bony_split, piecewise_estimates_report, product_estimate_ratio
from .spectral import SCALAR, GridSpec, SpectralField, SpectralState, component_shape

RTOL = 1e-12
BOX_RADIUS = 12


@dataclass
class CheckResult:
    name: str
    passed: bool
    worst: float
    detail: str

    def line(self):
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name}: {self.detail}"


def random_analytic_coeffs(grid, ncomp, rng, decay=1.0, radius=BOX_RADIUS):
    """Hermitian, mean-free coefficients c(m) ~ exp(-decay |xi|) on a fixed integer box.

    The draw happens on the box |m_i| <= radius regardless of N, so two grids
    see the same function up to what their 2/3 band resolves.
    """
    R = int(radius)
    n = grid.n
    z = rng.standard_normal((ncomp,) + (2 * R + 1,) * n) + 1j * rng.standard_normal((ncomp,) + (2 * R + 1,) * n)
    flip = (slice(None),) + (slice(None, None, -1),) * n
    z = 0.5 * (z + np.conj(z[flip]))
    m = np.arange(-R, R + 1)
    mesh = np.meshgrid(*([m] * n), indexing="ij")
    kmag = grid.k_unit * np.sqrt(sum(x.astype(float) ** 2 for x in mesh))
    box = z * np.exp(-decay * kmag) * (kmag <= radius * grid.k_unit)
    box[(slice(None),) + (R,) * n] = 0.0
    keep = m[np.abs(m) <= min(grid.dealias_index, R)]
    out = np.zeros((ncomp,) + grid.shape, complex)
    src = (slice(None),) + np.ix_(*([keep + R] * n))
    dst = (slice(None),) + np.ix_(*([keep % grid.N] * n))
    out[dst] = box[src]
    return out


def random_analytic_field(grid, rng, rank=SCALAR, decay=1.0, radius=BOX_RADIUS):
    lead = component_shape(grid, rank)
    c = random_analytic_coeffs(grid, int(np.prod(lead)), rng, decay, radius)
    return SpectralField(grid, c.reshape(lead + grid.shape), rank)


def random_state(grid, rng, decay=1.0, radius=BOX_RADIUS):
    c = random_analytic_coeffs(grid, 1 + grid.n + grid.n_sym, rng, decay, radius)
    return SpectralState.from_flat(grid, c)


def check_bernstein(grids=((2, 32), (3, 16)), samples=100, seed=1):
    """(3/4) 2^j |D_j f| <= |Lambda D_j f| <= (8/3) 2^j |D_j f| on every shell."""
    violations = 0
    worst = 0.0
    checked = 0
    for n, N in grids:
        grid = GridSpec(n, N)
        ladder = build_ladder(grid)
        rng = np.random.default_rng(seed)
        for _ in range(samples):
            f = random_analytic_field(grid, rng)
            for j in ladder.js:
                blk = f.like(f.coeffs * ladder.phi_mask(j))
                base = l2_norm(blk)
                if base == 0:
                    continue
                r = l2_norm(lambda_power(blk, 1)) / (2.0**j * base)
                checked += 1
                worst = max(worst, 0.75 - r, r - 8 / 3)
                if r < 0.75 * (1 - RTOL) or r > 8 / 3 * (1 + RTOL):
                    violations += 1
    return CheckResult("bernstein", violations == 0, worst,
                       f"{violations} violations over {checked} shell blocks")


def check_bony(grids=((2, 16), (2, 32)), samples=100, seed=2, tol=1e-12):
    worst = 0.0
    for n, N in grids:
        grid = GridSpec(n, N)
        ladder = build_ladder(grid)
        rng = np.random.default_rng(seed)
        for _ in range(samples):
            f = random_analytic_field(grid, rng)
            g = random_analytic_field(grid, rng)
            total = bony_split(f, g, ladder).total()
            ref = pointwise_product(f, g)
            worst = max(worst, l2_norm(total - ref) / l2_norm(ref))
    return CheckResult("bony identity", worst <= tol, worst, f"max relative error {worst:.3e} (tol {tol:g})")


def check_cancellation(grids=((2, 32), (3, 16)), samples=100, seed=3, tol=1e-12):
    worst = 0.0
    for n, N in grids:
        grid = GridSpec(n, N)
        ladder = build_ladder(grid)
        rng = np.random.default_rng(seed)
        for i in range(samples):
            st = random_state(grid, rng)
            worst = max(worst, relative_cancellation_residual(st))
            k = int(ladder.js[i % len(ladder.js)])
            worst = max(worst, relative_cancellation_residual(st, k, ladder))
    return CheckResult("cancellation identity", worst <= tol, worst, f"max relative residual {worst:.3e} (tol {tol:g})")


def check_equivalence(grids=((2, 32), (3, 16)), samples=100, seed=4, k0=3):
    """1/2 E_k^2 <= E~_k^2 <= 3 E_k^2 in both regimes (k0 in both)."""
    violations = 0
    checked = 0
    worst = np.inf
    for n, N in grids:
        grid = GridSpec(n, N)
        ladder = build_ladder(grid, k0)
        rng = np.random.default_rng(seed)
        for _ in range(samples):
            # Vary the spectral slope so low and high shells both carry energy.
            st = random_state(grid, rng, decay=rng.uniform(0.05, 1.0))
            for k in ladder.js:
                regimes = [r for r, ok in ((LOW, k <= k0), (HIGH, k >= k0)) if ok]
                for regime in regimes:
                    e = shell_energy(st, int(k), regime, ladder)
                    p2 = e.E_plain**2
                    if p2 == 0:
                        continue
                    checked += 1
                    q = e.E_tilde_sq / p2
                    worst = min(worst, q - 0.5, 3 - q)
                    if q < 0.5 * (1 - RTOL) or q > 3 * (1 + RTOL):
                        violations += 1
    return CheckResult("energy equivalence", violations == 0, float(worst),
                       f"{violations} violations over {checked} shell evaluations")


def product_constants(grid, samples=100, seed=5):
    """Empirical constants (max ratio over the ensemble) for each product estimate."""
    n = grid.n
    ladder = build_ladder(grid)
    rng = np.random.default_rng(seed)
    s1, s2 = n / 2, -0.5
    out = {"P(s=0)": 0.0, f"P(s={n / 2:g})": 0.0, "A1": 0.0, "A2": 0.0, "A3": 0.0}
    for _ in range(samples):
        f = random_analytic_field(grid, rng)
        g = random_analytic_field(grid, rng)
        out["P(s=0)"] = max(out["P(s=0)"], product_estimate_ratio(f, g, 0.0, ladder))
        out[f"P(s={n / 2:g})"] = max(out[f"P(s={n / 2:g})"], product_estimate_ratio(f, g, n / 2, ladder))
        for row in piecewise_estimates_report(f, g, s1, s2, ladder):
            if row["valid"]:
                out[row["estimate"]] = max(out[row["estimate"]], row["ratio"])
    return out


def check_product_stability(n=2, coarse=16, fine=32, samples=100, seed=5, tol=0.25):
    c16 = product_constants(GridSpec(n, coarse), samples, seed)
    c32 = product_constants(GridSpec(n, fine), samples, seed)
    changes = {k: abs(c32[k] - c16[k]) / c16[k] for k in c16}
    worst = max(changes.values())
    detail = ", ".join(f"{k}: {c16[k]:.3g}->{c32[k]:.3g}" for k in c16)
    return CheckResult(f"product constants n={n}", worst < tol, worst,
                       f"max relative change {worst:.3f} (tol {tol:g}); {detail}")


def run_suite(samples=100):
    return [
        check_bernstein(samples=samples),
        check_bony(samples=samples),
        check_cancellation(samples=samples),
        check_equivalence(samples=samples),
        check_product_stability(2, samples=samples),
        check_product_stability(3, samples=samples),
    ]
