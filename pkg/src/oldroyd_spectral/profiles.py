"""Initial data profiles, normalized by their weighted hybrid norm."""

from __future__ import annotations

import itertools

import numpy as np

from .littlewood_paley import HybridNormSpec, build_ladder, hybrid_norm
from .operators import annulus_mask
from .spectral import SCALAR, SYM, VECTOR, SpectralState, forward_transform, sym_pairs
from .weight import RadiusTracker, weighted_state

PROFILES = ("single-mode", "random-band", "taylor-green-like")
BAND_RADIUS = 4.0


def _single_mode(grid):
    x = grid.coordinates
    n = grid.n
    a = np.cos(x[0])
    u = np.stack([np.sin(x[(i + 1) % n]) for i in range(n)])
    tau = []
    for i, j in sym_pairs(n):
        tau.append(np.cos(x[i]) if i == j else np.sin(x[i] + x[j]))
    return a, u, np.stack(tau)


def _taylor_green(grid):
    x = grid.coordinates
    n = grid.n
    if n == 2:
        u = np.stack([np.sin(x[0]) * np.cos(x[1]), -np.cos(x[0]) * np.sin(x[1])])
    else:
        c = np.cos(x[2])
        u = np.stack([np.sin(x[0]) * np.cos(x[1]) * c, -np.cos(x[0]) * np.sin(x[1]) * c, np.zeros(grid.shape)])
    return np.zeros(grid.shape), u, np.zeros((grid.n_sym,) + grid.shape)


def band_lattice(n, radius, k_unit):
    """Integer wavenumbers with 0 < |xi| <= radius, one per +/- pair, fixed order."""
    mmax = int(np.floor(radius / k_unit))
    out = []
    for m in itertools.product(range(-mmax, mmax + 1), repeat=n):
        if np.linalg.norm(np.array(m) * k_unit) > radius or not any(m):
            continue
        first = next(v for v in m if v != 0)
        if first > 0:
            out.append(m)
    return out


def random_band_coefficients(grid, ncomp, rng, radius=BAND_RADIUS, decay=1.0):
    """Hermitian coefficients on |xi| <= radius, drawn independently of N.

    Amplitudes are complex normals times exp(-decay |xi|); the draw order
    depends only on (n, radius, L), so every grid resolving the band sees the
    same function.
    """
    coeffs = np.zeros((ncomp,) + grid.shape, complex)
    for m in band_lattice(grid.n, radius, grid.k_unit):
        amp = np.exp(-decay * np.linalg.norm(m) * grid.k_unit)
        z = (rng.standard_normal(ncomp) + 1j * rng.standard_normal(ncomp)) * amp
        if max(abs(v) for v in m) >= grid.N // 2:
            continue
        coeffs[(slice(None),) + grid.index_of(m)] = z
        coeffs[(slice(None),) + grid.index_of([-v for v in m])] = np.conj(z)
    return coeffs


def _random_band(grid, seed):
    rng = np.random.default_rng(seed)
    c = random_band_coefficients(grid, 1 + grid.n + grid.n_sym, rng)
    return c


def raw_profile(name, grid, seed=0):
    if name == "single-mode":
        a, u, tau = _single_mode(grid)
    elif name == "taylor-green-like":
        a, u, tau = _taylor_green(grid)
    elif name == "random-band":
        return SpectralState.from_flat(grid, _random_band(grid, seed))
    else:
        raise ValueError(f"unknown profile {name!r}; choose from {PROFILES}")
    return SpectralState(
        forward_transform(a, grid, SCALAR),
        forward_transform(u, grid, VECTOR),
        forward_transform(tau, grid, SYM),
    )


def initial_norm(state, lambda0, k0=3):
    """||e^{2 lambda0 Lambda}(a, u, tau)||_{B^{n/2-1, n/2}}."""
    grid = state.grid
    w = weighted_state(state, RadiusTracker(lambda0, 1.0, 0.0))
    return hybrid_norm(w, HybridNormSpec(grid.n / 2 - 1, grid.n / 2, k0), build_ladder(grid, k0))


def init_profile(name, grid, epsilon, seed=0, lambda0=0.25, cutoff=None, k0=3):
    """Profile scaled so that its weighted initial hybrid norm equals epsilon*lambda0.

    ``cutoff`` applies the Friedrichs projector before normalizing.
    """
    if epsilon < 0:
        raise ValueError("epsilon must be non-negative")
    state = raw_profile(name, grid, seed)
    if cutoff is not None:
        m = annulus_mask(grid, cutoff)
        state = state.map(lambda f: f.like(f.coeffs * m))
    # Snap round-off in the zero mode so the state is exactly mean-free.
    state = state.map(_zero_mean)
    if epsilon == 0:
        return SpectralState.zeros(grid)
    norm = initial_norm(state, lambda0, k0)
    if norm == 0:
        raise ValueError(f"profile {name!r} vanishes on this grid")
    return state * (epsilon * lambda0 / norm)


def _zero_mean(f):
    c = f.coeffs.copy()
    c[(...,) + (0,) * f.grid.n] = 0.0
    return f.like(c)
