"""Fourier multipliers, products and projectors acting on :class:`SpectralField`.

Velocity-gradient convention: ``(grad u)[i, j] = d_j u_i``, so that
``deformation(u) + vorticity_tensor(u) == gradient(u)``.
"""

from __future__ import annotations

import numpy as np

from .spectral import (
    MATRIX,
    SCALAR,
    SYM,
    VECTOR,
    SpectralField,
    check_grid,
    fft,
    ifft,
    pack_sym,
    sym_weights,
)

MEAN_TOL = 1e-12


def gradient(f):
    """Scalar -> vector, vector -> matrix with entries d_j f_i."""
    ik = 1j * f.grid.wavevector
    if f.rank == SCALAR:
        return f.like(ik * f.coeffs, VECTOR)
    if f.rank == VECTOR:
        return f.like(f.coeffs[:, None] * ik[None, :], MATRIX)
    raise ValueError(f"gradient not defined for rank {f.rank!r}")


def divergence(u):
    if u.rank != VECTOR:
        raise ValueError("divergence needs a vector field")
    ik = 1j * u.grid.wavevector
    return u.like(np.sum(ik * u.coeffs, axis=0), SCALAR)


def div_tensor(tau):
    """Row divergence (div tau)_i = sum_j d_j tau_ij."""
    t = tau.full_matrix().coeffs
    ik = 1j * tau.grid.wavevector
    return tau.like(np.sum(t * ik[None, :], axis=1), VECTOR)


def lambda_power(f, s):
    """Apply Lambda^s = (-Delta)^(s/2): multiply by |xi|^s, zero mode sent to 0."""
    grid = f.grid
    if s < 0:
        scale = max(1.0, float(np.abs(f.coeffs).max()))
        if np.abs(f.mean).max() > MEAN_TOL * scale:
            raise ValueError("Lambda^s with s < 0 needs a mean-free field")
        symbol = grid.kmag_inv ** (-s)
    else:
        symbol = grid.kmag**s
        symbol = np.where(grid.kmag > 0, symbol, 0.0)
    return f.like(f.coeffs * symbol)


def laplacian(f):
    return f.like(-(f.grid.kmag**2) * f.coeffs)


def deformation(u):
    g = gradient(u).coeffs
    d = 0.5 * (g + np.swapaxes(g, 0, 1))
    return u.like(d, MATRIX)


def vorticity_tensor(u):
    g = gradient(u).coeffs
    w = 0.5 * (g - np.swapaxes(g, 0, 1))
    return u.like(w, MATRIX)


def symmetric_part(m):
    """Pack the symmetric part of a matrix field into sym storage."""
    c = m.coeffs
    return m.like(pack_sym(0.5 * (c + np.swapaxes(c, 0, 1)), m.grid.n), SYM)


def pointwise_product(f, g):
    """Dealiased product f*g.

    Both factors are truncated to the 2/3-rule box, multiplied in physical
    space, and the result is truncated again; for such inputs this equals the
    exact convolution restricted to retained modes.  A scalar factor
    broadcasts over the components of the other.
    """
    grid = check_grid(f, g)
    if f.rank != SCALAR and g.rank != SCALAR:
        raise ValueError("pointwise_product needs at least one scalar factor")
    mask = grid.dealias_mask
    pf = ifft(f.coeffs * mask, grid)
    pg = ifft(g.coeffs * mask, grid)
    rank = g.rank if f.rank == SCALAR else f.rank
    return SpectralField(grid, fft(pf * pg, grid) * mask, rank)


def annulus_mask(grid, k):
    if k < 1:
        raise ValueError(f"Friedrichs cutoff must be >= 1, got {k}")
    r = grid.kmag
    return (r >= (1.0 / k) * (1 - 1e-12)) & (r <= k * (1 + 1e-12))


def friedrichs_project(f, k):
    """Keep only modes with 1/k <= |xi| <= k."""
    return f.like(f.coeffs * annulus_mask(f.grid, k))


def inner(f, g):
    """Real L^2(box) inner product (f|g); sym fields use Frobenius weights."""
    check_grid(f, g)
    grid = f.grid
    prod = f.coeffs * np.conj(g.coeffs)
    if f.rank == SYM and g.rank == SYM:
        prod = prod * sym_weights(grid.n).reshape((-1,) + (1,) * grid.n)
    elif f.rank != g.rank:
        raise ValueError(f"inner product of {f.rank} and {g.rank}")
    return float(grid.volume * np.sum(prod).real)


def l2_norm(f):
    return np.sqrt(max(inner(f, f), 0.0))


def physical_l2_norm(samples, grid):
    """Quadrature L^2 norm of physical samples (exact for trig polynomials)."""
    return float(np.sqrt(np.sum(samples**2) * (grid.L / grid.N) ** grid.n))
