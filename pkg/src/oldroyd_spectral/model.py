"""Right-hand side of the compressible Oldroyd-B system without retardation.

With a = rho - 1 and mu = nu = 1 the unknowns obey

    a_t   + div u             = F,   F = -div(a u)
    u_t   + grad a - div tau  = G,   G = -u.grad u + [1 - (1+a)^(gamma-2)] grad a - a/(1+a) div tau
    tau_t + tau - 2 D(u)      = H,   H = -u.grad tau - Q(tau, grad u)

with Q(tau, grad u) = tau W - W tau - b (D tau + tau D).  Quadratic products are
dealiased by the 2/3 rule; the composite factors are evaluated pointwise.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .operators import annulus_mask, div_tensor
from .spectral import (
    MATRIX,
    SCALAR,
    SYM,
    VECTOR,
    SpectralField,
    SpectralState,
    check_grid,
    fft,
    fft_real_batch,
    ifft,
    ifft_real_batch,
    pack_sym,
    sym_pairs,
)

log = logging.getLogger(__name__)

MEAN_WARN_RATIO = 1e-8


class VacuumError(ArithmeticError):
    """min(1 + a) <= 0 somewhere on the grid."""


@dataclass(frozen=True)
class ModelParams:
    gamma: float = 1.4
    b: float = 0.0
    k_friedrichs: float | str | None = "auto"
    linear_only: bool = False

    def __post_init__(self):
        if not self.gamma > 1:
            raise ValueError(f"gamma must exceed 1, got {self.gamma}")
        if abs(self.b) > 1:
            raise ValueError(f"b must lie in [-1, 1], got {self.b}")

    def cutoff(self, grid):
        """Friedrichs cutoff for ``grid``; None when the projector is off."""
        k = self.k_friedrichs
        if k is None or k == "off":
            return None
        if k == "auto":
            return grid.dealias_kmax
        return float(k)


def _masks_for(grid, params):
    """(mask for the linear part, mask for the nonlinear part)."""
    k = params.cutoff(grid)
    if k is None:
        return 1.0, grid.dealias_mask.astype(float)
    proj = annulus_mask(grid, k)
    return proj.astype(float), (proj & grid.dealias_mask).astype(float)


def q_bilinear(tau, grad_u, b):
    """Q(tau, grad u) = tau W - W tau - b (D tau + tau D), dealiased, packed."""
    grid = check_grid(tau, grad_u)
    if tau.rank == MATRIX:
        t = tau.coeffs
        asym = np.abs(t - np.swapaxes(t, 0, 1)).max()
        if asym > 1e-12 * max(1.0, np.abs(t).max()):
            raise ValueError("q_bilinear needs a symmetric tau")
        tau_full = t
    elif tau.rank == SYM:
        tau_full = tau.full_matrix().coeffs
    else:
        raise ValueError("tau must be a symmetric-matrix field")
    if grad_u.rank != MATRIX:
        raise ValueError("grad_u must be a matrix field")
    mask = grid.dealias_mask
    tp = ifft(tau_full * mask, grid)
    gp = ifft(grad_u.coeffs * mask, grid)
    q = _q_physical(tp, gp, b)
    return SpectralField(grid, pack_sym(fft(q, grid), grid.n) * mask, SYM)


def _unpack_index(n):
    """(n, n) array of packed positions, so packed[idx] is the full symmetric matrix."""
    idx = np.empty((n, n), int)
    for p, (i, j) in enumerate(sym_pairs(n)):
        idx[i, j] = idx[j, i] = p
    return idx


def _q_physical(tp, gp, b):
    """Pointwise Q from physical tau (n,n,...) and grad u (n,n,...)."""
    d = 0.5 * (gp + np.swapaxes(gp, 0, 1))
    w = 0.5 * (gp - np.swapaxes(gp, 0, 1))
    mm = lambda x, y: np.einsum("ik...,kj...->ij...", x, y)
    return mm(tp, w) - mm(w, tp) - b * (mm(d, tp) + mm(tp, d))


def linear_rhs(state):
    """(-div u, -grad a + div tau, -tau + 2 D(u))."""
    grid = state.grid
    ik = 1j * grid.wavevector
    a, u = state.a.coeffs, state.u.coeffs
    da = -np.sum(ik * u, axis=0)
    du = -ik * a + div_tensor(state.tau).coeffs
    dtau = -state.tau.coeffs + np.stack([ik[i] * u[j] + ik[j] * u[i] for i, j in sym_pairs(grid.n)])
    return SpectralState(
        SpectralField(grid, da, SCALAR),
        SpectralField(grid, du, VECTOR),
        SpectralField(grid, dtau, SYM),
    )


def _nonlinear(state, gamma, b, mask):
    """Fused evaluation of (F, G, H) in spectral space, plus diagnostics.

    Returns (F_hat, G_hat, H_hat_packed, info); outputs are multiplied by
    ``mask`` and the zero modes of G and H are removed.
    """
    grid = state.grid
    n = grid.n
    ns = grid.n_sym
    ik = 1j * grid.wavevector
    dmask = grid.dealias_mask
    a = state.a.coeffs * dmask
    u = state.u.coeffs * dmask
    tau = state.tau.coeffs * dmask
    unpack = _unpack_index(n)

    # One batched inverse transform (two real fields per FFT) for everything we need.
    parts = [a[None], u, ik * a, (u[:, None] * ik[None, :]).reshape((n * n,) + grid.shape)]
    parts.append(tau)
    parts.append((tau[:, None] * ik[None, :]).reshape((ns * n,) + grid.shape))
    phys = ifft_real_batch(np.concatenate(parts), grid)
    o = 0
    ap = phys[o]; o += 1
    up = phys[o:o + n]; o += n
    grad_a = phys[o:o + n]; o += n
    grad_u = phys[o:o + n * n].reshape((n, n) + grid.shape); o += n * n
    tp = phys[o:o + ns][unpack]; o += ns
    grad_tau = phys[o:o + ns * n].reshape((ns, n) + grid.shape)[unpack]
    div_tau = np.einsum("ijj...->i...", grad_tau)

    one_plus_a = 1.0 + ap
    min_rho = float(one_plus_a.min())
    if not min_rho > 0:
        raise VacuumError(f"vacuum reached: min(1 + a) = {min_rho:.4g}")

    flux = ap[None] * up
    adv_u = np.einsum("j...,ij...->i...", up, grad_u)
    g = -adv_u + (1.0 - one_plus_a ** (gamma - 2.0)) * grad_a - (ap / one_plus_a) * div_tau
    adv_tau = np.einsum("k...,ijk...->ij...", up, grad_tau)
    h = -adv_tau - _q_physical(tp, grad_u, b)

    hsym = np.abs(h - np.swapaxes(h, 0, 1)).max()
    hscale = np.abs(h).max()

    spec = fft_real_batch(np.concatenate([flux, g, pack_sym(h, n)]), grid)
    flux_hat = spec[:n]
    g_hat = spec[n:2 * n]
    h_hat = spec[2 * n:]
    zero = (slice(None),) + (0,) * n
    info = {
        "min_one_plus_a": min_rho,
        "tau_asymmetry": float(hsym / hscale) if hscale > 0 else 0.0,
        "mean_G": float(np.abs(g_hat[zero]).max()),
        "mean_H": float(np.abs(h_hat[zero]).max()),
    }
    g_hat[zero] = 0.0
    h_hat[zero] = 0.0
    f_hat = -np.sum(ik * flux_hat, axis=0) * mask
    return f_hat, g_hat * mask, h_hat * mask, info


def nonlinear_F(a, u):
    grid = check_grid(a, u)
    state = SpectralState(a, u, SpectralField(grid, np.zeros((grid.n_sym,) + grid.shape, complex), SYM))
    f, _, _, _ = _nonlinear(state, 2.0, 0.0, grid.dealias_mask)
    return SpectralField(grid, f, SCALAR)


def nonlinear_G(a, u, tau, gamma):
    grid = check_grid(a, u, tau)
    _, g, _, _ = _nonlinear(SpectralState(a, u, tau), gamma, 0.0, grid.dealias_mask)
    return SpectralField(grid, g, VECTOR)


def nonlinear_H(u, tau, b):
    grid = check_grid(u, tau)
    a = SpectralField(grid, np.zeros(grid.shape, complex), SCALAR)
    _, _, h, _ = _nonlinear(SpectralState(a, u, tau), 2.0, b, grid.dealias_mask)
    return SpectralField(grid, h, SYM)


def full_rhs(state, params, info=None):
    """Linear part plus (F, G, H), projected onto the Friedrichs annulus if enabled.

    ``info``, when a dict, receives min(1+a), the relative asymmetry of the
    full-matrix H and the removed zero modes of G and H.
    """
    grid = state.grid
    lin_mask, mask = _masks_for(grid, params)
    lin = linear_rhs(state)
    if params.linear_only:
        if info is not None:
            info.update(min_one_plus_a=float((1.0 + ifft(state.a.coeffs, grid)).min()),
                        tau_asymmetry=0.0, mean_G=0.0, mean_H=0.0)
        return lin.map(lambda f: f.like(f.coeffs * lin_mask))
    f_hat, g_hat, h_hat, nl_info = _nonlinear(state, params.gamma, params.b, mask)
    if info is not None:
        info.update(nl_info)
    scale = float(np.sqrt(np.sum(np.abs(state.flat()) ** 2)))
    if max(nl_info["mean_G"], nl_info["mean_H"]) > MEAN_WARN_RATIO * scale and scale > 0:
        log.debug("zero mode of (G, H) removed: %.3g / %.3g", nl_info["mean_G"], nl_info["mean_H"])
    return SpectralState(
        SpectralField(grid, lin.a.coeffs * lin_mask + f_hat, SCALAR),
        SpectralField(grid, lin.u.coeffs * lin_mask + g_hat, VECTOR),
        SpectralField(grid, lin.tau.coeffs * lin_mask + h_hat, SYM),
    )
