"""Per-wavenumber form of the linearized system and its spectrum."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .spectral import sym_pairs

GROWTH_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class ModeMatrix:
    """d/dt (a, u, tau_packed)^ = M(xi) (a, u, tau_packed)^ for one wavenumber."""

    xi: np.ndarray
    matrix: np.ndarray

    @property
    def dim(self):
        return self.matrix.shape[0]


def mode_matrix(xi, n=None):
    xi = np.asarray(xi, dtype=float)
    n = n or xi.size
    if xi.shape != (n,):
        raise ValueError(f"xi must have {n} components")
    pairs = sym_pairs(n)
    dim = 1 + n + len(pairs)
    M = np.zeros((dim, dim), dtype=complex)
    U = 1  # first velocity row
    T = 1 + n  # first packed-tau row
    tau_index = {}
    for c, (i, j) in enumerate(pairs):
        tau_index[(i, j)] = tau_index[(j, i)] = T + c
    for l in range(n):
        M[0, U + l] = -1j * xi[l]
    for i in range(n):
        M[U + i, 0] = -1j * xi[i]
        for l in range(n):
            M[U + i, tau_index[(i, l)]] += 1j * xi[l]
    for c, (j, l) in enumerate(pairs):
        M[T + c, T + c] = -1.0
        M[T + c, U + l] += 1j * xi[j]
        M[T + c, U + j] += 1j * xi[l]
    return ModeMatrix(xi, M)


def spectrum(M):
    """Eigenvalues of a small dense matrix, checked by residual."""
    M = M.matrix if isinstance(M, ModeMatrix) else np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("spectrum needs a square matrix")
    if M.shape[0] > 10:
        raise ValueError("spectrum is meant for mode matrices of size <= 10")
    vals, vecs = np.linalg.eig(M)
    scale = max(np.linalg.norm(M, 2), 1.0)
    res = np.linalg.norm(M @ vecs - vecs * vals, axis=0) / np.linalg.norm(vecs, axis=0)
    if not np.all(np.isfinite(vals)) or res.max() > 1e-10 * scale:
        raise np.linalg.LinAlgError(f"eigen-solve residual {res.max():.3g} too large")
    return vals


def energy_rate(M, v):
    """(d/dt of 2|a|^2 + 2|u|^2 + |tau|_F^2, -2|tau|_F^2) along the linear flow at v."""
    M = M.matrix if isinstance(M, ModeMatrix) else M
    dim = M.shape[0]
    n = int(round((-3 + np.sqrt(9 + 8 * (dim - 1))) / 2))
    w = mode_energy_weights(n)
    dv = M @ v
    rate = 2.0 * np.sum(w * (np.conj(v) * dv).real)
    tau = v[1 + n:]
    tw = np.array([1.0 if i == j else 2.0 for i, j in sym_pairs(n)])
    return rate, -2.0 * float(np.sum(tw * np.abs(tau) ** 2))


def mode_energy_weights(n):
    """Weights of 2|a|^2 + 2|u|^2 + |tau|_F^2 in packed coordinates."""
    tw = [1.0 if i == j else 2.0 for i, j in sym_pairs(n)]
    return np.array([2.0] + [2.0] * n + tw)


def mode_energy(v, n):
    return float(np.sum(mode_energy_weights(n) * np.abs(v) ** 2))


@dataclass
class SweepRow:
    kmag: float
    max_real: float
    gap: float
    flagged: bool


def damping_sweep(n, kmags):
    """max Re(lambda) and spectral gap of M(|xi| e_1) for each sample.

    The gap is -max Re(lambda); a row is flagged when max Re(lambda) > 1e-10.
    """
    rows = []
    for r in kmags:
        if r <= 0:
            raise ValueError("sweep needs positive |xi| samples")
        xi = np.zeros(n)
        xi[0] = r
        vals = spectrum(mode_matrix(xi, n))
        top = float(vals.real.max())
        rows.append(SweepRow(float(r), top, -top, top > GROWTH_TOL))
    return rows


def log_samples(ximin, ximax, samples):
    return np.geomspace(ximin, ximax, samples)


def write_sweep_csv(rows, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["kmag", "max_real", "spectral_gap", "flag"])
        for r in rows:
            w.writerow([repr(r.kmag), repr(r.max_real), repr(r.gap), int(r.flagged)])
