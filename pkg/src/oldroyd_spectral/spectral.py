"""Periodic-box grids, spectral fields and transforms.

Normalization convention (used everywhere in the package): the forward
transform carries the 1/N^n factor, so stored coefficients are Fourier-series
amplitudes,

    f(x) = sum_xi  c_xi exp(i xi . x),      c_xi = N^-n sum_x f(x) exp(-i xi . x),

and the inverse transform is the unscaled sum.  With this choice Parseval reads

    ||f||_{L^2(box)}^2 = L^n * sum_xi |c_xi|^2 .
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.fft as sfft

SCALAR = "scalar"
VECTOR = "vector"
SYM = "sym"
MATRIX = "matrix"
RANKS = (SCALAR, VECTOR, SYM, MATRIX)


class GridMismatchError(ValueError):
    pass


def sym_pairs(n):
    """Index pairs (i, j), i <= j, in packed storage order: diagonal first."""
    diag = [(i, i) for i in range(n)]
    off = [(i, j) for i in range(n) for j in range(i + 1, n)]
    return diag + off


def sym_weights(n):
    """Frobenius multiplicity of each packed entry (off-diagonals count twice)."""
    return np.array([1.0 if i == j else 2.0 for i, j in sym_pairs(n)])


@dataclass(frozen=True)
class GridSpec:
    """Uniform periodic grid on [0, L)^n with N points per axis."""

    n: int
    N: int
    L: float = 2 * np.pi

    def __post_init__(self):
        if self.n not in (2, 3):
            raise ValueError(f"dimension must be 2 or 3, got {self.n}")
        if self.N < 8 or self.N % 2:
            raise ValueError(f"points per axis must be even and >= 8, got {self.N}")
        if not self.L > 0:
            raise ValueError(f"box length must be positive, got {self.L}")

    @property
    def shape(self):
        return (self.N,) * self.n

    @property
    def volume(self):
        return self.L**self.n

    @property
    def n_sym(self):
        return self.n * (self.n + 1) // 2

    @property
    def k_unit(self):
        return 2 * np.pi / self.L

    @cached_property
    def wavevector(self):
        """Wavenumber components, shape (n, N, ..., N)."""
        m = sfft.fftfreq(self.N, 1.0 / self.N)
        k = np.stack(np.meshgrid(*([m] * self.n), indexing="ij"))
        return k * self.k_unit

    @cached_property
    def kmag(self):
        return np.sqrt(np.sum(self.wavevector**2, axis=0))

    @cached_property
    def kmag_inv(self):
        """|xi|^-1 with the zero mode mapped to 0."""
        out = np.zeros(self.shape)
        nz = self.kmag > 0
        out[nz] = 1.0 / self.kmag[nz]
        return out

    @property
    def kmax(self):
        return float(self.kmag.max())

    @property
    def kmin(self):
        """Smallest nonzero |xi| on the lattice."""
        return self.k_unit

    @property
    def dealias_index(self):
        """Largest integer index kept by the 2/3 rule (3K < N)."""
        return (self.N - 1) // 3

    @cached_property
    def dealias_mask(self):
        m = np.abs(self.wavevector / self.k_unit)
        return np.all(m <= self.dealias_index + 1e-9, axis=0)

    @property
    def dealias_kmax(self):
        """Largest |xi| kept by the 2/3 rule; default Friedrichs cutoff."""
        return self.dealias_index * self.k_unit

    @cached_property
    def coordinates(self):
        x = np.arange(self.N) * (self.L / self.N)
        return np.stack(np.meshgrid(*([x] * self.n), indexing="ij"))

    def lattice(self):
        """Integer wavenumber indices in deterministic (row-major FFT) order."""
        m = np.rint(self.wavevector / self.k_unit).astype(int)
        return m.reshape(self.n, -1).T

    def index_of(self, m):
        """Array index of integer wavenumber m (tuple), wrapping negatives."""
        return tuple(int(mi) % self.N for mi in m)

    @property
    def axes(self):
        return tuple(range(-self.n, 0))


def make_grid(n, N, L=2 * np.pi):
    return GridSpec(int(n), int(N), float(L))


def component_shape(grid, rank):
    if rank == SCALAR:
        return ()
    if rank == VECTOR:
        return (grid.n,)
    if rank == SYM:
        return (grid.n_sym,)
    if rank == MATRIX:
        return (grid.n, grid.n)
    raise ValueError(f"unknown rank {rank!r}")


def infer_rank(grid, shape):
    lead = tuple(shape[: len(shape) - grid.n])
    if tuple(shape[len(shape) - grid.n :]) != grid.shape:
        raise ValueError(f"array shape {shape} does not match grid {grid.shape}")
    for rank in RANKS:
        if component_shape(grid, rank) == lead:
            return rank
    raise ValueError(f"cannot infer field rank from leading shape {lead}")


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Fourier coefficients of a real field on ``grid``.

    ``coeffs`` has the component axes first and the n spatial-frequency axes
    last.  ``rank='sym'`` stores the n(n+1)/2 packed entries of a symmetric
    matrix in :func:`sym_pairs` order.
    """

    grid: GridSpec
    coeffs: np.ndarray
    rank: str = SCALAR

    def __post_init__(self):
        expected = component_shape(self.grid, self.rank) + self.grid.shape
        if self.coeffs.shape != expected:
            raise ValueError(
                f"{self.rank} field on {self.grid.shape} needs shape {expected}, "
                f"got {self.coeffs.shape}"
            )

    def like(self, coeffs, rank=None):
        return SpectralField(self.grid, coeffs, rank or self.rank)

    def __add__(self, other):
        _check_same(self, other)
        return self.like(self.coeffs + other.coeffs)

    def __sub__(self, other):
        _check_same(self, other)
        return self.like(self.coeffs - other.coeffs)

    def __neg__(self):
        return self.like(-self.coeffs)

    def __mul__(self, c):
        return self.like(self.coeffs * c)

    __rmul__ = __mul__

    @property
    def mean(self):
        """Zero-mode coefficient(s)."""
        return self.coeffs[(...,) + (0,) * self.grid.n]

    def full_matrix(self):
        """Unpack a sym field into an (n, n, ...) matrix field."""
        if self.rank == MATRIX:
            return self
        if self.rank != SYM:
            raise ValueError("full_matrix needs a symmetric-matrix field")
        n = self.grid.n
        out = np.empty((n, n) + self.grid.shape, dtype=self.coeffs.dtype)
        for c, (i, j) in enumerate(sym_pairs(n)):
            out[i, j] = self.coeffs[c]
            out[j, i] = self.coeffs[c]
        return self.like(out, MATRIX)

    def to_physical(self):
        return inverse_transform(self)


def _check_same(f, g):
    if f.grid != g.grid:
        raise GridMismatchError(f"grid mismatch: {f.grid} vs {g.grid}")
    if f.rank != g.rank:
        raise ValueError(f"rank mismatch: {f.rank} vs {g.rank}")


def check_grid(*fields):
    grid = fields[0].grid
    for f in fields[1:]:
        if f.grid != grid:
            raise GridMismatchError(f"grid mismatch: {grid} vs {f.grid}")
    return grid


def pack_sym(matrix_coeffs, n):
    """Upper-triangle entries of an (n, n, ...) array in packed order."""
    return np.stack([matrix_coeffs[i, j] for i, j in sym_pairs(n)])


def fft(samples, grid):
    return sfft.fftn(samples, axes=grid.axes, norm="forward")


def ifft(coeffs, grid):
    return sfft.ifftn(coeffs, axes=grid.axes, norm="forward").real


def _mirror(c, grid):
    """c(-xi) on the FFT index layout."""
    for ax in grid.axes:
        c = np.roll(np.flip(c, axis=ax), 1, axis=ax)
    return c


def fft_real_batch(samples, grid):
    """Transform a stack of real fields, two per complex FFT; outputs are exactly Hermitian."""
    m = samples.shape[0]
    if m % 2:
        samples = np.concatenate([samples, np.zeros((1,) + samples.shape[1:])])
    big = sfft.fftn(samples[0::2] + 1j * samples[1::2], axes=grid.axes, norm="forward")
    mirrored = np.conj(_mirror(big, grid))
    out = np.empty(samples.shape, complex)
    out[0::2] = 0.5 * (big + mirrored)
    out[1::2] = -0.5j * (big - mirrored)
    return out[:m]


def ifft_real_batch(coeffs, grid):
    """Inverse of a stack of Hermitian coefficient arrays, two per complex FFT."""
    m = coeffs.shape[0]
    if m % 2:
        coeffs = np.concatenate([coeffs, np.zeros((1,) + coeffs.shape[1:], complex)])
    z = sfft.ifftn(coeffs[0::2] + 1j * coeffs[1::2], axes=grid.axes, norm="forward")
    out = np.empty(coeffs.shape)
    out[0::2] = z.real
    out[1::2] = z.imag
    return out[:m]


def forward_transform(samples, grid, rank=None):
    samples = np.asarray(samples, dtype=float)
    if rank is None:
        rank = infer_rank(grid, samples.shape)
    expected = component_shape(grid, rank) + grid.shape
    if samples.shape != expected:
        raise ValueError(f"sample shape {samples.shape} does not match {expected}")
    return SpectralField(grid, fft(samples, grid), rank)


def inverse_transform(f):
    return ifft(f.coeffs, f.grid)


def zeros(grid, rank=SCALAR):
    return SpectralField(grid, np.zeros(component_shape(grid, rank) + grid.shape, complex), rank)


def hermitian_defect(f):
    """max |c(-xi) - conj(c(xi))| relative to max |c|."""
    c = f.coeffs
    flipped = c
    for ax in f.grid.axes:
        flipped = np.roll(np.flip(flipped, axis=ax), 1, axis=ax)
    scale = np.abs(c).max()
    if scale == 0:
        return 0.0
    return float(np.abs(flipped - np.conj(c)).max() / scale)


def enforce_hermitian(coeffs, grid):
    """Project coefficients onto the Hermitian-symmetric (real-field) subspace."""
    flipped = coeffs
    for ax in grid.axes:
        flipped = np.roll(np.flip(flipped, axis=ax), 1, axis=ax)
    out = 0.5 * (coeffs + np.conj(flipped))
    # The Nyquist planes pair with themselves only in the index sense; zero them.
    nyq = np.zeros(grid.shape, bool)
    for d in range(grid.n):
        sl = [slice(None)] * grid.n
        sl[d] = grid.N // 2
        nyq[tuple(sl)] = True
    out[..., nyq] = 0.0
    return out


@dataclass(frozen=True, eq=False)
class SpectralState:
    """The unknowns (a, u, tau) with a = rho - 1 and tau symmetric."""

    a: SpectralField
    u: SpectralField
    tau: SpectralField

    def __post_init__(self):
        check_grid(self.a, self.u, self.tau)
        if (self.a.rank, self.u.rank, self.tau.rank) != (SCALAR, VECTOR, SYM):
            raise ValueError("state needs (scalar, vector, sym) fields")

    @property
    def grid(self):
        return self.a.grid

    @classmethod
    def zeros(cls, grid):
        return cls(zeros(grid, SCALAR), zeros(grid, VECTOR), zeros(grid, SYM))

    @classmethod
    def from_flat(cls, grid, flat):
        """Inverse of :meth:`flat` (component-stacked coefficient array)."""
        n, m = grid.n, grid.n_sym
        return cls(
            SpectralField(grid, flat[0], SCALAR),
            SpectralField(grid, flat[1 : 1 + n], VECTOR),
            SpectralField(grid, flat[1 + n : 1 + n + m], SYM),
        )

    def flat(self):
        """All components stacked: shape (1 + n + n(n+1)/2, N, ..., N)."""
        return np.concatenate([self.a.coeffs[None], self.u.coeffs, self.tau.coeffs])

    def map(self, fn):
        return SpectralState(fn(self.a), fn(self.u), fn(self.tau))

    def __add__(self, other):
        return SpectralState(self.a + other.a, self.u + other.u, self.tau + other.tau)

    def __mul__(self, c):
        return SpectralState(self.a * c, self.u * c, self.tau * c)

    __rmul__ = __mul__

    def checksum(self):
        return hashlib.sha256(np.ascontiguousarray(self.flat()).tobytes()).hexdigest()[:16]
