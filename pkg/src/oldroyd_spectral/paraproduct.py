"""Bony decomposition, empirical product-estimate ratios and the composite series.

Inequalities are checked by reporting ratios LHS/RHS for concrete fields; no
constant is asserted here.  Homogeneous norms discard the zero mode, so
products (whose mean is generally nonzero) are measured with the mean removed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .littlewood_paley import (
    besov_norm,
    besov_norm_2inf,
    besov_norm_infinf,
    build_ladder,
    sup_norm,
)
from .operators import pointwise_product
from .spectral import SCALAR, SpectralField, check_grid, fft, ifft


def mean_free(f):
    c = f.coeffs.copy()
    c[(...,) + (0,) * f.grid.n] = 0.0
    return f.like(c)


@dataclass(frozen=True, eq=False)
class BonySplit:
    Tfg: SpectralField
    Tgf: SpectralField
    Rfg: SpectralField

    def total(self):
        return self.Tfg + self.Tgf + self.Rfg


def bony_split(f, g, ladder=None):
    """fg = T_f g + T_g f + R(f, g) on the dealiased product.

    T_f g = sum_k S_{k-1} f Delta_k g collects block pairs (j, k) with j <= k-2,
    R(f, g) the pairs with |j - k| <= 1.
    """
    grid = check_grid(f, g)
    if f.rank != SCALAR or g.rank != SCALAR:
        raise ValueError("bony_split works on scalar fields")
    ladder = ladder if ladder is not None else build_ladder(grid)
    mask = grid.dealias_mask
    fb = np.stack([ifft(f.coeffs * mask * m, grid) for m in ladder.phi_masks])
    gb = np.stack([ifft(g.coeffs * mask * m, grid) for m in ladder.phi_masks])
    # low[k] = sum_{j <= k-2} block_j  (= S_{k-1} in ladder indexing)
    zero = np.zeros((2,) + grid.shape)
    f_low = np.concatenate([zero, np.cumsum(fb, axis=0)[:-2]])
    g_low = np.concatenate([zero, np.cumsum(gb, axis=0)[:-2]])

    tfg = np.sum(f_low * gb, axis=0)
    tgf = np.sum(g_low * fb, axis=0)
    rem = np.sum(fb * gb, axis=0)
    rem += np.sum(fb[1:] * gb[:-1], axis=0)
    rem += np.sum(fb[:-1] * gb[1:], axis=0)

    def spec(p):
        return SpectralField(grid, fft(p, grid) * mask, SCALAR)

    return BonySplit(spec(tfg), spec(tgf), spec(rem))


def _check_s(s, n):
    if not (-n / 2 < s <= n / 2):
        raise ValueError(f"s must lie in (-n/2, n/2], got {s} for n={n}")


def product_estimate_ratio(f, g, s, ladder=None):
    """||fg||_{B^s} / (||f||_{B^{n/2}} ||g||_{B^s}) for already-weighted fields."""
    grid = check_grid(f, g)
    _check_s(s, grid.n)
    ladder = ladder if ladder is not None else build_ladder(grid)
    den = besov_norm(f, grid.n / 2, ladder) * besov_norm(g, s, ladder)
    if den == 0:
        raise ValueError("zero denominator in product estimate ratio")
    num = besov_norm(mean_free(pointwise_product(f, g)), s, ladder)
    return num / den


def _ratio(lhs, rhs):
    return lhs / rhs if rhs > 0 else 0.0


def piecewise_estimates_report(f, g, s1, s2, ladder=None):
    """LHS, RHS and ratio of the paraproduct/remainder estimates.

    A1: ||T_f g||_{B^{s1}}        vs ||f||_{L^inf} ||g||_{B^{s1}}
    A2: ||T_f g||_{B^{s1+s2}}     vs ||f||_{B^{s2}_{inf,inf}} ||g||_{B^{s1}}   (s2 < 0)
    A3: ||R(f,g)||_{B^{s1+s2-n/2}} vs ||f||_{B^{s1}_{2,inf}} ||g||_{B^{s2}}   (s1 + s2 > 0)
    """
    grid = check_grid(f, g)
    ladder = ladder if ladder is not None else build_ladder(grid)
    n = grid.n
    split = bony_split(f, g, ladder)
    tfg = mean_free(split.Tfg)
    rem = mean_free(split.Rfg)

    rows = []
    lhs = besov_norm(tfg, s1, ladder)
    rhs = sup_norm(f) * besov_norm(g, s1, ladder)
    rows.append(dict(estimate="A1", s1=s1, s2=None, lhs=lhs, rhs=rhs, ratio=_ratio(lhs, rhs), valid=True))

    valid = s2 < 0
    lhs = besov_norm(tfg, s1 + s2, ladder)
    rhs = besov_norm_infinf(f, s2, ladder) * besov_norm(g, s1, ladder)
    rows.append(dict(estimate="A2", s1=s1, s2=s2, lhs=lhs, rhs=rhs, ratio=_ratio(lhs, rhs), valid=valid))

    valid = s1 + s2 > 0
    lhs = besov_norm(rem, s1 + s2 - n / 2, ladder)
    rhs = besov_norm_2inf(f, s1, ladder) * besov_norm(g, s2, ladder)
    rows.append(dict(estimate="A3", s1=s1, s2=s2, lhs=lhs, rhs=rhs, ratio=_ratio(lhs, rhs), valid=valid))
    return rows


def binomial_coefficients(alpha, K):
    """C_k = alpha (alpha-1) ... (alpha-k+1) / k!  for k = 1..K."""
    c = np.empty(K)
    prev = 1.0
    for k in range(1, K + 1):
        prev = prev * (alpha - k + 1) / k
        c[k - 1] = prev
    return c


@dataclass
class CompositeSeries:
    field: SpectralField
    coefficients: np.ndarray
    sup_a: float
    term_norms: np.ndarray  # ||a^k||_{B^{n/2}}, k = 1..K
    termwise_bound: float
    algebra_constant: float
    geometric_bound: float
    geometric_valid: bool
    tail_estimate: float
    tail_sup: list = field(default_factory=list)


def composite_series(a, gamma, K=20, ladder=None):
    """Truncated Taylor series of 1 - (1 + a)^(gamma - 2) = -sum_k C_k a^k.

    Powers are taken pointwise in physical space.  Besides the field, the
    result carries the term-by-term Besov bound, the algebra-constant
    geometric bound and a pointwise tail estimate sum_{k>K} |C_k| ||a||_inf^k.
    """
    if K < 1:
        raise ValueError("truncation order K must be >= 1")
    grid = a.grid
    ladder = ladder if ladder is not None else build_ladder(grid)
    r = sup_norm(a)
    if r >= 1:
        raise ValueError(f"composite series needs ||a||_inf < 1, got {r:.4g}")
    coeffs = binomial_coefficients(gamma - 2.0, K)
    x = ifft(a.coeffs, grid)

    total = np.zeros(grid.shape)
    power = np.ones(grid.shape)
    term_norms = np.empty(K)
    exact = 1.0 - (1.0 + x) ** (gamma - 2.0)
    tail_sup = []
    for k in range(1, K + 1):
        power = power * x
        total -= coeffs[k - 1] * power
        pk = mean_free(SpectralField(grid, fft(power, grid), SCALAR))
        term_norms[k - 1] = besov_norm(pk, grid.n / 2, ladder)
        tail_sup.append(float(np.abs(exact - total).max()))

    a_norm = term_norms[0]
    if K >= 2 and a_norm > 0:
        ks = np.arange(2, K + 1)
        alg = float(np.max((term_norms[1:] / a_norm**ks) ** (1.0 / (ks - 1))))
    else:
        alg = 1.0
    abs_c = np.abs(coeffs)
    geometric = float(np.sum(abs_c * alg ** np.arange(K) * a_norm ** np.arange(1, K + 1)))
    more = binomial_coefficients(gamma - 2.0, K + 400)[K:]
    tail = float(np.sum(np.abs(more) * r ** np.arange(K + 1, K + 401)))
    return CompositeSeries(
        field=SpectralField(grid, fft(total, grid), SCALAR),
        coefficients=coeffs,
        sup_a=r,
        term_norms=term_norms,
        termwise_bound=float(np.sum(abs_c * term_norms)),
        algebra_constant=alg,
        geometric_bound=geometric,
        geometric_valid=alg * a_norm <= 0.5,
        tail_estimate=tail,
        tail_sup=tail_sup,
    )


def pressure_bracket(a, gamma):
    """Pointwise 1 - (1 + a)^(gamma - 2) as a spectral field (oracle/production path)."""
    x = ifft(a.coeffs, a.grid)
    return SpectralField(a.grid, fft(1.0 - (1.0 + x) ** (gamma - 2.0), a.grid), SCALAR)


def fraction_series(a, K=20):
    """Truncated a/(1+a) = sum_k (-1)^(k+1) a^k, taken pointwise."""
    x = ifft(a.coeffs, a.grid)
    total = np.zeros(a.grid.shape)
    power = np.ones(a.grid.shape)
    for k in range(1, K + 1):
        power = power * x
        total += (-1.0) ** (k + 1) * power
    return SpectralField(a.grid, fft(total, a.grid), SCALAR)
