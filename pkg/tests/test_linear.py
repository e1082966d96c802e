import csv

import numpy as np
import pytest
from hypothesis import given, strategies as st

from oldroyd_spectral.linear import (
    damping_sweep,
    energy_rate,
    log_samples,
    mode_energy,
    mode_matrix,
    spectrum,
    write_sweep_csv,
)
from oldroyd_spectral.model import linear_rhs
from oldroyd_spectral.spectral import GridSpec, SpectralState
from oracles import mode_evolution


def sorted_real(vals):
    return np.sort(np.asarray(vals).real)


@pytest.mark.parametrize("n", [2, 3])
def test_zero_wavenumber_spectrum(n):
    vals = spectrum(mode_matrix(np.zeros(n)))
    m = n * (n + 1) // 2
    np.testing.assert_allclose(sorted_real(vals), [-1.0] * m + [0.0] * (1 + n), atol=1e-15)
    assert np.abs(np.asarray(vals).imag).max() == 0


def test_spectrum_of_diagonal():
    d = np.array([1.0, -2.0, 0.5j])
    np.testing.assert_allclose(np.sort_complex(spectrum(np.diag(d))), np.sort_complex(d))


def test_spectrum_similarity_invariance(rng):
    M = mode_matrix(np.array([0.7, -1.3, 0.4])).matrix
    q, _ = np.linalg.qr(rng.standard_normal((10, 10)) + 1j * rng.standard_normal((10, 10)))
    a = np.sort_complex(np.round(spectrum(M), 10))
    b = np.sort_complex(np.round(spectrum(q.conj().T @ M @ q), 10))
    np.testing.assert_allclose(a, b, atol=1e-9)


def test_spectrum_rejects_big_matrices():
    with pytest.raises(ValueError):
        spectrum(np.eye(11))


@given(st.floats(-5, 5), st.floats(-5, 5))
def test_reality_symmetry(x, y):
    M = mode_matrix(np.array([x, y])).matrix
    np.testing.assert_array_equal(mode_matrix(np.array([-x, -y])).matrix, np.conj(M))


@pytest.mark.parametrize("n", [2, 3])
def test_mode_matrix_matches_linear_rhs(rng, n):
    g = GridSpec(n, 8)
    m = np.array([1, -2, 1][:n])
    v = rng.standard_normal(1 + n + g.n_sym) + 1j * rng.standard_normal(1 + n + g.n_sym)
    flat = np.zeros((1 + n + g.n_sym,) + g.shape, complex)
    flat[(slice(None),) + g.index_of(m)] = v
    d = linear_rhs(SpectralState.from_flat(g, flat)).flat()[(slice(None),) + g.index_of(m)]
    np.testing.assert_allclose(mode_matrix(m * g.k_unit).matrix @ v, d, atol=1e-12)


@pytest.mark.parametrize("n", [2, 3])
def test_energy_balance_per_mode(rng, n):
    M = mode_matrix(rng.standard_normal(n))
    v = rng.standard_normal(M.dim) + 1j * rng.standard_normal(M.dim)
    rate, expected = energy_rate(M, v)
    assert rate == pytest.approx(expected, rel=1e-12)
    assert expected <= 0
    # and along the exact flow, by finite differences
    h = 1e-4
    e = [mode_energy(mode_evolution(M.matrix, v, t), n) for t in (-2 * h, -h, h, 2 * h)]
    fd = (e[0] - 8 * e[1] + 8 * e[2] - e[3]) / (12 * h)
    assert fd == pytest.approx(expected, rel=1e-7)


@pytest.mark.parametrize("n", [2, 3])
def test_damping_sweep(n):
    rows = damping_sweep(n, log_samples(2**-6, 2**6, 64))
    assert len(rows) == 64
    assert not any(r.flagged for r in rows)
    assert all(r.max_real <= 1e-10 for r in rows)
    assert all(r.max_real <= -1e-4 for r in rows if r.kmag >= 1 / 8)
    # weak low-frequency damping: the slowest branch behaves like -|xi|^2
    assert rows[0].max_real == pytest.approx(-rows[0].kmag ** 2, rel=1e-2)
    # the relaxation branch near -1 persists at high frequency
    vals = spectrum(mode_matrix(np.r_[64.0, np.zeros(n - 1)]))
    assert np.min(np.abs(vals.real + 1)) < 1e-3
    with pytest.raises(ValueError):
        damping_sweep(n, [0.0])


def test_sweep_csv(tmp_path):
    rows = damping_sweep(2, log_samples(0.5, 2.0, 3))
    p = tmp_path / "sweep.csv"
    write_sweep_csv(rows, p)
    with open(p) as fh:
        data = list(csv.DictReader(fh))
    assert list(data[0]) == ["kmag", "max_real", "spectral_gap", "flag"]
    assert float(data[1]["kmag"]) == pytest.approx(1.0)
    assert float(data[1]["spectral_gap"]) == -float(data[1]["max_real"])
