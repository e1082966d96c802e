import numpy as np
import pytest
from hypothesis import given, strategies as st

from oldroyd_spectral.spectral import (
    MATRIX,
    SCALAR,
    SYM,
    VECTOR,
    GridMismatchError,
    GridSpec,
    SpectralField,
    SpectralState,
    enforce_hermitian,
    fft_real_batch,
    forward_transform,
    hermitian_defect,
    ifft_real_batch,
    inverse_transform,
    zeros,
)
from oracles import dft, random_real_coeffs


def test_grid_counts():
    g = GridSpec(2, 8)
    assert g.lattice().shape == (64, 2)
    assert np.abs(g.lattice()).max() == 4
    assert GridSpec(3, 16).lattice().shape[0] == 4096


@pytest.mark.parametrize("args", [(2, 7), (4, 8), (2, 6), (2, 8, -1.0)])
def test_grid_rejects_bad_input(args):
    with pytest.raises(ValueError):
        GridSpec(*args)


def test_dealias_index():
    assert GridSpec(2, 64).dealias_index == 21
    assert GridSpec(2, 16).dealias_index == 5
    g = GridSpec(2, 16)
    m = np.rint(g.wavevector / g.k_unit)
    assert np.abs(m[:, g.dealias_mask]).max() == 5


def test_zero_field():
    g = GridSpec(2, 8)
    f = forward_transform(np.zeros(g.shape), g)
    assert np.all(f.coeffs == 0)


def test_single_cosine():
    g = GridSpec(2, 8)
    x = g.coordinates
    f = forward_transform(np.cos(x[0]), g)
    expected = np.zeros(g.shape, complex)
    expected[1, 0] = expected[-1, 0] = 0.5
    np.testing.assert_allclose(f.coeffs, expected, atol=1e-15)


def test_forward_matches_numpy_fft(rng):
    g = GridSpec(3, 8)
    x = rng.standard_normal((3,) + g.shape)
    f = forward_transform(x, g, VECTOR)
    np.testing.assert_allclose(f.coeffs, dft(x, 3), atol=1e-14)


@given(st.integers(0, 2**32 - 1), st.sampled_from([(2, 8), (2, 16), (3, 8)]))
def test_round_trip(seed, nN):
    g = GridSpec(*nN)
    x = np.random.default_rng(seed).standard_normal(g.shape)
    back = inverse_transform(forward_transform(x, g))
    assert np.abs(back - x).max() <= 1e-12 * max(1.0, np.abs(x).max())


@given(st.integers(0, 2**32 - 1), st.integers(1, 7))
def test_paired_transforms_match_single(seed, m):
    g = GridSpec(2, 16)
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((m,) + g.shape)
    c = fft_real_batch(x, g)
    np.testing.assert_allclose(c, dft(x, 2), atol=1e-14)
    np.testing.assert_allclose(ifft_real_batch(c, g), x, atol=1e-13)
    assert max(hermitian_defect(SpectralField(g, c[i], SCALAR)) for i in range(m)) == 0.0


def test_rank_inference_and_shape_errors():
    g = GridSpec(2, 8)
    assert forward_transform(np.zeros((3,) + g.shape), g).rank == SYM
    assert forward_transform(np.zeros((2, 2) + g.shape), g).rank == MATRIX
    with pytest.raises(ValueError):
        forward_transform(np.zeros((5,) + g.shape), g)
    with pytest.raises(ValueError):
        forward_transform(np.zeros((2,) + g.shape), g, SCALAR)


def test_grid_mismatch():
    a = zeros(GridSpec(2, 8))
    b = zeros(GridSpec(2, 16))
    with pytest.raises(GridMismatchError):
        a + b


def test_full_matrix_is_symmetric(rng):
    g = GridSpec(3, 8)
    t = SpectralField(g, random_real_coeffs(rng, 8, 3, 6), SYM)
    m = t.full_matrix().coeffs
    np.testing.assert_array_equal(m, np.swapaxes(m, 0, 1))
    np.testing.assert_array_equal(m[0, 1], t.coeffs[3])


def test_enforce_hermitian_yields_real_field(rng):
    g = GridSpec(2, 8)
    c = rng.standard_normal(g.shape) + 1j * rng.standard_normal(g.shape)
    h = enforce_hermitian(c, g)
    assert hermitian_defect(SpectralField(g, h, SCALAR)) < 1e-15
    assert np.abs(np.fft.ifftn(h).imag).max() < 1e-15


def test_state_flat_round_trip(rng):
    g = GridSpec(2, 8)
    flat = np.stack([random_real_coeffs(rng, 8, 2) for _ in range(6)])
    s = SpectralState.from_flat(g, flat)
    np.testing.assert_array_equal(s.flat(), flat)
    assert s.checksum() == SpectralState.from_flat(g, flat.copy()).checksum()
    assert (s * 2.0).checksum() != s.checksum()


def test_state_rank_check():
    g = GridSpec(2, 8)
    with pytest.raises(ValueError):
        SpectralState(zeros(g), zeros(g), zeros(g, SYM))
