import numpy as np
import pytest
from hypothesis import given, strategies as st

from oldroyd_spectral.diagnostics import (
    HIGH,
    LOW,
    EnergyLedger,
    apriori_ledger,
    cancellation_residual,
    cancellation_terms,
    hybrid_energy_snapshot,
    nonlinear_bound_check,
    relative_cancellation_residual,
    shell_energy,
    shell_energy_table,
)
from oldroyd_spectral.littlewood_paley import build_ladder
from oldroyd_spectral.operators import l2_norm
from oldroyd_spectral.spectral import MATRIX, GridSpec, SpectralField, SpectralState, forward_transform
from oldroyd_spectral.weight import RadiusTracker
from oracles import one_mode_shell_weights, random_real_coeffs

seeds = st.integers(0, 2**32 - 1)


def random_state(rng, g, decay=0.5):
    flat = np.stack([random_real_coeffs(rng, g.N, g.n, decay=decay) for _ in range(1 + g.n + g.n_sym)])
    return SpectralState.from_flat(g, flat)


def test_zero_state_energies():
    g = GridSpec(2, 32)
    for e in shell_energy_table(SpectralState.zeros(g)):
        assert e.E_tilde == 0 and e.E_plain == 0
    assert cancellation_residual(SpectralState.zeros(g)) == 0


def test_density_only_state(rng):
    g = GridSpec(2, 32)
    s = random_state(rng, g)
    s = SpectralState(s.a, s.u * 0.0, s.tau * 0.0)
    ladder = build_ladder(g)
    for k in (1, 3, 4):
        regime = LOW if k <= 3 else HIGH
        e = shell_energy(s, k, regime, ladder)
        blk = s.a.like(s.a.coeffs * ladder.phi_mask(k))
        assert e.E_tilde_sq == pytest.approx(2 * l2_norm(blk) ** 2, rel=1e-13)


def test_regime_must_match_k0(rng):
    g = GridSpec(2, 32)
    s = random_state(rng, g)
    with pytest.raises(ValueError):
        shell_energy(s, 1, HIGH)
    with pytest.raises(ValueError):
        shell_energy(s, 4, LOW)
    shell_energy(s, 3, HIGH)
    shell_energy(s, 3, LOW)


@given(seeds, st.floats(0.02, 1.0), st.sampled_from([(2, 32), (3, 16)]))
def test_energy_equivalence(seed, decay, nN):
    g = GridSpec(*nN)
    s = random_state(np.random.default_rng(seed), g, decay)
    ladder = build_ladder(g)
    for k in ladder.js:
        for regime in [r for r, ok in ((LOW, k <= 3), (HIGH, k >= 3)) if ok]:
            e = shell_energy(s, int(k), regime, ladder)
            p2 = e.E_plain**2
            assert 0.5 * p2 * (1 - 1e-12) <= e.E_tilde_sq <= 3 * p2 * (1 + 1e-12)


@given(seeds, st.sampled_from([(2, 32), (3, 16)]))
def test_cancellation_identity(seed, nN):
    g = GridSpec(*nN)
    s = random_state(np.random.default_rng(seed), g)
    assert relative_cancellation_residual(s) <= 1e-12
    assert relative_cancellation_residual(s, 2) <= 1e-12
    norm2 = sum(l2_norm(f) ** 2 for f in (s.a, s.u, s.tau))
    assert cancellation_residual(s) <= 1e-12 * norm2


def test_cancellation_negative_control(rng):
    g = GridSpec(2, 32)
    s = random_state(rng, g)
    full = s.tau.full_matrix().coeffs
    pert = np.zeros_like(full)
    pert[0, 1] = random_real_coeffs(rng, 32, 2)
    res = []
    for eps in (1e-3, 2e-3, 4e-3):
        t = SpectralField(g, full + eps * pert, MATRIX)
        res.append(cancellation_residual((s.a, s.u, t)))
    assert res[0] > 1e-10
    assert res[1] / res[0] == pytest.approx(2.0, rel=1e-6)
    assert res[2] / res[0] == pytest.approx(4.0, rel=1e-6)


def test_cancellation_terms_shape(rng):
    s = random_state(rng, GridSpec(2, 16))
    t = cancellation_terms(s)
    assert t.shape == (4,)
    assert np.abs(t).sum() > 0


def unit_state(g, eps):
    x = g.coordinates
    a = forward_transform(eps * np.cos(x[0]), g)
    z = SpectralState.zeros(g)
    return SpectralState(a, z.u, z.tau)


def test_snapshot_single_mode_by_hand():
    g = GridSpec(2, 32)
    eps = 1e-3
    tr = RadiusTracker(0.25, 10.0)
    row = hybrid_energy_snapshot(unit_state(g, eps), tr)
    l2 = eps * np.sqrt(0.5 * g.volume) * np.exp(0.5)
    w = one_mode_shell_weights(1.0)
    assert row.hybrid == pytest.approx(l2 * sum(w.values()), rel=1e-12)  # shells j <= 0 use 2^{0 j}
    assert row.besov_n2 == pytest.approx(l2 * sum(2.0**j * x for j, x in w.items()), rel=1e-12)
    assert row.besov_hi == pytest.approx(row.besov_n2, rel=1e-12)
    assert row.int_theta == row.int_besov == row.int_quadratic == 0
    assert row.lhs == row.rhs == row.hybrid and row.ratio == 1.0


def test_constant_state_integrals_grow_linearly():
    g = GridSpec(2, 32)
    s = unit_state(g, 1e-3)
    tr = RadiusTracker(0.25, 10.0)
    ledger = EnergyLedger(g, 10.0)
    rows = [ledger.snapshot(t, s, tr) for t in np.linspace(0, 2, 5)]
    ib = np.array([r.int_besov for r in rows])
    np.testing.assert_allclose(np.diff(ib), ib[1], rtol=1e-12)
    assert rows[-1].int_besov == pytest.approx(2 * rows[0].besov_n2, rel=1e-12)
    assert rows[-1].int_theta == pytest.approx(10.0 * rows[-1].int_quadratic, rel=1e-12)


def test_ledger_zero_data_and_errors():
    g = GridSpec(2, 16)
    ledger = EnergyLedger(g, 10.0)
    rows = [ledger.snapshot(t, SpectralState.zeros(g), RadiusTracker(0.25, 10.0)) for t in (0, 1)]
    summ = apriori_ledger(rows, 10.0)
    assert summ.c_emp == 0 and np.all(summ.lhs == 0) and summ.lambda_ok
    with pytest.raises(ValueError):
        apriori_ledger([], 1.0)


def test_ledger_state_round_trip():
    g = GridSpec(2, 16)
    s = unit_state(g, 1e-3)
    tr = RadiusTracker(0.25, 10.0)
    a = EnergyLedger(g, 10.0)
    a.snapshot(0.0, s, tr)
    a.snapshot(0.5, s, tr)
    b = EnergyLedger(g, 10.0)
    b.restore(a.state_dict())
    assert a.snapshot(1.0, s, tr) == b.snapshot(1.0, s, tr)


def test_nonlinear_bound_check(rng):
    g = GridSpec(2, 32)
    tr = RadiusTracker(0.1, 10.0)
    zero = nonlinear_bound_check(SpectralState.zeros(g), tr, 1.0)
    assert zero["lhs"] == 0 and zero["ratio"] == 0
    s = random_state(rng, g) * 1e-3
    r = nonlinear_bound_check(s, tr, 1.0, gamma=1.4, b=0.5)
    assert np.isfinite(r["ratio"]) and r["ratio"] > 0 and r["small"]
    r = nonlinear_bound_check(s, tr, -1.0 + 0.01, gamma=1.4, b=0.5)
    assert np.isfinite(r["ratio"])
    with pytest.raises(ValueError):
        nonlinear_bound_check(s, tr, -1.0)
