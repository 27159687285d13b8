import math

import numpy as np
import pytest

from wslight import fock_oracle, hom, jsa, matcalc
from wslight.errors import CWNotSupported, ExcessiveShift, SingularDeterminant
from wslight.oracle_check import hom_analytic
from wslight.wsdecomp import WindowSpec


def padded_T(beta, pad):
    d = beta.shape[0]
    T = np.zeros((d + 2 * pad, d + 2 * pad), dtype=complex)
    ds = matcalc.disentangle(beta)
    T[pad:pad + d, pad:pad + d] = ds.T
    return T, ds.detW


def test_shift_identity_and_inverse():
    rng = np.random.default_rng(0)
    b = 0.3 * rng.normal(size=(4, 4))
    T, _ = padded_T(b, 3)
    same, dropped = hom.shift_T(T, 0)
    np.testing.assert_array_equal(same, T)
    assert dropped == 0
    fwd, _ = hom.shift_T(T, 2)
    back, _ = hom.shift_T(fwd, -2)
    np.testing.assert_allclose(back, T)


def test_shift_column_convention():
    T = np.arange(16.0).reshape(4, 4)
    T[:, 0] = 0
    Ts, _ = hom.shift_T(T, 1, max_dropped=1.0)
    np.testing.assert_array_equal(Ts[:, :3], T[:, 1:])
    np.testing.assert_array_equal(Ts[:, 3], 0)


def test_shift_preserves_toeplitz():
    n = np.arange(30)
    T = 0.2 * np.exp(-0.5 * (n[:, None] - n[None, :]) ** 2)
    Ts, _ = hom.shift_T(T, 2, max_dropped=1.0)
    core = Ts[:, :28]
    np.testing.assert_allclose(core[1:, 1:], core[:-1, :-1], atol=1e-15)


def test_excessive_shift():
    with pytest.raises(ExcessiveShift):
        hom.shift_T(np.eye(3) * 0.2, 1)


def test_hom_probability_vacuum():
    assert hom.hom_probability(np.zeros((3, 3)), 1.0) == 0.0


def test_hom_probability_scalar_minimum():
    r = 0.4
    T = np.array([[math.tanh(r)]])
    p = hom.hom_probability(T, 1 / math.cosh(r))
    assert p == pytest.approx((1 - 1 / math.cosh(r)) ** 2, abs=1e-12)
    assert p == pytest.approx(0.005624, abs=1e-6)


def test_symmetric_minimum_closed_form():
    rng = np.random.default_rng(4)
    z = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
    b = 0.4 * (z + z.T) / np.max(np.abs(z + z.T))
    ds = matcalc.disentangle(b)
    assert hom.hom_probability(ds.T, ds.detW) == pytest.approx((1 - ds.detW) ** 2, abs=1e-10)


def test_singular_determinant():
    with pytest.raises(SingularDeterminant):
        hom.hom_probability(np.array([[1.0]]), 0.5)


def test_hom_max_scalar_and_vacuum():
    assert hom.hom_max(np.zeros((2, 2))) == pytest.approx(0.0, abs=1e-15)
    r = 0.4
    expected = 1 + (1 / math.cosh(r)) ** 2 * (1 - 2 / (1 - math.tanh(r) ** 2 / 4))
    assert hom.hom_max(np.array([[r]])) == pytest.approx(expected, abs=1e-14)
    assert hom_analytic(np.array([[r]]), 7) == pytest.approx(expected, abs=1e-8)
    with pytest.raises(CWNotSupported):
        hom.hom_max(np.array([[r]]), cw=True)


def test_hom_max_matches_oracle_at_large_delay():
    b = np.array([[0.25, 0.1], [0.1, 0.2]])
    state = fock_oracle.build_squeezed_state(b, cutoff=8)
    assert fock_oracle.oracle_hom(state, 5) == pytest.approx(hom.hom_max(b), abs=1e-6)


def test_dip_curve_pulsed_symmetric_and_bounded():
    curve = hom.hom_dip_curve(jsa.double_gaussian(5.0), 0.3, q_range=(-20, 20))
    np.testing.assert_allclose(curve.probs, curve.probs[::-1], atol=1e-8)
    assert np.all((curve.probs >= 0) & (curve.probs <= 1))
    assert curve.q[np.argmin(curve.probs)] == 0
    assert curve.visibility == pytest.approx((curve.p_max - curve.p_min) / curve.p_max)
    assert curve.p_max == pytest.approx(curve.probs[0], rel=1e-6)


def test_dip_curve_weak_squeezing():
    model = jsa.double_gaussian(10.0)
    beta = jsa.build_beta(model, 0.1, jsa.minimal_grid(model)).values
    detW = matcalc.disentangle(beta).detW
    curve = hom.hom_dip_curve(model, 0.1, q_range=(-3, 3))
    assert curve.normalized.min() == pytest.approx((1 - detW) ** 2 / hom.hom_max(beta), rel=1e-8)
    weak = hom.hom_dip_curve(model, 0.005, q_range=(-3, 3))
    assert weak.normalized.min() < 1e-3
    assert weak.visibility > 0.999


def test_dip_curve_cw_uses_plateau():
    win = WindowSpec.at(0.0, 40, 1.0)
    curve = hom.hom_dip_curve(jsa.double_gaussian_cw(), 0.1, win, q_range=(-12, 12))
    # a 40-mode window keeps a relative slope ~1e-2 in q, so the curve maximum stands in
    assert not curve.plateau_found
    assert curve.p_max == pytest.approx(curve.probs.max())
    np.testing.assert_allclose(curve.probs, curve.probs[::-1], atol=1e-8)
    assert curve.p_min == pytest.approx(curve.probs[12])
    with pytest.raises(ValueError):
        hom.hom_dip_curve(jsa.double_gaussian_cw(), 0.1)


def test_find_plateau():
    flat = np.concatenate([np.linspace(0, 1, 10), np.ones(10)])
    val, found = hom.find_plateau(np.concatenate([flat[::-1], flat]))
    assert found and val == pytest.approx(1.0)
    _, found = hom.find_plateau(np.linspace(0, 1, 20))
    assert not found


def test_parallel_matches_serial():
    model = jsa.double_gaussian(5.0)
    a = hom.hom_dip_curve(model, 0.2, q_range=(-4, 4))
    b = hom.hom_dip_curve(model, 0.2, q_range=(-4, 4), workers=3)
    np.testing.assert_array_equal(a.probs, b.probs)
