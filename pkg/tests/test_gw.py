import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from homodyne.fock import FockConfig, oracle_symmetrized
from homodyne.gw import (
    KimbleModel,
    PassThroughModel,
    kimble_output,
    response_and_noise,
    signal_referred_budget,
    theta_policy,
)
from homodyne.modes import SidebandSector, commutator, commutator_pair, to_quadratures
from homodyne.moments import noise_psd
from homodyne.states import InputStateSpec

from .conftest import angles, small_complex

VAC = InputStateSpec.vacuum()


def _sector(omega=1.0):
    return SidebandSector.standard(omega)


def test_kimble_identity_at_zero_coupling():
    s = _sector()
    bp, bm = kimble_output(KimbleModel(0.0), s)
    ap, am = s.sideband_ops("a")
    assert bp.allclose(ap) and bm.allclose(am)


def test_kimble_signal_displacement():
    s = _sector()
    h0 = 0.37
    b1, b2 = to_quadratures(*kimble_output(KimbleModel(2.0, 0.0, 1.0, h0), s))
    assert b2.d == pytest.approx(2 * h0)
    assert b1.d == pytest.approx(0.0, abs=1e-15)


@given(st.floats(0.01, 20), st.floats(-3, 3))
def test_kimble_preserves_commutators(k, beta):
    s = _sector()
    bp, bm = kimble_output(KimbleModel(k, beta), s)
    assert commutator_pair(bp, bp) == pytest.approx(1.0, abs=1e-12)
    assert commutator_pair(bm, bm) == pytest.approx(1.0, abs=1e-12)
    assert commutator_pair(bp, bm) == pytest.approx(0.0, abs=1e-12)
    assert commutator(bp, bm) == pytest.approx(0.0, abs=1e-12)


def test_negative_k_rejected():
    with pytest.raises(ValueError):
        kimble_output(KimbleModel(-1.0), _sector())
    with pytest.raises(ValueError):
        response_and_noise(KimbleModel(0.0), _sector(), 1.0)


def test_response_example():
    r, hn = response_and_noise(KimbleModel(2.0), _sector(), math.pi / 2)
    assert r == pytest.approx(2.0)
    assert noise_psd(hn, VAC) == pytest.approx(1.25)
    ref = oracle_symmetrized(hn, hn, VAC, FockConfig(cutoff=3))
    assert ref == pytest.approx(0.5 * 1.25, abs=1e-12)


@pytest.mark.parametrize("theta", [0.0, math.pi, 1e-14])
def test_response_vanishes(theta):
    with pytest.raises(ValueError):
        response_and_noise(KimbleModel(2.0), _sector(), theta)


@given(st.floats(0.05, 10), st.floats(0.1, 3.0), st.floats(0.2, 3), st.floats(-2, 2))
def test_kimble_noise_closed_form(k, theta, hsql, beta):
    r, hn = response_and_noise(KimbleModel(k, beta, hsql), _sector(), theta)
    cot = 1 / math.tan(theta)
    assert noise_psd(hn, VAC) == pytest.approx(hsql**2 / (2 * k) * ((cot - k) ** 2 + 1), rel=1e-12)
    assert abs(r) == pytest.approx(abs(math.sin(theta)) * math.sqrt(2 * k) / hsql)


@given(st.floats(0.05, 10), st.floats(0.1, 3.0))
def test_hn_definition_consistent(k, theta):
    """b_theta = R (h_n + h) at the operator level."""
    s = _sector()
    h = 0.3 - 0.2j
    model = KimbleModel(k, 0.4, 1.3, h)
    b1, b2 = to_quadratures(*kimble_output(model, s))
    bth = math.cos(theta) * b1 + math.sin(theta) * b2
    r, hn = response_and_noise(model, s, theta)
    assert bth.allclose(r * hn + r * h, 1e-12)


def test_theta_policy_examples():
    p = theta_policy("cot_half_K")
    assert p(KimbleModel(2.0), 1.0) == pytest.approx(math.pi / 4)
    assert p(KimbleModel(1e-12), 1.0) == pytest.approx(math.pi / 2)
    assert p(KimbleModel(2 * math.sqrt(3)), 1.0) == pytest.approx(math.pi / 6)
    assert theta_policy("fixed", 0.3)(PassThroughModel(), 1.0) == 0.3
    with pytest.raises(ValueError):
        theta_policy("fixed")
    with pytest.raises(ValueError):
        p(PassThroughModel(), 1.0)


@given(st.floats(0.01, 100))
def test_cot_policy_range(k):
    th = theta_policy("cot_half_K")(KimbleModel(k), 1.0)
    assert 0 < th < math.pi
    assert 1 / math.tan(th) == pytest.approx(k / 2, rel=1e-9)


def test_budget_examples():
    grid = [1.0, 10.0, 100.0]
    rows = signal_referred_budget(KimbleModel(2.0), grid, large_gamma=True)
    assert [r.s_total for r in rows] == pytest.approx([1.0] * 3, abs=1e-12)
    rows = signal_referred_budget(KimbleModel(2.0), grid, policy=theta_policy("fixed", math.pi / 2), large_gamma=True)
    assert [r.s_total for r in rows] == pytest.approx([1.5] * 3, abs=1e-12)
    rows = signal_referred_budget(PassThroughModel(1.0), grid, large_gamma=True)
    assert [r.s_total for r in rows] == pytest.approx([2.0] * 3, abs=1e-12)
    assert all(r.h_estimate == 0 for r in rows)
    assert len(signal_referred_budget(KimbleModel(2.0), [5.0])) == 1
    for r in rows:
        assert r.s_total == pytest.approx(r.s_hn + r.readout_penalty) and r.s_total >= 0


@settings(max_examples=30)
@given(st.floats(0.1, 10), st.floats(-2, 2), st.floats(0.3, 3), st.floats(0.2, 2.9), small_complex(1e-2))
def test_budget_matches_engine_at_half(k, beta, hsql, theta, h):
    model = KimbleModel(k, beta, hsql, h)
    row = signal_referred_budget(model, [3.0], gamma_abs=2.0, policy=theta_policy("fixed", theta))[0]
    assert row.s_total == pytest.approx(row.s_engine, rel=1e-9)
    assert row.h_estimate == pytest.approx(h, abs=1e-10)


def test_signal_power_flag():
    model = PassThroughModel(1.0, 0.5)
    with_sig = signal_referred_budget(model, [1.0], gamma_abs=1.0)[0]
    without = signal_referred_budget(model, [1.0], gamma_abs=1.0, include_signal_power=False)[0]
    assert with_sig.s_total == pytest.approx(without.s_total + 0.25)
    assert with_sig.s_total == pytest.approx(with_sig.s_engine)


@given(st.floats(0.1, 0.9).filter(lambda e: abs(e - 0.5) > 1e-3), angles.filter(lambda t: abs(math.sin(t)) > 0.1), small_complex(1.0))
def test_signal_recovery_any_eta(eta, theta, h):
    model = KimbleModel(1.7, 0.3, 1.0, h)
    row = signal_referred_budget(model, [2.0], eta=eta, gamma_abs=5.0, policy=theta_policy("fixed", theta))[0]
    assert row.h_estimate == pytest.approx(h, abs=1e-10)
    assert row.s_total == pytest.approx(row.s_engine)


def test_budget_argument_checks():
    with pytest.raises(ValueError):
        signal_referred_budget(KimbleModel(2.0), [1.0], eta=0.3, large_gamma=True)
    with pytest.raises(ValueError):
        signal_referred_budget(KimbleModel(2.0), [1.0], gamma_abs=0.0)
    with pytest.raises(ValueError):
        signal_referred_budget(PassThroughModel(0.0), [1.0])


@given(st.floats(0.05, 20), st.floats(0.05, 3.1))
def test_kimble_identity(k, theta):
    cot = 1 / math.tan(theta)
    lhs = (cot - k) ** 2 + 1 + 1 / math.sin(theta) ** 2
    rhs = 2 * (cot - k / 2) ** 2 + k**2 / 2 + 2
    assert lhs == pytest.approx(rhs, rel=1e-12)


def test_frequency_dependent_parameters():
    model = KimbleModel(lambda w: 4.0 / w, lambda w: 0.1 * w, lambda w: 1.0 + w, 0.0)
    rows = signal_referred_budget(model, [1.0, 2.0], large_gamma=True)
    for r, w in zip(rows, (1.0, 2.0)):
        k = 4.0 / w
        assert r.s_total == pytest.approx((1.0 + w) ** 2 * (k / 4 + 1 / k))
