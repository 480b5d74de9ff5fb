import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from homodyne.fock import FockConfig, oracle_expect, oracle_symmetrized
from homodyne.modes import SectorMismatchError, SidebandSector, to_quadratures
from homodyne.moments import QuadObservable, expect, mean_field, noise_psd, number, symmetrized_correlator
from homodyne.network import build_simple_homodyne, propagate
from homodyne.readout import t_b, dbhd_observables, eight_port_ports
from homodyne.states import InputStateSpec, LoSpec, lo_state

from .conftest import affine_modes, small_complex

R2 = math.sqrt(2.0)
VAC = InputStateSpec.vacuum()
CFG = FockConfig(cutoff=14, vacuum_cutoff=3)


def test_mean_field_examples(sector):
    l = sector.op("l+")
    assert mean_field(l, InputStateSpec({sector.mode("l+"): 2 + 1j})) == 2 + 1j
    assert mean_field(sector.op("e+"), VAC) == 0
    x = ((sector.op("a+") + 1.0) - sector.op("e+")) / R2
    assert mean_field(x, VAC) == pytest.approx(1 / R2)


def test_expect_examples(sector):
    st_ = InputStateSpec({sector.mode("l+"): 0.5})
    assert expect(number(sector.op("l+")), st_) == pytest.approx(0.25)
    assert expect(number(sector.op("a+").dag), VAC) == pytest.approx(1.0)


def test_simple_homodyne_port(sector):
    p = propagate(build_simple_homodyne(0.5), sector, inputs={"b": sector.op("a+") + 1.0})
    state = InputStateSpec({sector.mode("l+"): 2.0})
    n = number(p["PD"])
    # eta n_b + (1-eta)|g|^2 + sqrt(eta(1-eta)) 2 Re(g <b^dag>)
    assert expect(n, state) == pytest.approx(0.5 * 1 + 0.5 * 4 + 0.5 * (2 * 1 * 2))
    assert expect(n, state) == pytest.approx(oracle_expect(n, state, FockConfig(cutoff=30, vacuum_cutoff=3)), abs=1e-8)


def test_coherent_number_correlator(sector):
    g = 0.5
    state = InputStateSpec({sector.mode("l+"): g})
    n = number(sector.op("l+"))
    r = symmetrized_correlator(n, n, state)
    assert r.product_part == pytest.approx(g**4)
    # shot-noise part of the symmetrized correlator is |g|^2, i.e. psd/2
    assert r.value - r.product_part == pytest.approx(abs(g) ** 2)
    assert r.psd == pytest.approx(2 * abs(g) ** 2)
    assert r.value == pytest.approx(oracle_symmetrized(n, n, state, FockConfig()), abs=1e-6)


def test_vacuum_tb_psd(sector):
    gamma = 1.3 - 0.4j
    lo = LoSpec(gamma, gamma)
    s12, s34 = dbhd_observables(eight_port_ports(sector, eta=0.5), 0.5, gamma)
    tbp, _ = t_b(s12, s34, gamma)
    assert noise_psd(tbp, lo_state(sector, lo)) == pytest.approx(2.0, abs=1e-12)


def test_different_sectors():
    s1, s2 = SidebandSector.standard(1.0), SidebandSector.standard(2.0)
    q = number(s1.op("l+"))
    qp = number(s2.op("l+"))
    st1 = InputStateSpec({s1.mode("l+"): 1.0})
    st2 = InputStateSpec({s2.mode("l+"): 2.0})
    r = symmetrized_correlator(q, qp, st1, st2)
    assert r.psd == 0 and not r.same_sector
    assert r.product_part == pytest.approx(1.0 * 4.0)
    with pytest.raises(SectorMismatchError):
        noise_psd(q, st1, s2)


def test_noise_psd_examples(sector):
    assert noise_psd(QuadObservable([], 3.0), VAC) == 0
    b1, _ = to_quadratures(*sector.sideband_ops("a"))
    assert noise_psd(b1, VAC) == pytest.approx(1.0)
    assert symmetrized_correlator(b1, b1, VAC).value == pytest.approx(oracle_symmetrized(b1, b1, VAC, CFG), abs=1e-12)


@st.composite
def observables(draw):
    terms = draw(st.lists(st.tuples(st.floats(-2, 2), affine_modes()), min_size=1, max_size=3))
    return QuadObservable(terms, draw(st.floats(-2, 2)))


@st.composite
def states(draw):
    s = SidebandSector.standard(1.0)
    modes = draw(st.lists(st.sampled_from(sorted(s)), max_size=3, unique=True))
    return InputStateSpec({m: draw(small_complex(1.0)) for m in modes})


@given(observables(), states())
def test_self_adjoint_expectation_real(q, state):
    assert q.is_self_adjoint()
    assert abs(expect(q, state).imag) <= 1e-10 * max(1.0, abs(expect(q, state)))


@given(observables(), states())
def test_psd_nonnegative(q, state):
    assert noise_psd(q, state) >= -1e-10


@given(observables(), states(), small_complex())
def test_psd_shift_invariant(q, state, c):
    assert noise_psd(q + c, state) == pytest.approx(noise_psd(q, state), abs=1e-9)


@given(observables(), observables(), states(), small_complex(), small_complex())
def test_expect_linear(q1, q2, state, a, b):
    lhs = expect(a * q1 + b * q2, state)
    assert lhs == pytest.approx(a * expect(q1, state) + b * expect(q2, state), abs=1e-9)


@settings(max_examples=25)
@given(observables(), observables(), states())
def test_engine_matches_oracle_random(q, qp, state):
    # coefficients are bounded by 2 and amplitudes by sqrt2, so cutoff 14 suffices
    cfg = FockConfig(cutoff=16, vacuum_cutoff=3)
    r = symmetrized_correlator(q, qp, state)
    assert r.value == pytest.approx(oracle_symmetrized(q, qp, state, cfg), abs=1e-6)
    assert expect(q, state) == pytest.approx(oracle_expect(q, state, cfg), abs=1e-6)
