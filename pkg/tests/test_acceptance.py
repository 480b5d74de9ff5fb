"""Acceptance criteria 1-9.

Each test prints one ``PASS``/``FAIL`` line (run with ``-s`` to see them as
they happen; they are also repeated in the terminal summary).
"""

import cmath
import contextlib
import math
import time

import numpy as np
import pytest

from homodyne.fock import FockConfig, oracle_expect, oracle_symmetrized
from homodyne.gw import KimbleModel, main_output, response_and_noise, signal_referred_budget, theta_policy
from homodyne.modes import Sideband, SidebandSector, commutator, commutator_pair, to_quadratures
from homodyne.moments import expect, noise_psd, number, symmetrized_correlator
from homodyne.network import build_eight_port, input_mode_decomposition
from homodyne.readout import (
    Target,
    balanced_ports,
    balanced_s,
    closed_form_psd_tb,
    closed_form_psd_ttheta,
    dbhd_observables,
    eight_port_ports,
    feasibility,
    feasibility_table,
    t_b,
    t_theta,
)
from homodyne.states import InputStateSpec, LoSpec, lo_state

from .conftest import ACCEPTANCE_LINES

VAC = InputStateSpec.vacuum()
ORACLE = FockConfig(cutoff=14, vacuum_cutoff=3)


class PublishedFormMismatch(AssertionError):
    """The printed general-eta relation disagrees with the exact value."""


@contextlib.contextmanager
def criterion(n: int, what: str, budget: float):
    """Print the PASS/FAIL line of criterion ``n`` and enforce its runtime."""
    info: dict[str, str] = {}
    start = time.perf_counter()
    try:
        yield info
        elapsed = time.perf_counter() - start
        assert elapsed < budget, f"took {elapsed:.2f}s, budget {budget}s"
    except AssertionError as exc:
        elapsed = time.perf_counter() - start
        line = f"FAIL criterion {n}: {what} ({elapsed:.2f}s) {info.get('detail', '')} [{exc}]"
        print("\n" + line)
        ACCEPTANCE_LINES.append(line)
        raise
    line = f"PASS criterion {n}: {what} ({elapsed:.2f}s) {info.get('detail', '')}".rstrip()
    print("\n" + line)
    ACCEPTANCE_LINES.append(line)


def _cplx(rng, scale=1.0):
    return complex(*rng.uniform(-scale, scale, 2))


def _worst(pairs):
    return max((abs(a - b) for a, b in pairs), default=0.0)


def test_criterion_1_balanced_identity():
    rng = np.random.default_rng(101)
    with criterion(1, "balanced homodyne <s> = 2 Re(gamma^* <b>)", 5.0) as info:
        engine, oracle = [], []
        for i in range(100):
            s = SidebandSector.standard(float(rng.uniform(0.1, 100)))
            eta = float(rng.uniform(0.05, 0.95))
            small = i % 2 == 0
            gamma = cmath.rect(rng.uniform(0.2, 1.0 if small else 20.0), rng.uniform(-math.pi, math.pi))
            d = _cplx(rng)
            lo = LoSpec(gamma, gamma)
            if small:
                # displacement carried by the state so the oracle sees it in Fock space
                state = lo_state(s, lo, extra={s.mode("a+"): d})
                b = s.op("a+")
            else:
                state = lo_state(s, lo)
                b = s.op("a+") + d
            q = balanced_s(eta, gamma, balanced_ports(s, Sideband.UPPER, eta, b))
            want = 2 * (gamma.conjugate() * d).real
            engine.append((expect(q, state), want))
            if small:
                oracle.append((oracle_expect(q, state, ORACLE), want))
        e, o = _worst(engine), _worst(oracle)
        info["detail"] = f"engine worst {e:.1e} (tol 1e-12), oracle worst {o:.1e} (tol 1e-6)"
        assert e <= 1e-12 and o <= 1e-6


def test_criterion_2_feasibility_table():
    expected = {
        (Target.B1, Target.B2): None,
        (Target.B1DAG, Target.B2DAG): None,
        (Target.B1, Target.B1DAG): (1, "e^{-i theta}", "beta = (|gamma_+|/|gamma_-|) alpha"),
        (Target.B1, Target.B2DAG): (-1j, "i |gamma_-| e^{-i theta}", "beta = -i (|gamma_+|/|gamma_-|) alpha"),
        (Target.B2, Target.B1DAG): (1j, "i |gamma_-| e^{-i theta}", "beta = +i (|gamma_+|/|gamma_-|) alpha"),
        (Target.B2, Target.B2DAG): (-1, "e^{-i theta}", "beta = -(|gamma_+|/|gamma_-|) alpha"),
    }
    with criterion(2, "sideband-combination table", 1.0) as info:
        rows = {r.pair: r for r in feasibility_table()}
        assert set(rows) == set(expected) and len(feasibility_table()) == 6
        for pair, exp in expected.items():
            r = rows[pair]
            assert feasibility(tuple(t.value for t in reversed(pair))) == r
            if exp is None:
                assert not r.feasible
                continue
            unit, pattern, relation = exp
            assert r.feasible and r.beta_over_alpha_unit == unit
            assert pattern in r.gamma_constraint and r.alpha_beta_relation == relation
        info["detail"] = "6 rows, exact match"


def test_criterion_3_dbhd_expectations():
    rng = np.random.default_rng(303)
    with criterion(3, "<t_b+> = <b> and <t_theta> = cos <b1> + sin <b2>", 5.0) as info:
        worst = 0.0
        for _ in range(100):
            s = SidebandSector.standard(float(rng.uniform(0.1, 100)))
            eta = float(rng.uniform(0.02, 0.98))
            theta = float(rng.uniform(-math.pi, math.pi))
            lo = LoSpec.polar(rng.uniform(0.1, 10), rng.uniform(0.1, 10), theta, theta)
            gp, _ = lo.at()
            bp, bm = s.op("a+") + _cplx(rng), s.op("a-") + _cplx(rng)
            state = lo_state(s, lo)
            s12, s34 = dbhd_observables(eight_port_ports(s, Sideband.UPPER, eta, bp), eta, gp)
            tbp, _ = t_b(s12, s34, gp)
            worst = max(worst, abs(expect(tbp, state) - bp.d))
            b1, b2 = to_quadratures(bp, bm)
            want = math.cos(theta) * b1.d + math.sin(theta) * b2.d
            worst = max(worst, abs(expect(t_theta(s, theta, eta, lo, bp, bm), state) - want))
        info["detail"] = f"worst {worst:.1e} (tol 1e-12)"
        assert worst <= 1e-12


def _psd_scenario(rng, eta):
    s = SidebandSector.standard(float(rng.uniform(0.1, 100)))
    theta = float(rng.uniform(-math.pi, math.pi))
    g = float(rng.uniform(0.3, 10))
    lo = LoSpec.polar(g, g, theta, theta)
    dp, dm = _cplx(rng), _cplx(rng)
    bp, bm = s.op("a+") + dp, s.op("a-") + dm
    state = lo_state(s, lo)
    gp, _ = lo.at()
    s12, s34 = dbhd_observables(eight_port_ports(s, Sideband.UPPER, eta, bp), eta, gp)
    tbp, _ = t_b(s12, s34, gp)
    b1, b2 = to_quadratures(bp, bm)
    bth = math.cos(theta) * b1 + math.sin(theta) * b2
    summaries = (
        noise_psd(bth, VAC),
        (expect(number(bp), VAC) + expect(number(bm), VAC)).real,
        (expect(b1, VAC) + expect(b1.dag, VAC)).real,
        (expect(b2, VAC) + expect(b2.dag, VAC)).real,
        g,
        eta,
        theta,
    )
    tb_args = (noise_psd(bp, VAC), expect(number(bp), VAC).real, dp, gp, eta)
    return noise_psd(tbp, state), tb_args, noise_psd(t_theta(s, theta, eta, lo, bp, bm), state), summaries


def _rel(a, b):
    return abs(a - b) / max(1.0, abs(b))


@pytest.mark.xfail(raises=PublishedFormMismatch, strict=True, reason="printed general-eta imbalance terms are wrong")
def test_criterion_4_noise_spectral_relations():
    rng = np.random.default_rng(404)
    with criterion(4, "noise spectral relations", 10.0) as info:
        half, derived, published = 0.0, 0.0, 0.0
        for i in range(60):
            eta = 0.5 if i % 3 == 0 else float(rng.uniform(0.05, 0.95))
            s_tb, tb_args, s_tt, summ = _psd_scenario(rng, eta)
            if eta == 0.5:
                g2 = abs(tb_args[3]) ** 2
                simple = tb_args[0] + 2 * tb_args[1] / g2 + 1
                half = max(half, _rel(s_tb, simple), _rel(s_tb, closed_form_psd_tb(*tb_args, "published")))
                half = max(half, _rel(s_tt, closed_form_psd_ttheta(*summ, "published")))
            derived = max(derived, _rel(s_tb, closed_form_psd_tb(*tb_args, "derived")))
            derived = max(derived, _rel(s_tt, closed_form_psd_ttheta(*summ, "derived")))
            published = max(published, _rel(s_tb, closed_form_psd_tb(*tb_args, "published")))
            published = max(published, _rel(s_tt, closed_form_psd_ttheta(*summ, "published")))
        info["detail"] = (
            f"eta=1/2 worst {half:.1e}, re-derived general-eta worst {derived:.1e}, "
            f"printed general-eta worst {published:.1e} (tol 1e-10)"
        )
        assert half <= 1e-10 and derived <= 1e-10
        if published > 1e-10:
            raise PublishedFormMismatch(f"printed general-eta relations off by up to {published:.2e}")


def test_criterion_5_vacuum_number():
    with criterion(5, "vacuum b at eta=1/2 gives S = 2", 5.0) as info:
        s = SidebandSector.standard(1.0)
        vals = []
        for g in (0.5, 1.0, 10.0):
            lo = LoSpec(g, g)
            state = lo_state(s, lo)
            s12, s34 = dbhd_observables(eight_port_ports(s, Sideband.UPPER, 0.5), 0.5, g)
            vals.append(noise_psd(t_b(s12, s34, g)[0], state))
            vals.append(noise_psd(t_theta(s, 0.0, 0.5, lo), state))
        worst = max(abs(v - 2.0) for v in vals)
        info["detail"] = f"worst |S-2| {worst:.1e} (tol 1e-10)"
        assert worst <= 1e-10


def test_criterion_6_oracle_equivalence():
    rng = np.random.default_rng(606)
    with criterion(6, "engine vs Fock oracle on 50 eight-port scenarios", 60.0) as info:
        worst = 0.0
        for _ in range(50):
            s = SidebandSector.standard(float(rng.uniform(0.1, 100)))
            eta = float(rng.uniform(0.1, 0.9))
            theta = float(rng.uniform(-math.pi, math.pi))
            lo = LoSpec.polar(rng.uniform(0.1, 1.0), rng.uniform(0.1, 1.0), theta, theta)
            gp, _ = lo.at()
            extra = {s.mode("a+"): _cplx(rng, 0.5), s.mode("a-"): _cplx(rng, 0.5)}
            state = lo_state(s, lo, extra=extra)
            bp, bm = s.op("a+") + _cplx(rng, 0.3), s.op("a-")
            tt = t_theta(s, theta, eta, lo, bp, bm)
            s12, s34 = dbhd_observables(eight_port_ports(s, Sideband.UPPER, eta, bp), eta, gp)
            tbp, _ = t_b(s12, s34, gp)
            for q in (tt, tbp, s12):
                worst = max(worst, abs(expect(q, state) - oracle_expect(q, state, ORACLE)))
            for q, qp in ((tt, tt), (tbp, tbp), (tt, tbp)):
                ref = symmetrized_correlator(q, qp, state).value
                worst = max(worst, abs(ref - oracle_symmetrized(q, qp, state, ORACLE)))
        info["detail"] = f"worst {worst:.1e} (tol 1e-6)"
        assert worst <= 1e-6


def test_criterion_7_canonical_preservation():
    rng = np.random.default_rng(707)
    with criterion(7, "eight-port commutators", 5.0) as info:
        worst = 0.0
        exact = True
        s = SidebandSector.standard(1.0)
        for eta in rng.uniform(0.01, 0.99, 20):
            for sb in Sideband:
                ports = eight_port_ports(s, sb, float(eta), s.op("a" + sb.sign))
                names = sorted(ports)
                for p in names:
                    for q in names:
                        want = 1.0 if p == q else 0.0
                        worst = max(worst, abs(commutator_pair(ports[p], ports[q]) - want))
                        worst = max(worst, abs(commutator(ports[p], ports[q])))
            a = input_mode_decomposition(build_eight_port(float(eta)), omega=1.0)
            worst = max(worst, abs(commutator_pair(a, a) - 1.0))
            for stem in "lef":
                for sign in "+-":
                    x = s.op(stem + sign)
                    exact &= commutator_pair(a, x) == 0 and commutator(a, x) == 0
        info["detail"] = f"worst {worst:.1e} (tol 1e-12), l/e/f commutators exactly zero: {exact}"
        assert worst <= 1e-12 and exact


def test_criterion_8_kimble_bound():
    rng = np.random.default_rng(808)
    with criterion(8, "Kimble bound h_SQL^2 (K/4 + 1/K)", 10.0) as info:
        policy = theta_policy("cot_half_K")
        worst = 0.0
        for hsql in (1.0, 0.37, 4.2):
            ks = np.linspace(0.05, 20.0, 200)
            model = KimbleModel(lambda w: w, 0.3, hsql)
            rows = signal_referred_budget(model, ks, policy=policy, large_gamma=True)
            want = hsql**2 * (ks / 4 + 1 / ks)
            worst = max(worst, max(abs(r.s_total - w) / hsql**2 for r, w in zip(rows, want)))
        fine = np.round(np.arange(1.5, 2.5 + 5e-4, 1e-3), 10)
        rows = signal_referred_budget(KimbleModel(lambda w: w, 0.0, 1.0), fine, policy=policy, large_gamma=True)
        totals = np.array([r.s_total for r in rows])
        k_min = fine[int(np.argmin(totals))]
        ident = 0.0
        for _ in range(1000):
            k, th = rng.uniform(0.01, 20), rng.uniform(0.01, math.pi - 0.01)
            cot = 1 / math.tan(th)
            lhs = 2 * (cot - k / 2) ** 2 + k**2 / 2 + 2
            rhs = (cot - k) ** 2 + 1 + 1 / math.sin(th) ** 2
            ident = max(ident, abs(lhs - rhs) / max(1.0, abs(rhs)))
        info["detail"] = (
            f"sweep worst {worst:.1e} (tol 1e-9), argmin K={k_min:.3f} min={totals.min():.12f}, "
            f"identity worst {ident:.1e} (tol 1e-12)"
        )
        assert worst <= 1e-9 and abs(k_min - 2.0) < 1e-9 and abs(totals.min() - 1.0) <= 1e-9
        assert ident <= 1e-12


def test_criterion_9_signal_recovery():
    rng = np.random.default_rng(909)
    with criterion(9, "<t_theta>/R recovers h", 5.0) as info:
        worst = 0.0
        for _ in range(100):
            omega = float(rng.uniform(1, 1000))
            s = SidebandSector.standard(omega)
            h = _cplx(rng, 1e-2)
            model = KimbleModel(float(rng.uniform(0.05, 20)), float(rng.uniform(-3, 3)), float(rng.uniform(0.1, 5)), h)
            theta = float(rng.uniform(0.1, math.pi - 0.1)) * (1 if rng.uniform() < 0.5 else -1)
            eta = float(rng.uniform(0.05, 0.95))
            lo = LoSpec.polar(rng.uniform(0.5, 20), rng.uniform(0.5, 20), theta, theta)
            bp, bm = main_output(model, s, theta)
            r, _ = response_and_noise(model, s, theta)
            got = expect(t_theta(s, theta, eta, lo, bp, bm), lo_state(s, lo)) / r
            worst = max(worst, abs(got - h))
        info["detail"] = f"worst {worst:.1e} (tol 1e-10)"
        assert worst <= 1e-10
