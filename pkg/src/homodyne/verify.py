"""Self-checks behind the ``verify`` subcommand.

Each check compares two independent computations on seeded random
scenarios and reports the worst discrepancy against its tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .fock import FockConfig, oracle_expect, oracle_symmetrized
from .gw import KimbleModel, signal_referred_budget, theta_policy
from .modes import Sideband, SidebandSector, to_quadratures
from .moments import expect, noise_psd, number, symmetrized_correlator
from .readout import (
    Target,
    closed_form_psd_tb,
    closed_form_psd_ttheta,
    dbhd_observables,
    eight_port_ports,
    feasibility_table,
    t_b,
    t_theta,
)
from .states import InputStateSpec, LoSpec, lo_state

__all__ = ["CheckResult", "run_checks", "CHECKS"]


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    worst: float
    tol: float

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} {self.name}: worst={self.worst:.3e} tol={self.tol:.0e}"


def _random_scenario(rng: np.random.Generator, max_gamma: float):
    sector = SidebandSector.standard(float(rng.uniform(1.0, 100.0)))
    theta = float(rng.uniform(-math.pi, math.pi))
    g = float(rng.uniform(0.2, max_gamma))
    lo = LoSpec.polar(g, g, theta, theta)
    ap, am = sector.sideband_ops("a")
    dp = complex(*rng.uniform(-0.5, 0.5, 2))
    dm = complex(*rng.uniform(-0.5, 0.5, 2))
    eta = float(rng.uniform(0.2, 0.8))
    return sector, theta, lo, ap + dp, am + dm, eta, g


def check_oracle(n: int, seed: int = 1) -> CheckResult:
    """Engine versus truncated Fock space for ``t_theta`` and a port number."""
    rng = np.random.default_rng(seed)
    cfg = FockConfig(cutoff=14, vacuum_cutoff=3)
    worst = 0.0
    for _ in range(n):
        sector, theta, lo, bp, bm, eta, _ = _random_scenario(rng, 1.0)
        state = lo_state(sector, lo)
        tt = t_theta(sector, theta, eta, lo, bp, bm)
        ref = symmetrized_correlator(tt, tt, state).value
        worst = max(worst, abs(ref - oracle_symmetrized(tt, tt, state, cfg)))
        worst = max(worst, abs(expect(tt, state) - oracle_expect(tt, state, cfg)))
        d1 = number(eight_port_ports(sector, Sideband.UPPER, eta, bp)["D1"])
        worst = max(worst, abs(expect(d1, state) - oracle_expect(d1, state, cfg)))
    return CheckResult("fock-oracle equivalence", worst <= 1e-6, worst, 1e-6)


def check_closed_forms(n: int, seed: int = 2) -> CheckResult:
    """Engine spectral densities versus the re-derived closed forms."""
    rng = np.random.default_rng(seed)
    vac = InputStateSpec.vacuum()
    worst = 0.0
    for _ in range(n):
        sector, theta, lo, bp, bm, eta, g = _random_scenario(rng, 5.0)
        state = lo_state(sector, lo)
        gp, _ = lo.at()
        s12, s34 = dbhd_observables(eight_port_ports(sector, Sideband.UPPER, eta, bp), eta, gp)
        tbp, _ = t_b(s12, s34, gp)
        ref = closed_form_psd_tb(noise_psd(bp, vac), expect(number(bp), vac).real, expect(bp, vac), gp, eta, "derived")
        worst = max(worst, abs(noise_psd(tbp, state) - ref) / max(1.0, abs(ref)))
        b1, b2 = to_quadratures(bp, bm)
        bth = math.cos(theta) * b1 + math.sin(theta) * b2
        ref = closed_form_psd_ttheta(
            noise_psd(bth, vac),
            (expect(number(bp), vac) + expect(number(bm), vac)).real,
            (expect(b1, vac) + expect(b1.dag, vac)).real,
            (expect(b2, vac) + expect(b2.dag, vac)).real,
            g,
            eta,
            theta,
            "derived",
        )
        tt = t_theta(sector, theta, eta, lo, bp, bm)
        worst = max(worst, abs(noise_psd(tt, state) - ref) / max(1.0, abs(ref)))
    return CheckResult("closed-form spectral densities", worst <= 1e-10, worst, 1e-10)


def check_kimble_bound(n: int, seed: int = 3) -> CheckResult:
    """Budget with ``cot theta = K/2`` against ``h_SQL^2 (K/4 + 1/K)``."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for k in rng.uniform(0.1, 10.0, n):
        model = KimbleModel(float(k), float(rng.uniform(0, math.pi)), 1.0)
        row = signal_referred_budget(model, [10.0], policy=theta_policy("cot_half_K"), large_gamma=True)[0]
        worst = max(worst, abs(row.s_total - (k / 4 + 1 / k)))
    return CheckResult("kimble bound", worst <= 1e-9, worst, 1e-9)


def check_table() -> CheckResult:
    rows = feasibility_table()
    infeasible = {r.pair for r in rows if not r.feasible}
    ok = len(rows) == 6 and infeasible == {(Target.B1, Target.B2), (Target.B1DAG, Target.B2DAG)}
    return CheckResult("feasibility table", ok, 0.0 if ok else 1.0, 0.0)


CHECKS: dict[str, Callable[[int], CheckResult]] = {
    "oracle": check_oracle,
    "closed_forms": check_closed_forms,
    "kimble": check_kimble_bound,
    "table": lambda n: check_table(),
}


def run_checks(level: str = "quick") -> list[CheckResult]:
    """Run every check with 5 (quick) or 50 (full) random scenarios."""
    n = {"quick": 5, "full": 50}[level]
    return [fn(n) for fn in CHECKS.values()]
