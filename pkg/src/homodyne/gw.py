"""Main-interferometer models and signal-referred noise budgets.

Two models feed the eight-port readout:

* :class:`PassThroughModel` returns vacuum sidebands with the classical
  signal ``R h`` displaced along the readout quadrature, so that
  ``b_theta = a_theta + R h``.
* :class:`KimbleModel` is the Fabry-Perot input-output relation
  ``b1 = a1 e^{2i beta}``,
  ``b2 = (a2 - K a1) e^{2i beta} + sqrt(2K) h/h_SQL e^{i beta}``.

Parameters may be constants or callables of the sideband frequency.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass
from typing import Callable, Sequence, Union

from .modes import AffineMode, SidebandSector, from_quadratures, to_quadratures
from .moments import expect, noise_psd, number
from .readout import t_theta
from .states import InputStateSpec, LoSpec, lo_state

__all__ = [
    "PassThroughModel",
    "KimbleModel",
    "GwModel",
    "NoiseBudgetRow",
    "ThetaPolicy",
    "theta_policy",
    "main_output",
    "kimble_output",
    "response_and_noise",
    "signal_referred_budget",
    "BUDGET_COLUMNS",
]

RealFn = Union[float, Callable[[float], float]]
ComplexFn = Union[complex, Callable[[float], complex]]


def _at(f, omega: float):
    return f(omega) if callable(f) else f


@dataclass(frozen=True)
class PassThroughModel:
    """Generic linear response: ``b_theta = a_theta + R(Omega) h(Omega)``.

    The noise is the vacuum of the main input, so ``S_hn = 1/|R|^2``.
    """

    response: ComplexFn = 1.0
    h: ComplexFn = 0.0

    def signal(self, omega: float) -> complex:
        return complex(_at(self.h, omega))

    def without_signal(self) -> "PassThroughModel":
        return PassThroughModel(self.response, 0.0)


@dataclass(frozen=True)
class KimbleModel:
    """Fabry-Perot input-output relation with coupling ``K`` and phase ``beta_fp``."""

    K: RealFn
    beta_fp: RealFn = 0.0
    h_sql: RealFn = 1.0
    h: ComplexFn = 0.0

    def params(self, omega: float, allow_zero_k: bool = False) -> tuple[float, float, float]:
        k = float(_at(self.K, omega))
        beta = float(_at(self.beta_fp, omega))
        hsql = float(_at(self.h_sql, omega))
        if not (k > 0 or (allow_zero_k and k == 0)):
            raise ValueError(f"K must be positive, got {k} at omega={omega}")
        if not hsql > 0:
            raise ValueError(f"h_sql must be positive, got {hsql} at omega={omega}")
        return k, beta, hsql

    def signal(self, omega: float) -> complex:
        return complex(_at(self.h, omega))

    def without_signal(self) -> "KimbleModel":
        return KimbleModel(self.K, self.beta_fp, self.h_sql, 0.0)


GwModel = Union[PassThroughModel, KimbleModel]


def kimble_output(model: KimbleModel, sector: SidebandSector) -> tuple[AffineMode, AffineMode]:
    """Output sidebands ``(b+, b-)`` over the input modes ``a+``/``a-``.

    ``K = 0`` is accepted here and gives the identity map (plus signal-free
    phase ``e^{2i beta}``); negative ``K`` is rejected.
    """
    k, beta, hsql = model.params(sector.omega, allow_zero_k=True)
    a1, a2 = to_quadratures(*sector.sideband_ops("a"))
    ph2 = cmath.exp(2j * beta)
    b1 = a1 * ph2
    signal = math.sqrt(2.0 * k) * model.signal(sector.omega) / hsql * cmath.exp(1j * beta)
    b2 = (a2 - k * a1) * ph2 + signal
    return from_quadratures(b1, b2)


def main_output(
    model: GwModel, sector: SidebandSector, theta: float
) -> tuple[AffineMode, AffineMode]:
    """Output sidebands of either model; ``theta`` sets the pass-through signal axis."""
    if isinstance(model, KimbleModel):
        return kimble_output(model, sector)
    rh = complex(_at(model.response, sector.omega)) * model.signal(sector.omega)
    a1, a2 = to_quadratures(*sector.sideband_ops("a"))
    return from_quadratures(a1 + rh * math.cos(theta), a2 + rh * math.sin(theta))


def _check_theta(theta: float) -> None:
    if abs(math.sin(theta)) < 1e-12:
        raise ValueError(f"homodyne angle {theta} gives zero response")


def response_and_noise(
    model: GwModel, sector: SidebandSector, theta: float
) -> tuple[complex, AffineMode]:
    """Response ``R`` and strain-referred noise ``h_n`` with ``b_theta = R (h_n + h)``."""
    a1, a2 = to_quadratures(*sector.sideband_ops("a"))
    if isinstance(model, PassThroughModel):
        r = complex(_at(model.response, sector.omega))
        if r == 0:
            raise ValueError("pass-through response vanishes")
        return r, (math.cos(theta) * a1 + math.sin(theta) * a2) / r
    _check_theta(theta)
    k, beta, hsql = model.params(sector.omega)
    r = cmath.exp(1j * beta) * math.sin(theta) * math.sqrt(2.0 * k) / hsql
    cot = math.cos(theta) / math.sin(theta)
    hn = cmath.exp(1j * beta) * hsql / math.sqrt(2.0 * k) * ((cot - k) * a1 + a2)
    return r, hn


class ThetaPolicy(str, enum.Enum):
    FIXED = "fixed"
    COT_HALF_K = "cot_half_K"


def theta_policy(
    kind: ThetaPolicy | str, theta: float | None = None
) -> Callable[[GwModel, float], float]:
    """Homodyne angle as a function of ``(model, omega)``.

    ``fixed`` returns ``theta``; ``cot_half_K`` returns ``arccot(K/2)`` in
    ``(0, pi)``.
    """
    kind = ThetaPolicy(kind)
    if kind is ThetaPolicy.FIXED:
        if theta is None:
            raise ValueError("fixed policy needs theta")
        value = float(theta)
        return lambda model, omega: value

    def cot_half_k(model: GwModel, omega: float) -> float:
        if not isinstance(model, KimbleModel):
            raise ValueError("cot_half_K policy needs a model with K")
        k, _, _ = model.params(omega)
        return math.pi / 2 - math.atan(k / 2.0)

    return cot_half_k


BUDGET_COLUMNS = ("omega", "theta", "s_hn", "readout_penalty", "s_total", "re_h_est", "im_h_est")


@dataclass(frozen=True)
class NoiseBudgetRow:
    """Signal-referred budget at one sideband frequency.

    ``s_engine`` is the moment-engine spectral density of ``t_theta``
    divided by ``|R|^2``; at ``eta = 1/2`` without the large-``gamma`` flag it
    equals ``s_total``.
    """

    omega: float
    theta: float
    s_hn: float
    readout_penalty: float
    s_total: float
    h_estimate: complex
    s_engine: float

    def as_csv_row(self) -> tuple[float, ...]:
        return (
            self.omega,
            self.theta,
            self.s_hn,
            self.readout_penalty,
            self.s_total,
            self.h_estimate.real,
            self.h_estimate.imag,
        )


def signal_referred_budget(
    model: GwModel,
    grid: Sequence[float],
    eta: float = 0.5,
    gamma_abs: float = 1.0e3,
    policy: Callable[[GwModel, float], float] | None = None,
    large_gamma: bool = False,
    include_signal_power: bool = True,
) -> list[NoiseBudgetRow]:
    """Noise budget of the eight-port ``t_theta`` readout over ``grid``.

    At ``eta = 1/2`` the total is ``S_hn + (1 + <n_b+ + n_b->/|gamma|^2)/|R|^2``;
    ``large_gamma`` drops the photon-number term.  For other ``eta`` the total
    is the engine spectral density and ``large_gamma`` is rejected.

    Args:
        include_signal_power: Whether the photon numbers in the penalty count
            the classical signal displacement.
    """
    if policy is None:
        kind = ThetaPolicy.COT_HALF_K if isinstance(model, KimbleModel) else ThetaPolicy.FIXED
        policy = theta_policy(kind, math.pi / 2)
    if not gamma_abs > 0:
        raise ValueError("gamma_abs must be positive")
    balanced = eta == 0.5
    if large_gamma and not balanced:
        raise ValueError("the large-gamma limit is only defined for eta = 1/2")
    rows = []
    quiet = model.without_signal()
    for omega in grid:
        sector = SidebandSector.standard(float(omega))
        theta = float(policy(model, float(omega)))
        r, hn = response_and_noise(model, sector, theta)
        vac = InputStateSpec.vacuum()
        s_hn = noise_psd(hn, vac)

        lo = LoSpec.polar(gamma_abs, gamma_abs, theta, theta)
        state = lo_state(sector, lo)
        bp, bm = main_output(model, sector, theta)
        tt = t_theta(sector, theta, eta, lo, bp, bm)
        h_est = expect(tt, state) / r
        s_engine = noise_psd(tt, state) / abs(r) ** 2

        if balanced:
            if not include_signal_power:
                bp, bm = main_output(quiet, sector, theta)
            n_sum = (expect(number(bp), state) + expect(number(bm), state)).real
            penalty = (1.0 + (0.0 if large_gamma else n_sum / gamma_abs**2)) / abs(r) ** 2
            total = s_hn + penalty
        else:
            total = s_engine
            penalty = total - s_hn
        rows.append(NoiseBudgetRow(float(omega), theta, s_hn, penalty, total, complex(h_est), s_engine))
    return rows
