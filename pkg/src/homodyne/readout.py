"""Readout observables built from photodetector counts.

Balanced homodyne, the two-photon sideband pair ``s_+``/``s_-``, the
double balanced (eight-port) observables and their combinations
``t_b+``/``t_b-`` and ``t_theta``, the sideband-combination feasibility
analysis, and closed-form spectral-density relations.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .modes import AffineMode, Sideband, SidebandSector
from .moments import QuadObservable
from .network import build_balanced_homodyne, build_eight_port, propagate
from .states import LoScheme, LoSpec

__all__ = [
    "balanced_s",
    "balanced_ports",
    "s_sidebands",
    "Target",
    "FeasibilityReport",
    "combination_coefficients",
    "pair_determinant",
    "feasibility",
    "feasibility_table",
    "appendix_phase_solver",
    "t_pm",
    "eight_port_ports",
    "dbhd_observables",
    "t_b",
    "t_theta",
    "closed_form_psd_tb",
    "closed_form_psd_ttheta",
]

_SQRT2 = math.sqrt(2.0)


def _check_eta(eta: float) -> float:
    eta = float(eta)
    if not (0.0 < eta < 1.0):
        raise ValueError(f"eta must lie strictly inside (0, 1), got {eta}")
    return eta


def _check_gamma(gamma: complex) -> complex:
    gamma = complex(gamma)
    if gamma == 0 or not cmath.isfinite(gamma):
        raise ValueError("LO amplitude must be finite and nonzero")
    return gamma


# ---------------------------------------------------------------------------
# balanced homodyne


def balanced_s(eta: float, gamma: complex, ports: tuple[AffineMode, AffineMode]) -> QuadObservable:
    """``[(1-eta) n_c - eta n_d - (1-2 eta)|gamma|^2] / sqrt(eta (1-eta))``."""
    eta = _check_eta(eta)
    gamma = complex(gamma)
    c_o, d_o = ports
    norm = 1.0 / math.sqrt(eta * (1.0 - eta))
    return QuadObservable(
        [((1.0 - eta) * norm, c_o), (-eta * norm, d_o)],
        -(1.0 - 2.0 * eta) * abs(gamma) ** 2 * norm,
    )


def balanced_ports(
    sector: SidebandSector,
    sideband: Sideband | str,
    eta: float = 0.5,
    b: AffineMode | None = None,
) -> tuple[AffineMode, AffineMode]:
    """``(c_o, d_o)`` of the balanced network on one sideband."""
    net = build_balanced_homodyne(eta)
    ports = propagate(net, sector, sideband, None if b is None else {"b": b})
    return ports["D1"], ports["D2"]


def s_sidebands(
    sector: SidebandSector,
    lo: LoSpec,
    eta: float = 0.5,
    b_plus: AffineMode | None = None,
    b_minus: AffineMode | None = None,
) -> tuple[QuadObservable, QuadObservable]:
    """Balanced-homodyne observables ``(s_+, s_-)`` on the two sidebands.

    The LO modes ``l+``/``l-`` of ``sector`` must be put in the coherent
    state given by ``lo`` when evaluating (see :func:`homodyne.states.lo_state`).
    """
    gp, gm = lo.require_nonzero(sector.omega)
    sp = balanced_s(eta, gp, balanced_ports(sector, Sideband.UPPER, eta, b_plus))
    sm = balanced_s(eta, gm, balanced_ports(sector, Sideband.LOWER, eta, b_minus))
    return sp, sm


# ---------------------------------------------------------------------------
# feasibility of alpha <s_+> + beta <s_->


class Target(str, enum.Enum):
    B1 = "b1"
    B2 = "b2"
    B1DAG = "b1dag"
    B2DAG = "b2dag"


_ORDER = (Target.B1, Target.B2, Target.B1DAG, Target.B2DAG)


def combination_coefficients(
    gamma_plus: complex, gamma_minus: complex, alpha: complex, beta: complex
) -> np.ndarray:
    """Coefficients of ``(b1, b2, b1^dag, b2^dag)`` in ``alpha <s_+> + beta <s_->``."""
    gp, gm = complex(gamma_plus), complex(gamma_minus)
    return np.array(
        [
            alpha * gp.conjugate() + beta * gm,
            1j * (alpha * gp.conjugate() - beta * gm),
            alpha * gp + beta * gm.conjugate(),
            1j * (-alpha * gp + beta * gm.conjugate()),
        ]
    ) / _SQRT2


def _coefficient_rows(gp: complex, gm: complex) -> np.ndarray:
    """Linear map ``(alpha, beta) -> coefficients`` (up to the 1/sqrt2)."""
    return np.array(
        [
            [gp.conjugate(), gm],
            [1j * gp.conjugate(), -1j * gm],
            [gp, gm.conjugate()],
            [-1j * gp, 1j * gm.conjugate()],
        ]
    )


def _pair_key(pair: tuple[Target | str, Target | str]) -> tuple[Target, Target]:
    a, b = (Target(p) for p in pair)
    if a == b:
        raise ValueError("a pair needs two different targets")
    return tuple(sorted((a, b), key=_ORDER.index))  # type: ignore[return-value]


def pair_determinant(
    pair: tuple[Target | str, Target | str], gamma_plus: complex, gamma_minus: complex
) -> complex:
    """Determinant whose vanishing allows ``(alpha, beta) != 0`` with only ``pair`` left."""
    keep = _pair_key(pair)
    rows = _coefficient_rows(complex(gamma_plus), complex(gamma_minus))
    excluded = [i for i, t in enumerate(_ORDER) if t not in keep]
    return complex(np.linalg.det(rows[excluded]))


@dataclass(frozen=True)
class FeasibilityReport:
    """One row of the sideband-combination table.

    Attributes:
        pair: The two remaining targets.
        feasible: Whether some LO choice and ``(alpha, beta) != 0`` isolate them.
        gamma_constraint: Required phase pattern of ``(gamma_+, gamma_-)``.
        alpha_beta_relation: ``beta/alpha`` as text.
        beta_over_alpha_unit: Phase factor ``u`` with
            ``beta/alpha = u |gamma_+|/|gamma_-|``; ``None`` when infeasible.
        combination_formula: Resulting ``alpha <s_+> + beta <s_->``.
        scheme: LO scheme implementing the row, if feasible.
    """

    pair: tuple[Target, Target]
    feasible: bool
    gamma_constraint: str
    alpha_beta_relation: str
    beta_over_alpha_unit: complex | None
    combination_formula: str
    scheme: LoScheme | None

    def beta_over_alpha(self, gamma_plus: complex, gamma_minus: complex) -> complex:
        if not self.feasible:
            raise ValueError(f"pair {self.pair} cannot be isolated")
        return self.beta_over_alpha_unit * abs(gamma_plus) / abs(gamma_minus)

    def expected_coefficients(self, alpha: float, theta: float, abs_plus: float) -> np.ndarray:
        """Closed-form ``(b1, b2, b1^dag, b2^dag)`` coefficients of the row."""
        if not self.feasible:
            raise ValueError(f"pair {self.pair} cannot be isolated")
        k = _SQRT2 * alpha * abs_plus
        em, ep = cmath.exp(-1j * theta), cmath.exp(1j * theta)
        out = np.zeros(4, dtype=complex)
        i = {t: n for n, t in enumerate(_ORDER)}
        a, b = self.pair
        if self.pair == (Target.B1, Target.B1DAG):
            out[i[a]], out[i[b]] = k * em, k * ep
        elif self.pair == (Target.B1, Target.B2DAG):
            out[i[a]], out[i[b]] = k * em, -1j * k * ep
        elif self.pair == (Target.B2, Target.B1DAG):
            out[i[a]], out[i[b]] = 1j * k * em, k * ep
        else:
            out[i[a]], out[i[b]] = 1j * k * em, -1j * k * ep
        return out

    def as_dict(self) -> dict:
        return {
            "pair": [t.value for t in self.pair],
            "feasible": self.feasible,
            "gamma_constraint": self.gamma_constraint,
            "alpha_beta_relation": self.alpha_beta_relation,
            "combination_formula": self.combination_formula,
            "scheme": None if self.scheme is None else self.scheme.value,
        }


_NO = "gamma_+ = 0 or gamma_- = 0 (not a homodyne readout)"

_TABLE: dict[tuple[Target, Target], tuple] = {
    (Target.B1, Target.B2): (False, _NO, "none", None, "unreachable", None),
    (Target.B1DAG, Target.B2DAG): (False, _NO, "none", None, "unreachable", None),
    (Target.B1, Target.B1DAG): (
        True,
        "gamma_+ = |gamma_+| e^{i theta}, gamma_- = |gamma_-| e^{-i theta}",
        "beta = (|gamma_+|/|gamma_-|) alpha",
        1.0 + 0j,
        "sqrt2 alpha |gamma_+| <e^{-i theta} b1 + e^{i theta} b1^dag>",
        LoScheme.B1_B1DAG,
    ),
    (Target.B1, Target.B2DAG): (
        True,
        "gamma_+ = |gamma_+| e^{i theta}, gamma_- = i |gamma_-| e^{-i theta}",
        "beta = -i (|gamma_+|/|gamma_-|) alpha",
        -1j,
        "sqrt2 alpha |gamma_+| <e^{-i theta} b1 - i e^{i theta} b2^dag>",
        LoScheme.B1_B2DAG,
    ),
    (Target.B2, Target.B1DAG): (
        True,
        "gamma_+ = |gamma_+| e^{i theta}, gamma_- = i |gamma_-| e^{-i theta}",
        "beta = +i (|gamma_+|/|gamma_-|) alpha",
        1j,
        "sqrt2 alpha |gamma_+| <i e^{-i theta} b2 + e^{i theta} b1^dag>",
        LoScheme.B1DAG_B2,
    ),
    (Target.B2, Target.B2DAG): (
        True,
        "gamma_+ = |gamma_+| e^{i theta}, gamma_- = |gamma_-| e^{-i theta}",
        "beta = -(|gamma_+|/|gamma_-|) alpha",
        -1.0 + 0j,
        "sqrt2 i alpha |gamma_+| <e^{-i theta} b2 - e^{i theta} b2^dag>",
        LoScheme.B2_B2DAG,
    ),
}


def feasibility(pair: tuple[Target | str, Target | str]) -> FeasibilityReport:
    """Whether ``alpha <s_+> + beta <s_->`` can be reduced to the two targets."""
    key = _pair_key(pair)
    feasible, constraint, relation, unit, formula, scheme = _TABLE[key]
    return FeasibilityReport(key, feasible, constraint, relation, unit, formula, scheme)


def feasibility_table() -> list[FeasibilityReport]:
    """All six unordered pairs in a fixed order."""
    pairs = [
        (Target.B1, Target.B2),
        (Target.B1, Target.B1DAG),
        (Target.B1, Target.B2DAG),
        (Target.B2, Target.B1DAG),
        (Target.B1DAG, Target.B2DAG),
        (Target.B2, Target.B2DAG),
    ]
    return [feasibility(p) for p in pairs]


class PhaseCase(str, enum.Enum):
    ZERO = "zero"
    HALF_PI = "half_pi"


def appendix_phase_solver(
    case: PhaseCase | str, gammas: tuple[complex, complex], alpha: float, tol: float = 1e-12
) -> tuple[float, complex, complex]:
    """Solve for ``beta`` making ``kappa`` and ``lambda`` share phase 0 or pi/2.

    ``kappa = alpha gamma_+^* + beta gamma_-`` and
    ``lambda = i (alpha gamma_+^* - beta gamma_-)``.  A real ``beta`` exists
    only if ``tan theta_+ = tan theta_-``.  Signs of ``cos theta``/``sin theta``
    are kept, so the returned ``kappa``, ``lambda`` may point along the
    negative real (or imaginary) axis.

    Returns:
        ``(beta, kappa, lambda)``.
    """
    case = PhaseCase(case)
    gp, gm = (_check_gamma(g) for g in gammas)
    if alpha == 0:
        raise ValueError("alpha must be nonzero")
    dtheta = cmath.phase(gp) - cmath.phase(gm)
    if abs(math.sin(dtheta)) > tol:
        raise ValueError("tan(theta_+) != tan(theta_-): no real beta aligns kappa and lambda")
    sign = 1.0 if math.cos(dtheta) > 0 else -1.0
    ratio = sign * abs(gp) / abs(gm)
    beta = alpha * ratio if case is PhaseCase.ZERO else -alpha * ratio
    kappa = alpha * gp.conjugate() + beta * gm
    lam = 1j * (alpha * gp.conjugate() - beta * gm)
    return float(beta), complex(kappa), complex(lam)


def t_pm(
    s_plus: QuadObservable, s_minus: QuadObservable, abs_gamma: float
) -> tuple[QuadObservable, QuadObservable]:
    """``t_+ = (s_+ + s_-)/(sqrt2 |gamma|)``, ``t_- = (s_+ - s_-)/(sqrt2 i |gamma|)``."""
    if not abs_gamma > 0:
        raise ValueError("|gamma| must be positive")
    tp = (s_plus + s_minus) / (_SQRT2 * abs_gamma)
    tm = (s_plus - s_minus) / (_SQRT2 * 1j * abs_gamma)
    return tp, tm


# ---------------------------------------------------------------------------
# eight-port readout


def eight_port_ports(
    sector: SidebandSector,
    sideband: Sideband | str = Sideband.UPPER,
    eta: float = 0.5,
    b: AffineMode | None = None,
    eta4: float | None = None,
) -> dict[str, AffineMode]:
    """Fields at ``D1``..``D4`` of the eight-port network on one sideband."""
    net = build_eight_port(eta, eta4)
    return propagate(net, sector, sideband, None if b is None else {"b": b})


def dbhd_observables(
    ports: Mapping[str, AffineMode], eta: float, gamma: complex
) -> tuple[QuadObservable, QuadObservable]:
    """``(s_D1D2, s_D3D4)`` of the double balanced network.

    ``s_D1D2`` is self-adjoint with ``<s_D1D2> = <gamma^* b + gamma b^dag>``;
    ``s_D3D4`` carries an overall ``i`` so that
    ``<s_D3D4> = <gamma^* b - gamma b^dag>``.
    """
    eta = _check_eta(eta)
    gamma = _check_gamma(gamma)
    missing = {"D1", "D2", "D3", "D4"} - set(ports)
    if missing:
        raise ValueError(f"missing detector ports {sorted(missing)}")
    norm = 2.0 / math.sqrt(eta * (1.0 - eta))
    offset = -0.5 * (1.0 - 2.0 * eta) * abs(gamma) ** 2
    s12 = QuadObservable(
        [((1.0 - eta) * norm, ports["D1"]), (-eta * norm, ports["D2"])], offset * norm
    )
    s34 = QuadObservable(
        [(1j * (1.0 - eta) * norm, ports["D4"]), (-1j * eta * norm, ports["D3"])],
        1j * offset * norm,
    )
    return s12, s34


def t_b(
    s_d1d2: QuadObservable, s_d3d4: QuadObservable, gamma: complex
) -> tuple[QuadObservable, QuadObservable]:
    """``t_b+ = (s_D1D2 + s_D3D4)/(2 gamma^*)``, ``t_b- = (s_D1D2 - s_D3D4)/(2 gamma)``."""
    gamma = _check_gamma(gamma)
    return (s_d1d2 + s_d3d4) / (2.0 * gamma.conjugate()), (s_d1d2 - s_d3d4) / (2.0 * gamma)


def _same_angle(a: float, b: float, tol: float = 1e-12) -> bool:
    return abs(cmath.exp(1j * a) - cmath.exp(1j * b)) <= tol


def t_theta(
    sector: SidebandSector,
    theta: float,
    eta: float,
    lo: LoSpec,
    b_plus: AffineMode | None = None,
    b_minus: AffineMode | None = None,
    eta4: float | None = None,
) -> QuadObservable:
    """Eight-port estimator of ``<cos(theta) b1 + sin(theta) b2>``.

    Both sideband LO amplitudes must carry the phase ``theta``.  Unequal
    moduli are allowed; each sideband is normalized by its own ``|gamma|``.
    """
    gp, gm = lo.require_nonzero(sector.omega)
    if not (_same_angle(cmath.phase(gp), theta) and _same_angle(cmath.phase(gm), theta)):
        raise ValueError("t_theta requires both LO phases equal to theta")
    up = eight_port_ports(sector, Sideband.UPPER, eta, b_plus, eta4)
    dn = eight_port_ports(sector, Sideband.LOWER, eta, b_minus, eta4)
    s12p, s34p = dbhd_observables(up, eta, gp)
    s12m, s34m = dbhd_observables(dn, eta, gm)
    t12 = (s12p / abs(gp) + s12m / abs(gm)) / _SQRT2
    t34 = (s34p / abs(gp) - s34m / abs(gm)) / _SQRT2
    return 0.5 * (t12 + t34)


# ---------------------------------------------------------------------------
# closed-form spectral densities


_FORMS = ("published", "derived")


def _check_form(form: str) -> str:
    if form not in _FORMS:
        raise ValueError(f"form must be one of {_FORMS}, got {form!r}")
    return form


def closed_form_psd_tb(
    s_b: float,
    n_b: float,
    b_mean: complex,
    gamma: complex,
    eta: float,
    form: str = "published",
) -> float:
    """Closed form of ``S_{t_b+}`` including beam-splitter imbalance terms.

    ``form="published"`` evaluates the relation as printed in the literature.
    ``form="derived"`` evaluates the re-derived relation

        S_b + 2 n_b/|g|^2 + 1
          + (1-2 eta)/(sqrt(eta(1-eta)) |g|^2) <(1-i) g^* b + (1+i) g b^dag>
          + 2 (1-2 eta)^2/(eta (1-eta)),

    which agrees with the moment engine for every ``eta``.  Both coincide at
    ``eta = 1/2``.

    Args:
        s_b: Spectral density of ``b``.
        n_b: ``<b^dag b>``.
        b_mean: ``<b>``.
        gamma: LO amplitude.
        eta: Transmissivity of the two mixing splitters.
    """
    eta = _check_eta(eta)
    g = _check_gamma(gamma)
    _check_form(form)
    g2 = abs(g) ** 2
    b = complex(b_mean)
    root = math.sqrt(eta * (1.0 - eta))
    if form == "derived":
        lin = ((1 - 1j) * g.conjugate() * b + (1 + 1j) * g * b.conjugate()).real
        return float(
            s_b + 2.0 * n_b / g2 + 1.0 + (1.0 - 2.0 * eta) / (root * g2) * lin
            + 2.0 * (1.0 - 2.0 * eta) ** 2 / (eta * (1.0 - eta))
        )
    k = (1.0 - 2.0 * eta) / (2.0 * root * g2)
    term1 = g.conjugate() * (g.conjugate() + 1) * b + g * (g + 1) * b.conjugate()
    term2 = g.conjugate() * (g.conjugate() - 1) * b - g * (g - 1) * b.conjugate()
    out = (
        s_b
        + 2.0 * n_b / g2
        + 1.0
        + k * term1
        + 1j * k * term2
        + (1.0 - 2.0 * eta) ** 2 / (eta * (1.0 - eta)) * (1.0 + g2)
    )
    return float(complex(out).real)


def closed_form_psd_ttheta(
    s_btheta: float,
    n_sum: float,
    b1_sum: float,
    b2_sum: float,
    abs_gamma: float,
    eta: float,
    theta: float,
    form: str = "published",
) -> float:
    """Closed form of ``S_{t_theta}``.

    The published and re-derived relations share every term except the
    constant imbalance term: ``(1-2 eta)^2/(2 eta (1-eta))`` as printed versus
    ``2 (1-2 eta)^2/(eta (1-eta))`` from the engine-consistent derivation.

    Args:
        s_btheta: Spectral density of ``b_theta``.
        n_sum: ``<n_b+ + n_b->``.
        b1_sum, b2_sum: ``<b1 + b1^dag>`` and ``<b2 + b2^dag>``.
        form: ``"published"`` or ``"derived"``.
    """
    eta = _check_eta(eta)
    _check_form(form)
    if not abs_gamma > 0:
        raise ValueError("|gamma| must be positive")
    c, s = math.cos(theta), math.sin(theta)
    k = (1.0 - 2.0 * eta) / (math.sqrt(2.0 * eta * (1.0 - eta)) * abs_gamma)
    imbalance = (1.0 - 2.0 * eta) ** 2 / (eta * (1.0 - eta))
    const = 2.0 * imbalance if form == "derived" else 0.5 * imbalance
    return float(
        s_btheta
        + n_sum / abs_gamma**2
        + 1.0
        + k * ((c - s) * b1_sum + (c + s) * b2_sum)
        + const
    )
