"""Input states: product vacuum/coherent states and local-oscillator specs."""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Mapping, Sequence

import numpy as np

from .modes import ModeId, SidebandSector

__all__ = [
    "InputStateSpec",
    "LoSpec",
    "LoScheme",
    "lo_for_scheme",
    "lo_state",
]


@dataclass(frozen=True)
class InputStateSpec:
    """Product of coherent states over the input modes of one sector.

    Modes missing from ``amplitudes`` are in vacuum.  There are no
    correlations between modes.
    """

    amplitudes: Mapping[ModeId, complex] = field(default_factory=dict)

    def __post_init__(self) -> None:
        amps = {}
        for m, a in self.amplitudes.items():
            a = complex(a)
            if not (math.isfinite(a.real) and math.isfinite(a.imag)):
                raise ValueError(f"coherent amplitude of {m} is not finite")
            if a != 0:
                amps[m] = a
        object.__setattr__(self, "amplitudes", MappingProxyType(amps))

    @classmethod
    def vacuum(cls) -> "InputStateSpec":
        return cls({})

    def amplitude(self, mode: ModeId) -> complex:
        return self.amplitudes.get(mode, 0j)

    def is_vacuum(self, mode: ModeId) -> bool:
        return mode not in self.amplitudes

    def merged(self, other: "InputStateSpec | Mapping[ModeId, complex]") -> "InputStateSpec":
        extra = other.amplitudes if isinstance(other, InputStateSpec) else other
        overlap = set(self.amplitudes) & set(extra)
        if overlap:
            raise ValueError(f"modes specified twice: {sorted(m.label for m in overlap)}")
        return InputStateSpec({**self.amplitudes, **extra})


class LoScheme(str, enum.Enum):
    """Phase patterns of the sideband LO amplitudes for each readout target."""

    B1_B1DAG = "b1_b1dag"
    B1_B2DAG = "b1_b2dag"
    B1DAG_B2 = "b1dag_b2"
    B2_B2DAG = "b2_b2dag"
    DBHD_THETA = "dbhd_theta"


@dataclass(frozen=True)
class LoSpec:
    """Local-oscillator amplitudes ``gamma_+`` and ``gamma_-`` over the grid.

    Either constant (``table is None``) or tabulated as rows
    ``(omega, gamma_plus, gamma_minus)``; tabulated values are linearly
    interpolated in real and imaginary parts.
    """

    gamma_plus: complex = 1.0
    gamma_minus: complex = 1.0
    table: tuple[tuple[float, complex, complex], ...] | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "gamma_plus", complex(self.gamma_plus))
        object.__setattr__(self, "gamma_minus", complex(self.gamma_minus))
        if self.table is not None:
            rows = tuple((float(w), complex(p), complex(m)) for w, p, m in self.table)
            if not rows:
                raise ValueError("LO table is empty")
            ws = [r[0] for r in rows]
            if any(b <= a for a, b in zip(ws, ws[1:])):
                raise ValueError("LO table frequencies must be strictly increasing")
            object.__setattr__(self, "table", rows)

    @classmethod
    def polar(
        cls, abs_plus: float, abs_minus: float, theta_plus: float, theta_minus: float
    ) -> "LoSpec":
        return cls(cmath.rect(abs_plus, theta_plus), cmath.rect(abs_minus, theta_minus))

    @classmethod
    def from_table(cls, rows: Sequence[Sequence[float]]) -> "LoSpec":
        """Rows ``[omega, re_plus, im_plus, re_minus, im_minus]``."""
        tab = []
        for row in rows:
            if len(row) != 5:
                raise ValueError("LO table rows need 5 entries: omega, re+, im+, re-, im-")
            w, rp, ip, rm, im = (float(x) for x in row)
            tab.append((w, complex(rp, ip), complex(rm, im)))
        return cls(table=tuple(tab))

    def at(self, omega: float | None = None) -> tuple[complex, complex]:
        """``(gamma_plus, gamma_minus)`` at sideband frequency ``omega``."""
        if self.table is None:
            return self.gamma_plus, self.gamma_minus
        if omega is None:
            raise ValueError("tabulated LO needs a frequency")
        ws = np.array([r[0] for r in self.table])
        if omega < ws[0] or omega > ws[-1]:
            raise ValueError(f"omega={omega} outside LO table range [{ws[0]}, {ws[-1]}]")
        gp = np.array([r[1] for r in self.table])
        gm = np.array([r[2] for r in self.table])

        def interp(vals: np.ndarray) -> complex:
            return complex(np.interp(omega, ws, vals.real), np.interp(omega, ws, vals.imag))

        return interp(gp), interp(gm)

    def require_nonzero(self, omega: float | None = None) -> tuple[complex, complex]:
        gp, gm = self.at(omega)
        if gp == 0 or gm == 0:
            raise ValueError("LO amplitude vanishes at a sideband; homodyne readout undefined")
        return gp, gm


def _scheme_pair(scheme: LoScheme, ap: float, am: float, theta: float) -> tuple[complex, complex]:
    gp = cmath.rect(ap, theta)
    if scheme is LoScheme.B1_B1DAG or scheme is LoScheme.B2_B2DAG:
        gm = cmath.rect(am, -theta)
    elif scheme is LoScheme.B1_B2DAG or scheme is LoScheme.B1DAG_B2:
        gm = 1j * cmath.rect(am, -theta)
    else:
        gm = cmath.rect(am, theta)
    return gp, gm


def lo_for_scheme(spec: LoSpec, scheme: LoScheme | str, theta: float) -> LoSpec:
    """Reassign LO phases as required by ``scheme``, keeping the moduli of ``spec``."""
    try:
        scheme = LoScheme(scheme)
    except ValueError:
        raise ValueError(f"unknown LO scheme {scheme!r}") from None
    if spec.table is None:
        gp, gm = _scheme_pair(scheme, abs(spec.gamma_plus), abs(spec.gamma_minus), theta)
        return LoSpec(gp, gm)
    rows = tuple((w,) + _scheme_pair(scheme, abs(p), abs(m), theta) for w, p, m in spec.table)
    return LoSpec(table=rows)


def lo_state(
    sector: SidebandSector,
    lo: LoSpec,
    stem: str = "l",
    extra: Mapping[ModeId, complex] | None = None,
) -> InputStateSpec:
    """Product state with the LO modes ``stem+``/``stem-`` coherent at ``lo``."""
    gp, gm = lo.at(sector.omega)
    amps = {sector.mode(stem + "+"): gp, sector.mode(stem + "-"): gm}
    state = InputStateSpec(amps)
    return state.merged(extra) if extra else state
