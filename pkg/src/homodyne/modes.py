"""Mode registry and affine field-operator algebra for sideband pairs.

An :class:`AffineMode` represents an operator

    x = sum_m u_m a_m + sum_m v_m a_m^dagger + d

over a finite set of canonical input modes ``a_m`` with
``[a_m, a_n^dagger] = delta_mn``.  Every passive optical element and every
ponderomotive shear used in this package maps affine modes to affine modes,
so propagation through a network is exact coefficient arithmetic.
"""

from __future__ import annotations

import enum
import math
import numbers
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Iterable, Iterator, Mapping, Sequence

__all__ = [
    "Sideband",
    "SourceKind",
    "ModeId",
    "AffineMode",
    "SidebandSector",
    "SectorMismatchError",
    "ZERO_TOL",
    "linear_combine",
    "adjoint",
    "to_quadratures",
    "from_quadratures",
    "commutator_pair",
    "commutator",
    "rotate",
    "unit_phase",
    "DEFAULT_STEMS",
]

#: Coefficients smaller than this in magnitude are dropped after arithmetic.
ZERO_TOL = 1e-15

_SQRT2 = math.sqrt(2.0)


class SectorMismatchError(ValueError):
    """Raised when operators from different frequency sectors are combined."""


class Sideband(str, enum.Enum):
    UPPER = "upper"
    LOWER = "lower"

    @property
    def sign(self) -> str:
        return "+" if self is Sideband.UPPER else "-"

    @property
    def partner(self) -> "Sideband":
        return Sideband.LOWER if self is Sideband.UPPER else Sideband.UPPER


class SourceKind(str, enum.Enum):
    MAIN_INPUT = "main_input"
    LO = "lo"
    AUX_VACUUM = "aux_vacuum"


@dataclass(frozen=True, order=True)
class ModeId:
    """Identifier of one canonical input mode.

    Attributes:
        label: Short identifier such as ``"a+"`` or ``"l-"``.
        sideband: Which sideband the mode lives in.
        source_kind: Role of the mode in the experiment.
    """

    label: str
    sideband: Sideband = Sideband.UPPER
    source_kind: SourceKind = SourceKind.AUX_VACUUM

    def __str__(self) -> str:
        return self.label


def _clean(coeffs: Mapping[ModeId, complex]) -> dict[ModeId, complex]:
    return {k: complex(c) for k, c in coeffs.items() if abs(c) >= ZERO_TOL}


def _merge_omega(a: float | None, b: float | None) -> float | None:
    if a is None:
        return b
    if b is None or a == b:
        return a
    raise SectorMismatchError(f"operators belong to different sectors: {a} vs {b}")


class AffineMode:
    """Immutable affine combination of annihilation and creation operators.

    Args:
        u: Annihilation coefficients keyed by :class:`ModeId`.
        v: Creation coefficients keyed by :class:`ModeId`.
        d: Classical displacement.
        omega: Sideband frequency of the sector the operator lives in, or
            ``None`` for sector-agnostic operators (pure scalars, tests).
    """

    __slots__ = ("_u", "_v", "_d", "_omega")

    def __init__(
        self,
        u: Mapping[ModeId, complex] | None = None,
        v: Mapping[ModeId, complex] | None = None,
        d: complex = 0.0,
        omega: float | None = None,
    ):
        self._u = MappingProxyType(_clean(u or {}))
        self._v = MappingProxyType(_clean(v or {}))
        d = complex(d)
        self._d = d if abs(d) >= ZERO_TOL else 0j
        self._omega = None if omega is None else float(omega)

    # construction helpers -------------------------------------------------
    @classmethod
    def annihilation(cls, mode: ModeId, omega: float | None = None) -> "AffineMode":
        return cls(u={mode: 1.0}, omega=omega)

    @classmethod
    def creation(cls, mode: ModeId, omega: float | None = None) -> "AffineMode":
        return cls(v={mode: 1.0}, omega=omega)

    @classmethod
    def scalar(cls, d: complex, omega: float | None = None) -> "AffineMode":
        return cls(d=d, omega=omega)

    @classmethod
    def zero(cls, omega: float | None = None) -> "AffineMode":
        return cls(omega=omega)

    # accessors -------------------------------------------------------------
    @property
    def u(self) -> Mapping[ModeId, complex]:
        return self._u

    @property
    def v(self) -> Mapping[ModeId, complex]:
        return self._v

    @property
    def d(self) -> complex:
        return self._d

    @property
    def omega(self) -> float | None:
        return self._omega

    @property
    def support(self) -> frozenset[ModeId]:
        """Input modes with a nonzero coefficient."""
        return frozenset(self._u) | frozenset(self._v)

    def is_zero(self) -> bool:
        return not self._u and not self._v and self._d == 0

    def with_displacement(self, d: complex) -> "AffineMode":
        return AffineMode(self._u, self._v, d, self._omega)

    def in_sector(self, omega: float | None) -> "AffineMode":
        """Return a copy tagged with sector frequency ``omega``."""
        return AffineMode(self._u, self._v, self._d, omega)

    # algebra -------------------------------------------------------------
    def adjoint(self) -> "AffineMode":
        u = {k: c.conjugate() for k, c in self._v.items()}
        v = {k: c.conjugate() for k, c in self._u.items()}
        return AffineMode(u, v, self._d.conjugate(), self._omega)

    @property
    def dag(self) -> "AffineMode":
        return self.adjoint()

    def __add__(self, other: object) -> "AffineMode":
        if isinstance(other, numbers.Number):
            return AffineMode(self._u, self._v, self._d + other, self._omega)
        if not isinstance(other, AffineMode):
            return NotImplemented
        omega = _merge_omega(self._omega, other._omega)
        u = dict(self._u)
        for k, c in other._u.items():
            u[k] = u.get(k, 0j) + c
        v = dict(self._v)
        for k, c in other._v.items():
            v[k] = v.get(k, 0j) + c
        return AffineMode(u, v, self._d + other._d, omega)

    __radd__ = __add__

    def __neg__(self) -> "AffineMode":
        return self * -1.0

    def __sub__(self, other: object) -> "AffineMode":
        if isinstance(other, (numbers.Number, AffineMode)):
            return self + (-other)
        return NotImplemented

    def __rsub__(self, other: object) -> "AffineMode":
        return (-self) + other

    def __mul__(self, c: object) -> "AffineMode":
        if not isinstance(c, numbers.Number):
            return NotImplemented
        c = complex(c)
        return AffineMode(
            {k: c * x for k, x in self._u.items()},
            {k: c * x for k, x in self._v.items()},
            c * self._d,
            self._omega,
        )

    __rmul__ = __mul__

    def __truediv__(self, c: object) -> "AffineMode":
        if not isinstance(c, numbers.Number):
            return NotImplemented
        return self * (1.0 / complex(c))

    # comparison ----------------------------------------------------------
    def allclose(self, other: "AffineMode", atol: float = 1e-14) -> bool:
        """Coefficient-wise comparison with absolute tolerance ``atol``."""
        keys_u = set(self._u) | set(other._u)
        keys_v = set(self._v) | set(other._v)
        return (
            all(abs(self._u.get(k, 0) - other._u.get(k, 0)) <= atol for k in keys_u)
            and all(abs(self._v.get(k, 0) - other._v.get(k, 0)) <= atol for k in keys_v)
            and abs(self._d - other._d) <= atol
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, AffineMode):
            return NotImplemented
        return (
            dict(self._u) == dict(other._u)
            and dict(self._v) == dict(other._v)
            and self._d == other._d
        )

    def __hash__(self) -> int:
        return hash(
            (
                frozenset(self._u.items()),
                frozenset(self._v.items()),
                self._d,
            )
        )

    def __repr__(self) -> str:
        parts = [f"{c:.6g}*{k}" for k, c in sorted(self._u.items())]
        parts += [f"{c:.6g}*{k}^dag" for k, c in sorted(self._v.items())]
        if self._d != 0 or not parts:
            parts.append(f"{self._d:.6g}")
        return "AffineMode(" + " + ".join(parts) + ")"


def linear_combine(terms: Iterable[tuple[complex, AffineMode]]) -> AffineMode:
    """Return ``sum_k w_k x_k`` for ``(w_k, x_k)`` pairs."""
    out = AffineMode()
    for w, x in terms:
        out = out + complex(w) * x
    return out


def adjoint(x: AffineMode) -> AffineMode:
    return x.adjoint()


def _check_pair(x: AffineMode, y: AffineMode) -> None:
    _merge_omega(x.omega, y.omega)


def to_quadratures(b_plus: AffineMode, b_minus: AffineMode) -> tuple[AffineMode, AffineMode]:
    """Amplitude and phase quadratures of a sideband pair.

    ``b1 = (b+ + b-^dag)/sqrt2`` and ``b2 = (b+ - b-^dag)/(sqrt2 i)``.
    """
    _check_pair(b_plus, b_minus)
    bm_dag = b_minus.adjoint()
    b1 = (b_plus + bm_dag) / _SQRT2
    b2 = (b_plus - bm_dag) / (_SQRT2 * 1j)
    return b1, b2


def from_quadratures(b1: AffineMode, b2: AffineMode) -> tuple[AffineMode, AffineMode]:
    """Inverse of :func:`to_quadratures`."""
    _check_pair(b1, b2)
    b_plus = (b1 + 1j * b2) / _SQRT2
    b_minus = (b1.adjoint() + 1j * b2.adjoint()) / _SQRT2
    return b_plus, b_minus


def commutator_pair(x: AffineMode, y: AffineMode) -> complex:
    """Return the c-number ``[x, y^dagger] = sum u_x conj(u_y) - sum v_x conj(v_y)``."""
    _check_pair(x, y)
    val = sum((c * y.u[k].conjugate() for k, c in x.u.items() if k in y.u), 0j)
    val -= sum((c * y.v[k].conjugate() for k, c in x.v.items() if k in y.v), 0j)
    return complex(val)


def commutator(x: AffineMode, y: AffineMode) -> complex:
    """Return the c-number ``[x, y]``."""
    _check_pair(x, y)
    val = sum((c * y.v[k] for k, c in x.u.items() if k in y.v), 0j)
    val -= sum((c * y.u[k] for k, c in x.v.items() if k in y.u), 0j)
    return complex(val)


# ---------------------------------------------------------------------------
# sectors


#: Default input stems: main-interferometer input, LO, and the two auxiliary
#: vacuum ports of the eight-port network.
DEFAULT_STEMS: Mapping[str, SourceKind] = MappingProxyType(
    {
        "a": SourceKind.MAIN_INPUT,
        "l": SourceKind.LO,
        "e": SourceKind.AUX_VACUUM,
        "f": SourceKind.AUX_VACUUM,
    }
)


@dataclass(frozen=True)
class SidebandSector:
    """Registry of upper/lower input modes at one sideband frequency.

    Modes are keyed by label (``stem + "+"`` or ``stem + "-"``).  Sectors at
    different ``omega`` are independent; operators built with
    :meth:`op` carry the sector frequency so that accidental mixing raises
    :class:`SectorMismatchError`.
    """

    omega: float
    modes: Mapping[str, ModeId] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not (self.omega > 0 and math.isfinite(self.omega)):
            raise ValueError(f"sector frequency must be positive and finite, got {self.omega}")
        labels = [m.label for m in self.modes.values()]
        if len(set(labels)) != len(labels) or any(k != m.label for k, m in self.modes.items()):
            raise ValueError("mode labels must be unique and match their keys")
        object.__setattr__(self, "modes", MappingProxyType(dict(self.modes)))

    @classmethod
    def standard(
        cls, omega: float, stems: Mapping[str, SourceKind] = DEFAULT_STEMS
    ) -> "SidebandSector":
        """Sector with ``stem+``/``stem-`` modes for every stem."""
        modes = {}
        for stem, kind in stems.items():
            for sb in Sideband:
                m = ModeId(stem + sb.sign, sb, kind)
                modes[m.label] = m
        return cls(omega, modes)

    def with_mode(self, label: str, sideband: Sideband, kind: SourceKind) -> "SidebandSector":
        if label in self.modes:
            raise ValueError(f"duplicate mode label {label!r}")
        modes = dict(self.modes)
        modes[label] = ModeId(label, sideband, kind)
        return SidebandSector(self.omega, modes)

    def mode(self, label: str) -> ModeId:
        try:
            return self.modes[label]
        except KeyError:
            raise KeyError(f"no mode {label!r} in sector at omega={self.omega}") from None

    def op(self, label: str) -> AffineMode:
        """Pure annihilation operator of the labelled mode."""
        return AffineMode.annihilation(self.mode(label), self.omega)

    def sideband_ops(self, stem: str) -> tuple[AffineMode, AffineMode]:
        """``(x+, x-)`` annihilation operators for a stem."""
        return self.op(stem + "+"), self.op(stem + "-")

    def __iter__(self) -> Iterator[ModeId]:
        return iter(self.modes.values())

    def contains(self, x: AffineMode) -> bool:
        own = set(self.modes.values())
        return x.omega in (None, self.omega) and x.support <= own


def rotate(x: AffineMode, phi: float) -> AffineMode:
    """Field passing through a phase rotator: ``x -> e^{i phi} x``.

    All coefficients, including creation coefficients, pick up the same
    phase because the whole field operator is delayed.  For fields without
    creation components (every LO path) this coincides with rotating the
    underlying input modes.
    """
    return x * unit_phase(phi)


def unit_phase(phi: float) -> complex:
    """``e^{i phi}`` with round-off below ``ZERO_TOL`` snapped to zero."""
    c, s = math.cos(phi), math.sin(phi)
    # exact quarter turns keep coefficient comparisons exact
    return complex(0.0 if abs(c) < ZERO_TOL else c, 0.0 if abs(s) < ZERO_TOL else s)


def sum_modes(xs: Sequence[AffineMode]) -> AffineMode:
    return linear_combine((1.0, x) for x in xs)
