"""Exact moments of detector observables under product coherent states.

Every observable handled here is at most quadratic in the input ladder
operators.  Writing each input as ``a_m = mu_m + da_m`` where ``da_m``
annihilates the state, an observable becomes

    Q = c0 + l . xi + xi^T A xi,    xi = (da_1 .. da_N, da_1^dag .. da_N^dag)

and all moments follow from Wick's theorem with the single nonzero vacuum
contraction ``<da_m da_n^dag> = delta_mn``.  This is exact for coherent
product states (they are displaced vacua).

Spectral densities follow the per-sector discretization: the ``2 pi delta``
of the continuum correlator is replaced by one, so for a vacuum mode ``b``
the density ``S_b = <db db^dag + db^dag db>`` equals one.
"""

from __future__ import annotations

import numbers
from dataclasses import dataclass
from typing import Iterable, Union

import numpy as np

from .modes import AffineMode, ModeId, SectorMismatchError, SidebandSector, _merge_omega
from .states import InputStateSpec

__all__ = [
    "QuadObservable",
    "Observable",
    "SpectralResult",
    "number",
    "mean_field",
    "expect",
    "symmetrized_correlator",
    "noise_psd",
]


class QuadObservable:
    """Weighted sum of photon numbers ``sum_k w_k x_k^dag x_k + scalar``.

    Instances are immutable; arithmetic returns new observables.
    """

    __slots__ = ("_terms", "_scalar", "_omega")

    def __init__(self, terms: Iterable[tuple[complex, AffineMode]] = (), scalar: complex = 0.0):
        items = []
        omega = None
        for w, x in terms:
            w = complex(w)
            omega = _merge_omega(omega, x.omega)
            if w != 0 and not (x.is_zero()):
                items.append((w, x))
        self._terms: tuple[tuple[complex, AffineMode], ...] = tuple(items)
        self._scalar = complex(scalar)
        self._omega = omega

    @property
    def terms(self) -> tuple[tuple[complex, AffineMode], ...]:
        return self._terms

    @property
    def scalar(self) -> complex:
        return self._scalar

    @property
    def omega(self) -> float | None:
        return self._omega

    @property
    def support(self) -> frozenset[ModeId]:
        out: frozenset[ModeId] = frozenset()
        for _, x in self._terms:
            out |= x.support
        return out

    def is_self_adjoint(self, tol: float = 0.0) -> bool:
        n = self.normalized()
        return all(abs(w.imag) <= tol for w, _ in n.terms) and abs(n.scalar.imag) <= tol

    def adjoint(self) -> "QuadObservable":
        return QuadObservable(((w.conjugate(), x) for w, x in self._terms), self._scalar.conjugate())

    @property
    def dag(self) -> "QuadObservable":
        return self.adjoint()

    def normalized(self, tol: float = 1e-15) -> "QuadObservable":
        """Merge terms with identical modes and drop negligible weights."""
        merged: dict[AffineMode, complex] = {}
        for w, x in self._terms:
            merged[x] = merged.get(x, 0j) + w
        return QuadObservable(((w, x) for x, w in merged.items() if abs(w) > tol), self._scalar)

    def allclose(self, other: "QuadObservable", atol: float = 1e-12) -> bool:
        """Representation-level comparison of merged term weights."""
        a = {x: w for w, x in self.normalized().terms}
        b = {x: w for w, x in other.normalized().terms}
        keys = set(a) | set(b)
        return all(abs(a.get(k, 0) - b.get(k, 0)) <= atol for k in keys) and (
            abs(self._scalar - other._scalar) <= atol
        )

    def __add__(self, other: object) -> "QuadObservable":
        if isinstance(other, numbers.Number):
            return QuadObservable(self._terms, self._scalar + complex(other))
        if not isinstance(other, QuadObservable):
            return NotImplemented
        return QuadObservable(self._terms + other._terms, self._scalar + other._scalar)

    __radd__ = __add__

    def __mul__(self, c: object) -> "QuadObservable":
        if not isinstance(c, numbers.Number):
            return NotImplemented
        c = complex(c)
        return QuadObservable(((c * w, x) for w, x in self._terms), c * self._scalar)

    __rmul__ = __mul__

    def __neg__(self) -> "QuadObservable":
        return self * -1.0

    def __sub__(self, other: object) -> "QuadObservable":
        if isinstance(other, (numbers.Number, QuadObservable)):
            return self + (-other)
        return NotImplemented

    def __truediv__(self, c: object) -> "QuadObservable":
        if not isinstance(c, numbers.Number):
            return NotImplemented
        return self * (1.0 / complex(c))

    def __repr__(self) -> str:
        return f"QuadObservable({len(self._terms)} terms, scalar={self._scalar:.6g})"


#: Anything the engine can evaluate: a detector observable or a bare field.
Observable = Union[QuadObservable, AffineMode]


def number(x: AffineMode, weight: complex = 1.0) -> QuadObservable:
    """Photon-number observable ``weight * x^dag x``."""
    return QuadObservable([(weight, x)])


@dataclass(frozen=True)
class SpectralResult:
    """Symmetrized correlator split into fluctuation and mean parts.

    Attributes:
        expectation: ``<Q>``.
        psd: Coefficient of the sector-diagonal part,
            ``<dQ dQ'^dag + dQ'^dag dQ>``; zero for different sectors.
            Real and non-negative when ``Q == Q'``.
        product_part: ``<Q> conj(<Q'>)``.
        same_sector: Whether the two observables share a sector.
    """

    expectation: complex
    psd: complex
    product_part: complex
    same_sector: bool = True

    @property
    def value(self) -> complex:
        """``<(Q Q'^dag + Q'^dag Q)/2>`` with the sector delta set to one."""
        return self.product_part + (0.5 * self.psd if self.same_sector else 0.0)


# ---------------------------------------------------------------------------
# internal quadratic-form representation


@dataclass(frozen=True)
class _Form:
    c0: complex
    lin: np.ndarray
    quad: np.ndarray | None


def _omega_of(q: Observable) -> float | None:
    return q.omega


def _support_of(q: Observable) -> frozenset[ModeId]:
    return q.support


def _mode_index(*qs: Observable) -> dict[ModeId, int]:
    modes: set[ModeId] = set()
    for q in qs:
        modes |= _support_of(q)
    return {m: i for i, m in enumerate(sorted(modes))}


def _row(x: AffineMode, idx: dict[ModeId, int]) -> np.ndarray:
    n = len(idx)
    r = np.zeros(2 * n, dtype=complex)
    for m, c in x.u.items():
        r[idx[m]] = c
    for m, c in x.v.items():
        r[n + idx[m]] = c
    return r


def _dagger_row(r: np.ndarray) -> np.ndarray:
    n = r.size // 2
    return np.concatenate([r[n:].conj(), r[:n].conj()])


def mean_field(x: AffineMode, state: InputStateSpec) -> complex:
    """``<x> = sum u mu + sum v conj(mu) + d``."""
    val = x.d
    for m, c in x.u.items():
        val += c * state.amplitude(m)
    for m, c in x.v.items():
        val += c * state.amplitude(m).conjugate()
    return complex(val)


def _form(q: Observable, state: InputStateSpec, idx: dict[ModeId, int]) -> _Form:
    n2 = 2 * len(idx)
    if isinstance(q, AffineMode):
        return _Form(mean_field(q, state), _row(q, idx), None)
    c0 = q.scalar
    lin = np.zeros(n2, dtype=complex)
    quad = np.zeros((n2, n2), dtype=complex)
    for w, x in q.terms:
        m = mean_field(x, state)
        r = _row(x, idx)
        rd = _dagger_row(r)
        c0 += w * abs(m) ** 2
        lin += w * (m.conjugate() * r + m * rd)
        quad += w * np.outer(rd, r)
    return _Form(complex(c0), lin, quad)


def _adjoint_form(f: _Form) -> _Form:
    n = f.lin.size // 2
    perm = np.concatenate([np.arange(n, 2 * n), np.arange(n)])
    lin = f.lin.conj()[perm]
    quad = None
    if f.quad is not None:
        # (xi_i xi_j)^dag = xi_{P j} xi_{P i}
        quad = f.quad.conj()[np.ix_(perm, perm)].T
    return _Form(f.c0.conjugate(), lin, quad)


def _mean(f: _Form) -> complex:
    if f.quad is None:
        return f.c0
    n = f.lin.size // 2
    return complex(f.c0 + np.trace(f.quad[:n, n:]))


def _connected(f: _Form, g: _Form) -> complex:
    """``<(F - <F>)(G - <G>)>`` by Wick contraction in the vacuum of ``xi``."""
    n = f.lin.size // 2
    val = complex(f.lin[:n] @ g.lin[n:])
    if f.quad is not None and g.quad is not None:
        gs = g.quad + g.quad.T
        # G_ik G_jl restricts i, j to annihilation slots and k, l to the
        # matching creation slots.
        val += complex(np.sum(f.quad[:n, :n] * gs[n:, n:]))
    return val


def expect(q: Observable, state: InputStateSpec) -> complex:
    """Exact expectation value of an observable or field."""
    idx = _mode_index(q)
    return _mean(_form(q, state, idx))


def _pair_psd(q: Observable, qp: Observable, state: InputStateSpec) -> tuple[complex, complex, complex]:
    idx = _mode_index(q, qp)
    f = _form(q, state, idx)
    g = _form(qp, state, idx)
    gd = _adjoint_form(g)
    psd = _connected(f, gd) + _connected(gd, f)
    return _mean(f), _mean(g), psd


def symmetrized_correlator(
    q: Observable,
    qp: Observable,
    state: InputStateSpec,
    state_p: InputStateSpec | None = None,
) -> SpectralResult:
    """Symmetrized two-observable correlator ``<(Q Q'^dag + Q'^dag Q)/2>``.

    Args:
        q, qp: Observables, each confined to one sector.
        state: State of the sector of ``q``.
        state_p: State of the sector of ``qp`` when it differs from that of
            ``q``; defaults to ``state``.
    """
    wq, wp = _omega_of(q), _omega_of(qp)
    same = wq is None or wp is None or wq == wp
    if same:
        if state_p is not None and state_p != state:
            raise SectorMismatchError("observables in one sector must share one state")
        eq, ep, psd = _pair_psd(q, qp, state)
        return SpectralResult(eq, psd, eq * ep.conjugate(), True)
    eq = expect(q, state)
    ep = expect(qp, state if state_p is None else state_p)
    return SpectralResult(eq, 0j, eq * ep.conjugate(), False)


def noise_psd(q: Observable, state: InputStateSpec, sector: SidebandSector | None = None) -> float:
    """Spectral density ``S_Q`` of the fluctuation ``Q - <Q>``."""
    if sector is not None and q.omega not in (None, sector.omega):
        raise SectorMismatchError("observable does not live in the given sector")
    _, _, psd = _pair_psd(q, q, state)
    return float(psd.real)
