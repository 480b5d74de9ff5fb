"""Brute-force truncated Fock-space evaluation, used to cross-check the engine.

Operators are assembled from per-mode ladder matrices on the tensor product
of truncated Fock spaces and applied to the truncated, renormalized product
coherent state.  Modes are grouped into independent clusters (modes that
appear together in some field) so that each cluster is simulated in its own
smaller space; cross-cluster contributions factorize exactly because the
state is a product state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from .modes import AffineMode, ModeId
from .moments import Observable
from .states import InputStateSpec

__all__ = [
    "FockConfig",
    "FockGuardError",
    "coherent_vector",
    "truncation_loss",
    "oracle_expect",
    "oracle_symmetrized",
    "oracle_matrix",
]


class FockGuardError(RuntimeError):
    """Truncation or dimension limits would make the oracle unreliable."""


@dataclass(frozen=True)
class FockConfig:
    """Truncation settings.

    Attributes:
        cutoff: Fock dimension per coherent mode.
        vacuum_cutoff: Fock dimension for vacuum modes.  Observables are at
            most quadratic, so a vacuum mode is never raised above two
            quanta when evaluating ``<psi| A B |psi>`` as
            ``<A^dag psi | B psi>``; three levels are then exact.
            ``None`` uses ``cutoff``.
        max_dim: Largest allowed cluster dimension.
        norm_tol: Largest allowed truncated coherent-state norm loss.
    """

    cutoff: int = 14
    vacuum_cutoff: int | None = None
    max_dim: int = 10**6
    norm_tol: float = 1e-8

    def __post_init__(self) -> None:
        if self.cutoff < 2:
            raise ValueError("cutoff must be at least 2")
        if self.vacuum_cutoff is not None and self.vacuum_cutoff < 2:
            raise ValueError("vacuum_cutoff must be at least 2")

    def dim_for(self, amplitude: complex) -> int:
        if amplitude == 0 and self.vacuum_cutoff is not None:
            return self.vacuum_cutoff
        return self.cutoff


def truncation_loss(amplitude: complex, cutoff: int) -> float:
    """``1 - sum_{n<cutoff} |a|^{2n} e^{-|a|^2}/n!``."""
    x = abs(amplitude) ** 2
    kept = sum(math.exp(-x) * x**n / math.factorial(n) for n in range(cutoff))
    return max(0.0, 1.0 - kept)


def coherent_vector(amplitude: complex, cutoff: int) -> np.ndarray:
    """Truncated coherent state, renormalized."""
    n = np.arange(cutoff)
    logfact = np.array([math.lgamma(k + 1) for k in n])
    if amplitude == 0:
        vec = np.zeros(cutoff, dtype=complex)
        vec[0] = 1.0
        return vec
    mag = np.exp(n * math.log(abs(amplitude)) - 0.5 * logfact)
    vec = mag * np.exp(1j * n * np.angle(amplitude))
    return vec / np.linalg.norm(vec)


def _annihilator(dim: int) -> sp.csr_matrix:
    return sp.diags(np.sqrt(np.arange(1, dim)), 1, shape=(dim, dim), format="csr", dtype=complex)


class _Cluster:
    """Tensor-product space of a group of modes."""

    def __init__(self, modes: Sequence[ModeId], state: InputStateSpec, cfg: FockConfig):
        self.modes = tuple(modes)
        self.dims = [cfg.dim_for(state.amplitude(m)) for m in self.modes]
        self.dim = int(np.prod(self.dims))
        if self.dim > cfg.max_dim:
            raise FockGuardError(f"cluster dimension {self.dim} exceeds guard {cfg.max_dim}")
        vecs = []
        for m, d in zip(self.modes, self.dims):
            amp = state.amplitude(m)
            loss = truncation_loss(amp, d)
            if loss > cfg.norm_tol:
                raise FockGuardError(f"coherent amplitude {amp} of {m} loses {loss:.2e} of its norm at cutoff {d}")
            vecs.append(coherent_vector(amp, d))
        self.psi = reduce(np.kron, vecs)
        self._ladder: dict[ModeId, sp.csr_matrix] = {}
        for k, m in enumerate(self.modes):
            ops = [sp.identity(d, dtype=complex, format="csr") for d in self.dims]
            ops[k] = _annihilator(self.dims[k])
            self._ladder[m] = reduce(lambda a, b: sp.kron(a, b, format="csr"), ops)
        self.eye = sp.identity(self.dim, dtype=complex, format="csr")

    def field(self, x: AffineMode) -> sp.csr_matrix:
        mat = x.d * self.eye
        for m, c in x.u.items():
            mat = mat + c * self._ladder[m]
        for m, c in x.v.items():
            mat = mat + c * self._ladder[m].conj().T
        return sp.csr_matrix(mat)

    def operator(self, terms: Iterable[tuple[complex, AffineMode]], linear: Iterable[AffineMode]) -> sp.csr_matrix:
        mat = sp.csr_matrix((self.dim, self.dim), dtype=complex)
        for w, x in terms:
            fx = self.field(x)
            mat = mat + w * (fx.conj().T @ fx)
        for x in linear:
            mat = mat + self.field(x)
        return mat


def _parts(q: Observable) -> tuple[list[tuple[complex, AffineMode]], list[AffineMode], complex]:
    """Split into quadratic terms, pure-operator linear parts, and constant."""
    if isinstance(q, AffineMode):
        lin = AffineMode(q.u, q.v, 0.0, q.omega)
        return [], ([lin] if lin.support else []), q.d
    return list(q.terms), [], q.scalar


def _clusters(groups: Iterable[frozenset[ModeId]]) -> list[list[ModeId]]:
    """Connected components of modes that share a field."""
    parent: dict[ModeId, ModeId] = {}

    def find(m: ModeId) -> ModeId:
        while parent[m] != m:
            parent[m] = parent[parent[m]]
            m = parent[m]
        return m

    for g in groups:
        g = sorted(g)
        for m in g:
            parent.setdefault(m, m)
        for m in g[1:]:
            parent[find(m)] = find(g[0])
    comps: dict[ModeId, list[ModeId]] = {}
    for m in sorted(parent):
        comps.setdefault(find(m), []).append(m)
    return list(comps.values())


def _split(q: Observable, clusters: list[list[ModeId]]):
    """Per-cluster ``(terms, linear)`` plus the constant of ``q``."""
    terms, linear, const = _parts(q)
    where = {m: i for i, c in enumerate(clusters) for m in c}
    per = [([], []) for _ in clusters]
    for w, x in terms:
        if not x.support:
            const += w * abs(x.d) ** 2
            continue
        per[where[next(iter(x.support))]][0].append((w, x))
    for x in linear:
        per[where[next(iter(x.support))]][1].append(x)
    return per, const


def _groups(q: Observable) -> list[frozenset[ModeId]]:
    terms, linear, _ = _parts(q)
    return [x.support for _, x in terms if x.support] + [x.support for x in linear]


def oracle_matrix(q: Observable, state: InputStateSpec, cfg: FockConfig = FockConfig()) -> sp.csr_matrix:
    """Matrix of ``q`` on the joint truncated space of all its modes (one cluster)."""
    modes = sorted(q.support)
    per, const = _split(q, [modes] if modes else [])
    if not modes:
        return sp.csr_matrix(np.array([[const]], dtype=complex))
    cl = _Cluster(modes, state, cfg)
    return sp.csr_matrix(const * cl.eye + cl.operator(*per[0]))


def oracle_expect(q: Observable, state: InputStateSpec, cfg: FockConfig = FockConfig()) -> complex:
    """``<psi| Q |psi>`` by explicit matrices."""
    clusters = _clusters(_groups(q))
    per, const = _split(q, clusters)
    total = complex(const)
    for modes, (terms, linear) in zip(clusters, per):
        cl = _Cluster(modes, state, cfg)
        op = cl.operator(terms, linear)
        total += complex(np.vdot(cl.psi, op @ cl.psi))
    return total


def oracle_symmetrized(
    q: Observable, qp: Observable, state: InputStateSpec, cfg: FockConfig = FockConfig()
) -> complex:
    """``<(Q Q'^dag + Q'^dag Q)/2>`` with both observables in one sector."""
    clusters = _clusters(_groups(q) + _groups(qp))
    per_q, cq = _split(q, clusters)
    per_p, cp = _split(qp, clusters)
    mean_q, mean_p = complex(cq), complex(cp)
    connected = 0j
    for modes, (tq, lq), (tp, lp) in zip(clusters, per_q, per_p):
        cl = _Cluster(modes, state, cfg)
        a = cl.operator(tq, lq)
        b = cl.operator(tp, lp)
        a_psi = a @ cl.psi
        b_psi = b @ cl.psi
        adag_psi = a.conj().T @ cl.psi
        bdag_psi = b.conj().T @ cl.psi
        ea = complex(np.vdot(cl.psi, a_psi))
        eb = complex(np.vdot(cl.psi, b_psi))
        # <A B^dag> = <A^dag psi | B^dag psi>,  <B^dag A> = <B psi | A psi>
        ab = complex(np.vdot(adag_psi, bdag_psi))
        ba = complex(np.vdot(b_psi, a_psi))
        mean_q += ea
        mean_p += eb
        connected += 0.5 * (ab + ba) - ea * eb.conjugate()
    return mean_q * mean_p.conjugate() + connected
