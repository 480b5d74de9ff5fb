"""Beam splitters, phase rotators and the canonical readout networks.

A :class:`NetworkTopology` is an acyclic graph of elements connected by named
wires.  Sources emit one wire, beam splitters consume two and emit two, phase
rotators consume one and emit one, and detectors terminate a wire.  Fields
are propagated in the Heisenberg picture as :class:`~homodyne.modes.AffineMode`
objects, so every detector port ends up as an exact linear combination of the
source modes of one sideband sector.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from graphlib import CycleError, TopologicalSorter
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from .modes import (
    AffineMode,
    ModeId,
    Sideband,
    SidebandSector,
    SourceKind,
    rotate,
    unit_phase,
)

__all__ = [
    "BSConvention",
    "Source",
    "BeamSplitter",
    "PhaseRotator",
    "Detector",
    "NetworkTopology",
    "NetworkError",
    "beam_splitter_map",
    "phase_rotate",
    "build_simple_homodyne",
    "build_balanced_homodyne",
    "build_eight_port",
    "named_network",
    "load_topology",
    "propagate",
    "propagate_wires",
    "input_mode_decomposition",
]


class NetworkError(ValueError):
    """Invalid wiring or element parameters."""


class BSConvention(str, enum.Enum):
    """Placement of the minus sign in a lossless beam splitter.

    ``PLUS``:  ``out1 = t in1 + r in2``, ``out2 = t in2 - r in1``.
    ``MINUS``: ``out1 = t in1 - r in2``, ``out2 = t in2 + r in1``.

    with ``t = sqrt(eta)`` and ``r = sqrt(1 - eta)``.
    """

    PLUS = "plus"
    MINUS = "minus"


def _check_eta(eta: float) -> float:
    eta = float(eta)
    if not (0.0 < eta < 1.0):
        raise NetworkError(f"beam-splitter transmissivity must lie in (0, 1), got {eta}")
    return eta


def bs_matrix(eta: float, convention: BSConvention | str = BSConvention.PLUS) -> np.ndarray:
    """2x2 scattering matrix ``S`` with ``(out1, out2) = S (in1, in2)``."""
    eta = _check_eta(eta)
    t, r = math.sqrt(eta), math.sqrt(1.0 - eta)
    if BSConvention(convention) is BSConvention.PLUS:
        return np.array([[t, r], [-r, t]])
    return np.array([[t, -r], [r, t]])


def beam_splitter_map(
    eta: float,
    in1: AffineMode,
    in2: AffineMode,
    convention: BSConvention | str = BSConvention.PLUS,
) -> tuple[AffineMode, AffineMode]:
    """Output fields of a lossless beam splitter."""
    s = bs_matrix(eta, convention)
    out1 = s[0, 0] * in1 + s[0, 1] * in2
    out2 = s[1, 0] * in1 + s[1, 1] * in2
    return out1, out2


def phase_rotate(x: AffineMode, phi: float) -> AffineMode:
    return rotate(x, phi)


# ---------------------------------------------------------------------------
# elements


@dataclass(frozen=True)
class Source:
    """Input port emitting the field of mode ``stem + sideband sign``."""

    name: str
    stem: str
    kind: SourceKind = SourceKind.AUX_VACUUM

    @property
    def inputs(self) -> tuple[str, ...]:
        return ()

    @property
    def outputs(self) -> tuple[str, ...]:
        return (self.name,)


@dataclass(frozen=True)
class BeamSplitter:
    name: str
    eta: float
    inputs: tuple[str, str]
    outputs: tuple[str, str]
    convention: BSConvention = BSConvention.PLUS

    def __post_init__(self) -> None:
        _check_eta(self.eta)
        object.__setattr__(self, "convention", BSConvention(self.convention))
        object.__setattr__(self, "inputs", tuple(self.inputs))
        object.__setattr__(self, "outputs", tuple(self.outputs))
        if len(self.inputs) != 2 or len(self.outputs) != 2:
            raise NetworkError(f"{self.name}: beam splitter needs 2 inputs and 2 outputs")

    def matrix(self) -> np.ndarray:
        return bs_matrix(self.eta, self.convention)


@dataclass(frozen=True)
class PhaseRotator:
    name: str
    phi: float
    inputs: tuple[str]
    outputs: tuple[str]

    def __post_init__(self) -> None:
        object.__setattr__(self, "inputs", tuple(self.inputs))
        object.__setattr__(self, "outputs", tuple(self.outputs))
        if len(self.inputs) != 1 or len(self.outputs) != 1:
            raise NetworkError(f"{self.name}: phase rotator needs 1 input and 1 output")

    def matrix(self) -> np.ndarray:
        return np.array([[unit_phase(self.phi)]])


@dataclass(frozen=True)
class Detector:
    """Photodetector terminating one wire; ``name`` is the port label."""

    name: str
    inputs: tuple[str]

    def __post_init__(self) -> None:
        object.__setattr__(self, "inputs", tuple(self.inputs))
        if len(self.inputs) != 1:
            raise NetworkError(f"{self.name}: detector needs exactly 1 input")

    @property
    def outputs(self) -> tuple[str, ...]:
        return ()


Element = Source | BeamSplitter | PhaseRotator | Detector


@dataclass(frozen=True)
class NetworkTopology:
    """Validated acyclic wiring of optical elements."""

    elements: tuple[Element, ...]
    name: str = "custom"
    order: tuple[str, ...] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        elements = tuple(self.elements)
        object.__setattr__(self, "elements", elements)
        names = [e.name for e in elements]
        if len(set(names)) != len(names):
            raise NetworkError("element names must be unique")

        producer: dict[str, str] = {}
        consumer: dict[str, str] = {}
        for e in elements:
            for w in e.outputs:
                if w in producer:
                    raise NetworkError(f"wire {w!r} produced twice")
                producer[w] = e.name
        for e in elements:
            for w in e.inputs:
                if w not in producer:
                    raise NetworkError(f"{e.name}: input wire {w!r} is not connected")
                if w in consumer:
                    raise NetworkError(f"wire {w!r} consumed by both {consumer[w]} and {e.name}")
                consumer[w] = e.name
        if not any(isinstance(e, Detector) for e in elements):
            raise NetworkError("network has no detector port")

        graph = {e.name: {producer[w] for w in e.inputs} for e in elements}
        try:
            order = tuple(TopologicalSorter(graph).static_order())
        except CycleError as exc:
            raise NetworkError(f"network wiring has a cycle: {exc.args[1]}") from None
        object.__setattr__(self, "order", order)

    # lookups ---------------------------------------------------------------
    def element(self, name: str) -> Element:
        for e in self.elements:
            if e.name == name:
                return e
        raise KeyError(name)

    @property
    def sources(self) -> tuple[Source, ...]:
        return tuple(e for e in self.elements if isinstance(e, Source))

    @property
    def detector_ports(self) -> tuple[str, ...]:
        return tuple(e.name for e in self.elements if isinstance(e, Detector))

    def consumer_of(self, wire: str) -> Element | None:
        for e in self.elements:
            if wire in e.inputs:
                return e
        return None

    # serialization -------------------------------------------------------
    def to_dict(self) -> dict[str, Any]:
        out = []
        for e in self.elements:
            if isinstance(e, Source):
                out.append({"kind": "source", "name": e.name, "mode": e.stem, "role": e.kind.value})
            elif isinstance(e, BeamSplitter):
                out.append(
                    {
                        "kind": "beam_splitter",
                        "name": e.name,
                        "eta": e.eta,
                        "convention": e.convention.value,
                        "inputs": list(e.inputs),
                        "outputs": list(e.outputs),
                    }
                )
            elif isinstance(e, PhaseRotator):
                out.append(
                    {
                        "kind": "phase_rotator",
                        "name": e.name,
                        "phi": e.phi,
                        "inputs": list(e.inputs),
                        "outputs": list(e.outputs),
                    }
                )
            else:
                out.append({"kind": "detector", "name": e.name, "inputs": list(e.inputs)})
        return {"name": self.name, "elements": out}

    @classmethod
    def from_dict(cls, doc: Mapping[str, Any]) -> "NetworkTopology":
        try:
            raw = doc["elements"]
            elements: list[Element] = []
            for item in raw:
                kind = item["kind"]
                if kind == "source":
                    elements.append(
                        Source(item["name"], item["mode"], SourceKind(item.get("role", "aux_vacuum")))
                    )
                elif kind == "beam_splitter":
                    elements.append(
                        BeamSplitter(
                            item["name"],
                            float(item["eta"]),
                            tuple(item["inputs"]),
                            tuple(item["outputs"]),
                            BSConvention(item.get("convention", "plus")),
                        )
                    )
                elif kind == "phase_rotator":
                    elements.append(
                        PhaseRotator(
                            item["name"], float(item["phi"]), tuple(item["inputs"]), tuple(item["outputs"])
                        )
                    )
                elif kind == "detector":
                    elements.append(Detector(item["name"], tuple(item["inputs"])))
                else:
                    raise NetworkError(f"unknown element kind {kind!r}")
        except (KeyError, TypeError) as exc:
            raise NetworkError(f"malformed topology document: {exc!r}") from None
        return cls(tuple(elements), str(doc.get("name", "custom")))


# ---------------------------------------------------------------------------
# canonical networks


def build_simple_homodyne(eta: float = 0.5) -> NetworkTopology:
    """Signal ``b`` and LO ``l`` on one beam splitter; one detector ``PD``."""
    return NetworkTopology(
        (
            Source("b", "a", SourceKind.MAIN_INPUT),
            Source("l", "l", SourceKind.LO),
            BeamSplitter("BS", eta, ("b", "l"), ("c_o", "d_o"), BSConvention.PLUS),
            Detector("PD", ("c_o",)),
        ),
        name="simple",
    )


def build_balanced_homodyne(eta: float = 0.5) -> NetworkTopology:
    """As the simple network, with both outputs detected (``D1``, ``D2``)."""
    return NetworkTopology(
        (
            Source("b", "a", SourceKind.MAIN_INPUT),
            Source("l", "l", SourceKind.LO),
            BeamSplitter("BS", eta, ("b", "l"), ("c_o", "d_o"), BSConvention.PLUS),
            Detector("D1", ("c_o",)),
            Detector("D2", ("d_o",)),
        ),
        name="balanced",
    )


def build_eight_port(eta: float = 0.5, eta4: float | None = None) -> NetworkTopology:
    """Double balanced homodyne network.

    The signal is split by the 50:50 splitter ``BS1`` together with vacuum
    ``e``; the LO by ``BS3`` together with vacuum ``f``.  One LO half is
    delayed by a quarter period (``PR``).  ``BS2`` mixes the first halves onto
    ``D1``/``D2``, ``BS4`` the second halves onto ``D4``/``D3``.

    Args:
        eta: Transmissivity of ``BS2`` (and of ``BS4`` unless ``eta4`` given).
        eta4: Optional independent transmissivity of ``BS4``.
    """
    eta4 = eta if eta4 is None else eta4
    return NetworkTopology(
        (
            Source("b", "a", SourceKind.MAIN_INPUT),
            Source("e", "e", SourceKind.AUX_VACUUM),
            Source("l", "l", SourceKind.LO),
            Source("f", "f", SourceKind.AUX_VACUUM),
            BeamSplitter("BS1", 0.5, ("b", "e"), ("b_1", "b_2"), BSConvention.MINUS),
            BeamSplitter("BS3", 0.5, ("l", "f"), ("l_0", "l_1"), BSConvention.MINUS),
            PhaseRotator("PR", math.pi / 2, ("l_1",), ("l_14",)),
            BeamSplitter("BS2", eta, ("b_1", "l_0"), ("c1_o", "d1_o"), BSConvention.PLUS),
            BeamSplitter("BS4", eta4, ("b_2", "l_14"), ("d2_o", "c2_o"), BSConvention.PLUS),
            Detector("D1", ("c1_o",)),
            Detector("D2", ("d1_o",)),
            Detector("D3", ("c2_o",)),
            Detector("D4", ("d2_o",)),
        ),
        name="eight-port",
    )


_BUILDERS = {
    "simple": build_simple_homodyne,
    "balanced": build_balanced_homodyne,
    "eight-port": build_eight_port,
}


def named_network(name: str, eta: float = 0.5) -> NetworkTopology:
    try:
        return _BUILDERS[name](eta)
    except KeyError:
        raise NetworkError(f"unknown network {name!r}; choose from {sorted(_BUILDERS)}") from None


def load_topology(source: str | Path | Mapping[str, Any], eta: float = 0.5) -> NetworkTopology:
    """Topology from a canonical name, a JSON file path, or a parsed document."""
    if isinstance(source, Mapping):
        return NetworkTopology.from_dict(source)
    if str(source) in _BUILDERS:
        return named_network(str(source), eta)
    with open(source, encoding="utf-8") as fh:
        return NetworkTopology.from_dict(json.load(fh))


# ---------------------------------------------------------------------------
# propagation


def propagate_wires(
    net: NetworkTopology,
    sector: SidebandSector,
    sideband: Sideband | str = Sideband.UPPER,
    inputs: Mapping[str, AffineMode] | None = None,
) -> dict[str, AffineMode]:
    """Field on every wire of ``net`` for one sideband of ``sector``.

    Args:
        inputs: Optional replacement fields keyed by source name, e.g. the
            output of a main-interferometer model for source ``"b"``.
    """
    sb = Sideband(sideband)
    inputs = dict(inputs or {})
    unknown = set(inputs) - {s.name for s in net.sources}
    if unknown:
        raise NetworkError(f"no source named {sorted(unknown)}")
    wires: dict[str, AffineMode] = {}
    for name in net.order:
        e = net.element(name)
        if isinstance(e, Source):
            x = inputs.get(e.name)
            wires[e.name] = sector.op(e.stem + sb.sign) if x is None else x.in_sector(sector.omega)
        elif isinstance(e, (BeamSplitter, PhaseRotator)):
            ins = [wires[w] for w in e.inputs]
            if isinstance(e, BeamSplitter):
                outs = beam_splitter_map(e.eta, ins[0], ins[1], e.convention)
            else:
                outs = (phase_rotate(ins[0], e.phi),)
            wires.update(zip(e.outputs, outs))
    return wires


def propagate(
    net: NetworkTopology,
    sector: SidebandSector,
    sideband: Sideband | str = Sideband.UPPER,
    inputs: Mapping[str, AffineMode] | None = None,
) -> dict[str, AffineMode]:
    """Detector-port fields, keyed by port label."""
    wires = propagate_wires(net, sector, sideband, inputs)
    return {e.name: wires[e.inputs[0]] for e in net.elements if isinstance(e, Detector)}


def backprop_mode(port: str, sideband: Sideband | str = Sideband.UPPER) -> ModeId:
    """Vacuum mode entering the network backwards through ``port``."""
    sb = Sideband(sideband)
    return ModeId(f"{port}_in{sb.sign}", sb, SourceKind.AUX_VACUUM)


def input_mode_decomposition(
    net: NetworkTopology,
    source: str = "b",
    sideband: Sideband | str = Sideband.UPPER,
    omega: float | None = None,
) -> AffineMode:
    """Field leaving the network backwards through source port ``source``.

    Each detector (and any undetected output wire) injects a vacuum mode
    travelling backwards; reciprocity means it scatters through the transpose
    of every element matrix.  For the eight-port network the result is the
    main-interferometer input ``a``, which involves none of the forward LO or
    auxiliary vacuum modes.
    """
    sb = Sideband(sideband)
    try:
        src = net.element(source)
    except KeyError:
        raise NetworkError(f"no source named {source!r}") from None
    if not isinstance(src, Source):
        raise NetworkError(f"{source!r} is not a source")

    memo: dict[str, AffineMode] = {}
    reached: list[str] = []

    def back(wire: str) -> AffineMode:
        if wire in memo:
            return memo[wire]
        e = net.consumer_of(wire)
        if e is None:
            x = AffineMode.annihilation(backprop_mode(wire, sb), omega)
        elif isinstance(e, Detector):
            reached.append(e.name)
            x = AffineMode.annihilation(backprop_mode(e.name, sb), omega)
        else:
            j = e.inputs.index(wire)
            s = e.matrix()
            x = AffineMode.zero(omega)
            for i, w in enumerate(e.outputs):
                x = x + complex(s[i, j]) * back(w)
        memo[wire] = x
        return x

    result = back(src.outputs[0])
    if not reached:
        raise NetworkError(f"source {source!r} reaches no detector; nothing to back-propagate")
    return result
