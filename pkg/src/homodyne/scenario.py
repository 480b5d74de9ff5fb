"""JSON scenario files for the command-line driver.

A scenario (``"schema_version": 1``) looks like::

    {
      "schema_version": 1,
      "network": "eight-port",
      "lo": {"gamma_abs": 1000.0},
      "model": {"kind": "kimble", "K": 2.0, "beta": 0.0, "h_sql": 1.0, "h": [0.0, 0.0]},
      "grid": {"omega_min": 10.0, "omega_max": 1000.0, "points": 5, "spacing": "log"},
      "readout": {"policy": "cot_half_K", "eta": 0.5, "large_gamma": true},
      "outputs": {"path": "budget.csv", "format": "csv"}
    }

``lo`` is ``{"gamma_abs": g}`` (equal moduli, phases equal to the readout
angle), ``{"abs_plus", "abs_minus", "theta_plus", "theta_minus"}`` (omitted
phases follow the readout angle), or ``{"table": [[omega, re+, im+, re-, im-], ...]}``.

``model.kind`` is ``vacuum``, ``pass_through`` or ``kimble``.  For ``kimble``,
``K`` is a number, a table ``[[omega, K], ...]`` (linear interpolation), or
``{"kind": "fabry_perot", "power_ratio": p, "cavity_pole": g}`` which sets
``K = 2 p g^4 / (Omega^2 (g^2 + Omega^2))`` and, unless ``beta`` is given,
``beta = arctan(Omega/g)``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Callable, Mapping

import jsonschema
import numpy as np

from .gw import GwModel, KimbleModel, PassThroughModel, ThetaPolicy, theta_policy
from .network import NetworkError, NetworkTopology, load_topology
from .states import LoSpec

__all__ = ["SCHEMA_VERSION", "SCENARIO_SCHEMA", "ScenarioError", "Scenario", "load_scenario", "parse_scenario"]

SCHEMA_VERSION = 1

_complex = {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}
_number_or_complex = {"oneOf": [{"type": "number"}, _complex]}

SCENARIO_SCHEMA: dict[str, Any] = {
    "type": "object",
    "required": ["schema_version", "grid"],
    "additionalProperties": False,
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "name": {"type": "string"},
        "network": {"oneOf": [{"type": "string"}, {"type": "object"}]},
        "lo": {
            "oneOf": [
                {
                    "type": "object",
                    "required": ["gamma_abs"],
                    "additionalProperties": False,
                    "properties": {"gamma_abs": {"type": "number", "exclusiveMinimum": 0}},
                },
                {
                    "type": "object",
                    "required": ["abs_plus", "abs_minus"],
                    "additionalProperties": False,
                    "properties": {
                        "abs_plus": {"type": "number", "exclusiveMinimum": 0},
                        "abs_minus": {"type": "number", "exclusiveMinimum": 0},
                        "theta_plus": {"type": "number"},
                        "theta_minus": {"type": "number"},
                    },
                },
                {
                    "type": "object",
                    "required": ["table"],
                    "additionalProperties": False,
                    "properties": {
                        "table": {
                            "type": "array",
                            "minItems": 1,
                            "items": {"type": "array", "minItems": 5, "maxItems": 5, "items": {"type": "number"}},
                        }
                    },
                },
            ]
        },
        "model": {
            "type": "object",
            "required": ["kind"],
            "additionalProperties": False,
            "properties": {
                "kind": {"enum": ["vacuum", "pass_through", "kimble"]},
                "response": _number_or_complex,
                "h": _number_or_complex,
                "K": {
                    "oneOf": [
                        {"type": "number"},
                        {"type": "array", "minItems": 1, "items": {"type": "array", "minItems": 2, "maxItems": 2, "items": {"type": "number"}}},
                        {
                            "type": "object",
                            "required": ["kind", "power_ratio", "cavity_pole"],
                            "additionalProperties": False,
                            "properties": {
                                "kind": {"const": "fabry_perot"},
                                "power_ratio": {"type": "number", "exclusiveMinimum": 0},
                                "cavity_pole": {"type": "number", "exclusiveMinimum": 0},
                            },
                        },
                    ]
                },
                "beta": {"type": "number"},
                "h_sql": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "grid": {
            "type": "object",
            "required": ["omega_min", "omega_max", "points"],
            "additionalProperties": False,
            "properties": {
                "omega_min": {"type": "number", "exclusiveMinimum": 0},
                "omega_max": {"type": "number", "exclusiveMinimum": 0},
                "points": {"type": "integer", "minimum": 1},
                "spacing": {"enum": ["linear", "log"]},
            },
        },
        "readout": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "theta": {"type": "number"},
                "policy": {"enum": [p.value for p in ThetaPolicy]},
                "eta": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
                "large_gamma": {"type": "boolean"},
                "include_signal_power": {"type": "boolean"},
            },
        },
        "outputs": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"path": {"type": "string"}, "format": {"enum": ["csv", "json"]}},
        },
    },
}


class ScenarioError(ValueError):
    """The scenario file is malformed or inconsistent."""


@dataclass(frozen=True)
class Scenario:
    """Validated scenario with flag overrides applied."""

    grid: tuple[float, ...]
    network: str | Mapping[str, Any] = "eight-port"
    gamma_abs: float = 1.0e3
    lo_doc: Mapping[str, Any] | None = None
    model_doc: Mapping[str, Any] | None = None
    theta: float | None = None
    policy: str | None = None
    eta: float = 0.5
    large_gamma: bool = False
    include_signal_power: bool = True
    out_path: str | None = None
    out_format: str = "csv"

    def lo(self, theta: float) -> LoSpec:
        """LO amplitudes; phases not fixed by the scenario follow ``theta``."""
        doc = self.lo_doc or {}
        if "table" in doc:
            return LoSpec.from_table(doc["table"])
        if "abs_plus" in doc:
            return LoSpec.polar(
                doc["abs_plus"], doc["abs_minus"], doc.get("theta_plus", theta), doc.get("theta_minus", theta)
            )
        return LoSpec.polar(self.gamma_abs, self.gamma_abs, theta, theta)

    def common_gamma_abs(self) -> float:
        """Single LO modulus with phases following the readout angle, if the scenario has one."""
        doc = self.lo_doc or {}
        if "table" in doc or "theta_plus" in doc or "theta_minus" in doc:
            raise ScenarioError("the noise budget needs LO phases that follow the homodyne angle")
        if "abs_plus" in doc:
            if doc["abs_plus"] != doc["abs_minus"]:
                raise ScenarioError("the noise budget needs equal LO moduli on both sidebands")
            return float(doc["abs_plus"])
        return self.gamma_abs

    def model(self) -> GwModel:
        return build_model(self.model_doc or {"kind": "vacuum"})

    def topology(self) -> NetworkTopology:
        try:
            return load_topology(self.network, self.eta)
        except (NetworkError, OSError, json.JSONDecodeError, KeyError, TypeError) as exc:
            raise ScenarioError(f"bad network: {exc}") from exc

    def theta_fn(self, model: GwModel) -> Callable[[GwModel, float], float]:
        policy = self.policy
        if policy is None:
            policy = "cot_half_K" if isinstance(model, KimbleModel) and self.theta is None else "fixed"
        if policy == ThetaPolicy.COT_HALF_K.value and not isinstance(model, KimbleModel):
            raise ScenarioError("policy cot_half_K needs a kimble model")
        theta = math.pi / 2 if self.theta is None else self.theta
        return theta_policy(policy, theta)

    def with_overrides(self, **kw: Any) -> "Scenario":
        kw = {k: v for k, v in kw.items() if v is not None}
        if "gamma_abs" in kw:
            kw["lo_doc"] = None
        if "theta" in kw and "policy" not in kw:
            kw["policy"] = ThetaPolicy.FIXED.value
        out = replace(self, **kw)
        if not 0.0 < out.eta < 1.0:
            raise ScenarioError("eta must lie in (0, 1)")
        if not out.gamma_abs > 0:
            raise ScenarioError("gamma_abs must be positive")
        return out


def _cplx(v: Any) -> complex:
    return complex(v[0], v[1]) if isinstance(v, list) else complex(v)


def _k_function(doc: Any) -> tuple[Any, Any]:
    """``(K, default beta)`` from the ``K`` entry."""
    if isinstance(doc, (int, float)):
        return float(doc), None
    if isinstance(doc, list):
        ws = np.array([r[0] for r in doc], dtype=float)
        ks = np.array([r[1] for r in doc], dtype=float)
        if np.any(np.diff(ws) <= 0):
            raise ScenarioError("K table frequencies must be strictly increasing")

        def k_table(omega: float) -> float:
            if omega < ws[0] or omega > ws[-1]:
                raise ValueError(f"omega={omega} outside K table range")
            return float(np.interp(omega, ws, ks))

        return k_table, None
    p, g = float(doc["power_ratio"]), float(doc["cavity_pole"])
    return (
        lambda omega: 2.0 * p * g**4 / (omega**2 * (g**2 + omega**2)),
        lambda omega: math.atan(omega / g),
    )


def build_model(doc: Mapping[str, Any]) -> GwModel:
    kind = doc["kind"]
    if kind == "vacuum":
        return PassThroughModel(1.0, 0.0)
    if kind == "pass_through":
        return PassThroughModel(_cplx(doc.get("response", 1.0)), _cplx(doc.get("h", 0.0)))
    if "K" not in doc:
        raise ScenarioError("kimble model needs K")
    k, beta_default = _k_function(doc["K"])
    beta = doc.get("beta", beta_default if beta_default is not None else 0.0)
    return KimbleModel(k, beta, float(doc.get("h_sql", 1.0)), _cplx(doc.get("h", 0.0)))


def make_grid(doc: Mapping[str, Any]) -> tuple[float, ...]:
    lo, hi, n = float(doc["omega_min"]), float(doc["omega_max"]), int(doc["points"])
    if n == 1:
        if hi != lo:
            raise ScenarioError("a one-point grid needs omega_min == omega_max")
        return (lo,)
    if not hi > lo:
        raise ScenarioError("grid must be strictly increasing (omega_max > omega_min)")
    if doc.get("spacing", "linear") == "log":
        pts = np.geomspace(lo, hi, n)
    else:
        pts = np.linspace(lo, hi, n)
    return tuple(float(x) for x in pts)


def parse_scenario(doc: Any) -> Scenario:
    try:
        jsonschema.validate(doc, SCENARIO_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ScenarioError(f"schema violation at {where}: {exc.message}") from exc
    model_doc = doc.get("model", {"kind": "vacuum"})
    try:
        build_model(model_doc)
    except (KeyError, TypeError, ValueError) as exc:
        raise ScenarioError(f"bad model: {exc}") from exc
    readout = doc.get("readout", {})
    outputs = doc.get("outputs", {})
    sc = Scenario(
        grid=make_grid(doc["grid"]),
        network=doc.get("network", "eight-port"),
        gamma_abs=float(doc.get("lo", {}).get("gamma_abs", 1.0e3)),
        lo_doc=doc.get("lo"),
        model_doc=model_doc,
        theta=readout.get("theta"),
        policy=readout.get("policy"),
        eta=float(readout.get("eta", 0.5)),
        large_gamma=bool(readout.get("large_gamma", False)),
        include_signal_power=bool(readout.get("include_signal_power", True)),
        out_path=outputs.get("path"),
        out_format=outputs.get("format", "csv"),
    )
    if sc.lo_doc and "table" in sc.lo_doc:
        try:
            lo = sc.lo(0.0)
            for w in sc.grid:
                lo.at(w)
        except ValueError as exc:
            raise ScenarioError(f"bad LO table: {exc}") from exc
    if sc.policy == ThetaPolicy.FIXED.value and sc.theta is None:
        raise ScenarioError("policy 'fixed' needs readout.theta")
    return sc


def load_scenario(path: str | Path) -> Scenario:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"malformed JSON: {exc}") from exc
    return parse_scenario(doc)
