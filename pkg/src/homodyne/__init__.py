"""Homodyne readout schemes in the two-photon formalism.

Fields are affine combinations of input ladder operators
(:mod:`homodyne.modes`), propagated through beam-splitter networks
(:mod:`homodyne.network`), and evaluated exactly under product coherent
states (:mod:`homodyne.moments`).  :mod:`homodyne.readout` builds the
balanced and double balanced observables, :mod:`homodyne.gw` the
gravitational-wave noise budgets, and :mod:`homodyne.fock` an independent
truncated-Fock-space check.
"""

from .fock import FockConfig, oracle_expect, oracle_symmetrized
from .gw import KimbleModel, NoiseBudgetRow, PassThroughModel, signal_referred_budget, theta_policy
from .modes import AffineMode, ModeId, Sideband, SidebandSector, SourceKind, from_quadratures, to_quadratures
from .moments import QuadObservable, expect, noise_psd, number, symmetrized_correlator
from .network import NetworkTopology, build_balanced_homodyne, build_eight_port, build_simple_homodyne, propagate
from .readout import feasibility, feasibility_table, t_b, t_theta
from .states import InputStateSpec, LoSpec

__version__ = "0.1.0"

__all__ = [
    "AffineMode",
    "ModeId",
    "Sideband",
    "SidebandSector",
    "SourceKind",
    "to_quadratures",
    "from_quadratures",
    "NetworkTopology",
    "build_simple_homodyne",
    "build_balanced_homodyne",
    "build_eight_port",
    "propagate",
    "InputStateSpec",
    "LoSpec",
    "QuadObservable",
    "number",
    "expect",
    "noise_psd",
    "symmetrized_correlator",
    "feasibility",
    "feasibility_table",
    "t_b",
    "t_theta",
    "KimbleModel",
    "PassThroughModel",
    "NoiseBudgetRow",
    "signal_referred_budget",
    "theta_policy",
    "FockConfig",
    "oracle_expect",
    "oracle_symmetrized",
]
