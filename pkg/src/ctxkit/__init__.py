"""Sheaf-theoretic contextuality and signalling measures for empirical models."""

__version__ = "0.1.0"

from .core import (
    ContextDistribution,
    EmpiricalModel,
    Scenario,
    ScenarioError,
    Section,
    enumerate_sections,
    is_nonsignalling,
    marginalize,
    max_signalling_deviation,
    restrict,
    symmetrize,
    validate,
)
from .measures import (
    contextual_fraction,
    cyclic_violation,
    emeriau_conclusive,
    s_odd,
    signalling_fraction,
)
from .cbd import classify_cbd, to_cyclic_system
from .stats import BootstrapConfig, bootstrap, resample
from .scenarios import PRESETS, preset

__all__ = [
    "BootstrapConfig", "ContextDistribution", "EmpiricalModel", "PRESETS", "Scenario",
    "ScenarioError", "Section", "bootstrap", "classify_cbd", "contextual_fraction",
    "cyclic_violation", "emeriau_conclusive", "enumerate_sections", "is_nonsignalling",
    "marginalize", "max_signalling_deviation", "preset", "resample", "restrict", "s_odd",
    "signalling_fraction", "symmetrize", "to_cyclic_system", "validate",
]
