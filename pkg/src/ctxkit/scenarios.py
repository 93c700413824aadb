"""Built-in scenarios and empirical models.

Presets are addressable by name through :data:`PRESETS`:
``bell``, ``pr-box``, ``pr-prism``, ``ws``, ``gen-ws`` and ``sahara``.
"""
from __future__ import annotations

from fractions import Fraction as F

import numpy as np

from .core import EmpiricalModel, Scenario, ScenarioError, renormalize, uniform_model

BINARY = ("0", "1")

CORRELATED = (0.5, 0.0, 0.0, 0.5)
ANTICORRELATED = (0.0, 0.5, 0.5, 0.0)

# Human judgments collected for the cannibalistic/herbivorous, hungry/alive
# example, as published (3 decimals, so rows sum to 0.998).
SAHARA_TABLE = (
    (0.402, 0.097, 0.097, 0.402),
    (0.044, 0.455, 0.455, 0.044),
    (0.345, 0.154, 0.154, 0.345),
    (0.344, 0.155, 0.155, 0.344),
)


def bell_chsh_scenario() -> Scenario:
    return Scenario(
        ["a1", "a2", "b1", "b2"],
        BINARY,
        [("a1", "b1"), ("a1", "b2"), ("a2", "b1"), ("a2", "b2")],
    )


def bell_model() -> EmpiricalModel:
    rows = [
        (F(1, 2), 0, 0, F(1, 2)),
        (F(3, 8), F(1, 8), F(1, 8), F(3, 8)),
        (F(3, 8), F(1, 8), F(1, 8), F(3, 8)),
        (F(1, 8), F(3, 8), F(3, 8), F(1, 8)),
    ]
    return EmpiricalModel(bell_chsh_scenario(), [[float(x) for x in r] for r in rows])


def pr_box_model() -> EmpiricalModel:
    """PR box on the Bell-CHSH scenario; the second context is anti-correlated."""
    return EmpiricalModel(bell_chsh_scenario(), [CORRELATED, ANTICORRELATED, CORRELATED, CORRELATED])


def pr_prism_scenario() -> Scenario:
    return Scenario(["x1", "x2", "x3"], BINARY, [("x1", "x2"), ("x2", "x3"), ("x3", "x1")])


def pr_prism_model() -> EmpiricalModel:
    """Strongly contextual PR-prism model: same, same, other.

    The first two contexts are perfectly correlated and the closing one
    perfectly anti-correlated, so no global assignment fits all three.
    """
    return EmpiricalModel(pr_prism_scenario(), [CORRELATED, CORRELATED, ANTICORRELATED])


def _observable(pronoun: str, word: str) -> str:
    return f"{pronoun}:{word}"


def ws_scenario(pronoun: str, special: str, alternate: str, noun_a: str, noun_b: str) -> Scenario:
    """Two singleton contexts, (pronoun, special) and (pronoun, alternate)."""
    if special == alternate:
        raise ScenarioError("special and alternate words must differ")
    if noun_a == noun_b:
        raise ScenarioError("the two noun phrases must differ")
    s, a = _observable(pronoun, special), _observable(pronoun, alternate)
    return Scenario([s, a], (noun_a, noun_b), [(s,), (a,)])


def trophy_suitcase_scenario() -> Scenario:
    return ws_scenario("it", "small", "large", "trophy", "suitcase")


def ws_model() -> EmpiricalModel:
    """Deterministic trophy-suitcase model: small -> suitcase, large -> trophy."""
    return EmpiricalModel(trophy_suitcase_scenario(), [(0.0, 1.0), (1.0, 0.0)])


def ws_deterministic_models(scenario: Scenario) -> list[EmpiricalModel]:
    """Every deterministic model on a two-observable WS scenario."""
    points = [np.eye(len(scenario.outcomes[i])) for i in range(2)]
    return [EmpiricalModel(scenario, [p, q]) for p in points[0] for q in points[1]]


def generalized_ws_scenario(p1: str, s1: str, a1: str, p2: str, s2: str, a2: str,
                            noun_a: str = "A", noun_b: str = "B") -> Scenario:
    """Four observables, contexts (s1,s2), (s1,a2), (a1,s2), (a1,a2)."""
    if s1 == a1 or s2 == a2:
        raise ScenarioError("special and alternate words must differ")
    obs = [_observable(p1, s1), _observable(p1, a1), _observable(p2, s2), _observable(p2, a2)]
    if len(set(obs)) != 4:
        raise ScenarioError("generalised WS observables must be distinct")
    o1s, o1a, o2s, o2a = obs
    return Scenario(obs, (noun_a, noun_b), [(o1s, o2s), (o1s, o2a), (o1a, o2s), (o1a, o2a)])


def sahara_scenario() -> Scenario:
    return generalized_ws_scenario(
        "one of them_1", "canni", "herbi", "one of them_2", "hungry", "alive"
    )


def sahara_model(renormalize_rows: bool = True) -> EmpiricalModel:
    model = EmpiricalModel(sahara_scenario(), SAHARA_TABLE)
    return renormalize(model) if renormalize_rows else model


def gen_ws_model() -> EmpiricalModel:
    """Maximally mixed model on the Sahara generalised WS scenario."""
    return uniform_model(sahara_scenario())


PRESETS = {
    "bell": bell_model,
    "pr-box": pr_box_model,
    "pr-prism": pr_prism_model,
    "ws": ws_model,
    "gen-ws": gen_ws_model,
    "sahara": sahara_model,
}


def preset(name: str) -> EmpiricalModel:
    try:
        return PRESETS[name]()
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}") from None
