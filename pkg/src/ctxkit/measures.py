"""Contextual fraction, signalling fraction and cyclic Bell-inequality violations."""
from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .core import (
    DEFAULT_TOL,
    EmpiricalModel,
    Scenario,
    ScenarioError,
    cycle_order,
    is_nonsignalling,
    is_symmetric,
    marginalize,
    overlapping_pairs,
)
from .lp import LpProblem, solve_max

DEFAULT_GLOBAL_LIMIT = 2 ** 20
LIMIT_ENV = "CTXKIT_GLOBAL_LIMIT"


class GlobalAssignmentLimitError(ValueError):
    pass


def global_limit() -> int:
    raw = os.environ.get(LIMIT_ENV)
    if raw is None:
        return DEFAULT_GLOBAL_LIMIT
    try:
        return int(raw)
    except ValueError:
        raise ValueError(f"{LIMIT_ENV} must be an integer, got {raw!r}") from None


def global_assignments(scenario: Scenario, limit: int | None = None) -> np.ndarray:
    """All global assignments as rows of outcome indices, lexicographic order."""
    limit = global_limit() if limit is None else limit
    sizes = [len(o) for o in scenario.outcomes]
    total = int(np.prod(sizes, dtype=object))
    if total > limit:
        raise GlobalAssignmentLimitError(
            f"{total} global assignments exceed the limit of {limit} (set {LIMIT_ENV} to raise it)"
        )
    grids = np.indices(sizes).reshape(len(sizes), -1)
    return grids.T.copy()


def incidence_matrix(scenario: Scenario, limit: int | None = None) -> np.ndarray:
    """0/1 matrix, rows (context, section) in canonical order, columns global assignments."""
    g = global_assignments(scenario, limit)
    blocks = []
    for i, ctx in enumerate(scenario.contexts):
        shape = scenario.context_shape(i)
        cols = [scenario.obs_index(o) for o in ctx]
        section = np.ravel_multi_index(tuple(g[:, cols].T), shape)
        block = np.zeros((int(np.prod(shape)), g.shape[0]))
        block[section, np.arange(g.shape[0])] = 1.0
        blocks.append(block)
    return np.vstack(blocks)


@dataclass(frozen=True, eq=False)
class FractionResult:
    """Value of a fraction measure with the LP witness that attains it."""

    value: float
    witness: object
    iterations: int


def _clamp01(v):
    return float(min(1.0, max(0.0, v)))


def contextual_fraction(model: EmpiricalModel, tol: float = DEFAULT_TOL,
                        limit: int | None = None) -> FractionResult:
    """``1 -`` the largest mass of a global distribution dominated by the model.

    The witness is the sub-probability weight vector over
    :func:`global_assignments`.
    """
    m = incidence_matrix(model.scenario, limit)
    e = model.vector()
    sol = solve_max(LpProblem(np.ones(m.shape[1]), m, e), tol=tol)
    if not sol.optimal:
        raise RuntimeError(f"contextual fraction LP ended {sol.status}")
    return FractionResult(_clamp01(1.0 - sol.objective_value), sol.solution, sol.iterations)


def _signalling_lp(model: EmpiricalModel) -> tuple[LpProblem, list[slice]]:
    sc = model.scenario
    sizes = [sc.n_sections(i) for i in range(sc.n_contexts)]
    offsets = np.concatenate([[0], np.cumsum(sizes)])
    blocks = [slice(offsets[i], offsets[i + 1]) for i in range(len(sizes))]
    n_f = int(offsets[-1])
    mu = n_f
    n = n_f + 1

    a_ub = np.hstack([np.eye(n_f), np.zeros((n_f, 1))])
    b_ub = model.vector()

    eq_rows = []
    for i, blk in enumerate(blocks):
        row = np.zeros(n)
        row[blk] = 1.0
        row[mu] = -1.0
        eq_rows.append(row)
    for i, j, overlap in overlapping_pairs(sc):
        # marginal on overlap section t from context k: sum of f over sections restricting to t
        maps = []
        for k in (i, j):
            ctx = sc.contexts[k]
            shape = sc.context_shape(k)
            idx = np.arange(int(np.prod(shape))).reshape(shape)
            axes = [ctx.index(o) for o in overlap]
            moved = np.moveaxis(idx, axes, list(range(len(axes))))
            maps.append(moved.reshape(int(np.prod([shape[a] for a in axes])), -1))
        for t in range(maps[0].shape[0]):
            row = np.zeros(n)
            row[blocks[i].start + maps[0][t]] += 1.0
            row[blocks[j].start + maps[1][t]] -= 1.0
            eq_rows.append(row)
    a_eq = np.array(eq_rows)
    c = np.zeros(n)
    c[mu] = 1.0
    return LpProblem(c, a_ub, b_ub, a_eq, np.zeros(len(eq_rows))), blocks


def signalling_fraction(model: EmpiricalModel, tol: float = DEFAULT_TOL) -> FractionResult:
    """``1 -`` the largest mass of a non-signalling sub-model dominated by the model.

    The witness is a list of sub-normalised tables, one per context, all of
    total mass ``1 - sf`` and agreeing on every pairwise overlap.
    """
    problem, blocks = _signalling_lp(model)
    sol = solve_max(problem, tol=tol)
    if not sol.optimal:
        raise RuntimeError(f"signalling fraction LP ended {sol.status}")
    witness = [sol.solution[blk].copy() for blk in blocks]
    return FractionResult(_clamp01(1.0 - sol.objective_value), witness, sol.iterations)


@dataclass(frozen=True, eq=False)
class MeasureResult:
    cf: float
    sf: float
    noncontextual_witness: np.ndarray
    nonsignalling_witness: list
    n_contexts: int
    cf_iterations: int = 0
    sf_iterations: int = 0

    @property
    def emeriau_slack(self) -> float:
        return self.cf - 2 * self.n_contexts * self.sf

    @property
    def emeriau_conclusive(self) -> bool:
        return self.emeriau_slack > 0

    @property
    def sf_threshold(self) -> float:
        """Largest sf for which a maximally contextual model could still pass."""
        return 1.0 / (2 * self.n_contexts)


def fractions(model: EmpiricalModel, tol: float = DEFAULT_TOL) -> MeasureResult:
    cf = contextual_fraction(model, tol)
    sf = signalling_fraction(model, tol)
    return MeasureResult(cf.value, sf.value, cf.witness, sf.witness,
                         model.scenario.n_contexts, cf.iterations, sf.iterations)


def emeriau_conclusive(model: EmpiricalModel, tol: float = DEFAULT_TOL) -> tuple[bool, float]:
    """Whether ``cf > 2 |M| sf``, with the slack ``cf - 2 |M| sf``."""
    r = fractions(model, tol)
    return r.emeriau_conclusive, r.emeriau_slack


def _sign_values(sign_map):
    v = np.array([1.0, -1.0] if sign_map is None else sign_map, dtype=float)
    if v.shape != (2,):
        raise ValueError("sign map needs one value per binary outcome")
    return v


def check_binary_rank2(scenario: Scenario):
    for i, ctx in enumerate(scenario.contexts):
        if len(ctx) != 2:
            raise ScenarioError(f"context {i} has {len(ctx)} observables, need 2")
    if not scenario.is_binary():
        raise ScenarioError("every observable must be binary")


def cyclic_correlations(model: EmpiricalModel, sign_map=None) -> np.ndarray:
    """Product expectation of each context's two observables, in context order.

    Outcome index 0 counts as +1 and index 1 as -1 unless ``sign_map``
    says otherwise.
    """
    check_binary_rank2(model.scenario)
    v = _sign_values(sign_map)
    prod = np.outer(v, v).ravel()
    return np.array([float(t @ prod) for t in model.tables])


def s_odd_closed_form(x: np.ndarray) -> np.ndarray:
    """Vectorised :func:`s_odd` along the last axis."""
    x = np.asarray(x, dtype=float)
    a = np.abs(x)
    total = a.sum(axis=-1)
    odd_negative = (np.sum(x < 0, axis=-1) % 2) == 1
    return np.where(odd_negative, total, total - 2 * a.min(axis=-1))


def s_odd(x) -> float:
    """Maximum of ``sigma @ x`` over sign vectors with an odd number of -1s."""
    x = np.asarray(x, dtype=float).ravel()
    if x.size == 0:
        raise ValueError("s_odd needs a non-empty vector")
    return float(s_odd_closed_form(x))


@dataclass(frozen=True, eq=False)
class CyclicViolation:
    n: int
    correlations: np.ndarray
    s_odd_value: float
    violation: float


def cyclic_violation(model: EmpiricalModel, sign_map=None) -> CyclicViolation:
    """Violation ``s_odd(E) - (n - 2)`` of the n-cycle Bell inequality."""
    cycle_order(model.scenario)
    e = cyclic_correlations(model, sign_map)
    s = s_odd(e)
    return CyclicViolation(len(e), e, s, s - (len(e) - 2))


@dataclass(frozen=True)
class CfViolationRelation:
    lhs: float
    rhs: float
    applicable: bool
    holds_as_equality: bool


def cf_violation_relation(model: EmpiricalModel, tol: float = 1e-6,
                          cf: float | None = None) -> CfViolationRelation:
    """Compare ``max(0, violation / 2)`` with the contextual fraction.

    Equality is only claimed for outcome-symmetric non-signalling models;
    for others both sides are reported and ``holds_as_equality`` is False.
    """
    lhs = max(0.0, cyclic_violation(model).violation / 2)
    rhs = contextual_fraction(model).value if cf is None else cf
    applicable = is_nonsignalling(model, 1e-9) and is_symmetric(model, tol=1e-9)
    return CfViolationRelation(lhs, rhs, applicable, applicable and abs(lhs - rhs) <= tol)


def check_witness(model: EmpiricalModel, witness: np.ndarray, tol: float = 1e-7) -> bool:
    """Whether the global weights' marginals stay below the model everywhere."""
    m = incidence_matrix(model.scenario)
    return bool(np.all(witness >= -tol) and np.all(m @ witness <= model.vector() + tol))


def check_ns_witness(model: EmpiricalModel, witness, tol: float = 1e-7) -> bool:
    """Whether a signalling-fraction witness is dominated by the model and non-signalling."""
    sc = model.scenario
    for t, f in zip(model.tables, witness):
        if np.any(f < -tol) or np.any(f > t + tol):
            return False
    sub = EmpiricalModel(sc, witness)
    for i, j, overlap in overlapping_pairs(sc):
        a = marginalize(sub.distribution(i), overlap).probabilities
        b = marginalize(sub.distribution(j), overlap).probabilities
        if np.max(np.abs(a - b)) > tol:
            return False
    return True
