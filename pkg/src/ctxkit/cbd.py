"""Contextuality-by-Default analysis of cyclic systems.

A cyclic system has ``n`` contexts of two contents each, every content
appearing in exactly two contexts.  Such a system is contextual iff

    cnt1 = s_odd(product expectations) - delta - n + 2 > 0

where ``delta`` (direct influence) sums, over contents, the absolute
difference of the content's expectation in its two contexts.  For these
systems cnt2 coincides with cnt1, so only one value is carried.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import EmpiricalModel, ScenarioError, cycle_order
from .measures import check_binary_rank2, s_odd

_NEG_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class CyclicSystem:
    """Contents, contexts in cycle order, and per-context expectations.

    ``expectations[j]`` is ``(<R_a>, <R_b>, <R_a R_b>)`` for
    ``context_pairs[j] == (a, b)``.
    """

    contents: tuple[str, ...]
    context_pairs: tuple[tuple[str, str], ...]
    expectations: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "contents", tuple(self.contents))
        object.__setattr__(self, "context_pairs", tuple(tuple(p) for p in self.context_pairs))
        ex = np.array(self.expectations, dtype=float).reshape(len(self.context_pairs), 3)
        ex.setflags(write=False)
        object.__setattr__(self, "expectations", ex)
        self._check()

    @property
    def n(self) -> int:
        return len(self.context_pairs)

    def _check(self):
        if self.n < 2:
            raise ScenarioError("a cyclic system needs at least 2 contexts")
        for j, pair in enumerate(self.context_pairs):
            if len(pair) != 2 or pair[0] == pair[1]:
                raise ScenarioError(f"context {j} must hold two distinct contents")
            unknown = [q for q in pair if q not in self.contents]
            if unknown:
                raise ScenarioError(f"context {j} names unknown contents {unknown}")
        for q in self.contents:
            k = sum(q in pair for pair in self.context_pairs)
            if k != 2:
                raise ScenarioError(f"content {q!r} appears in {k} contexts, need 2")
        # consecutive contexts must share a content, closing into one cycle
        for j in range(self.n):
            if not set(self.context_pairs[j]) & set(self.context_pairs[(j + 1) % self.n]):
                raise ScenarioError("contexts are not listed in cycle order")
        if len(self.contents) != self.n:
            raise ScenarioError("contexts do not form a single cycle")
        if np.any(np.abs(self.expectations) > 1 + _NEG_TOL):
            raise ScenarioError("expectations must lie in [-1, 1]")
        cells = pair_cells(self.expectations)
        if np.any(cells < -_NEG_TOL):
            raise ScenarioError("expectations do not come from a joint distribution")

    def expectation(self, content: str, context: int) -> float:
        pair = self.context_pairs[context]
        return float(self.expectations[context, pair.index(content)])

    def contexts_of(self, content: str) -> tuple[int, int]:
        js = [j for j, pair in enumerate(self.context_pairs) if content in pair]
        return js[0], js[1]

    def pairwise_distributions(self) -> np.ndarray:
        """Joint tables in canonical order (index 0 is +1), one row per context."""
        return pair_cells(self.expectations)


def pair_cells(expectations) -> np.ndarray:
    """Cell probabilities ``p(x, y) = (1 + x ea + y eb + x y eab) / 4``, x, y in (+1, -1)."""
    ex = np.asarray(expectations, dtype=float)
    ea, eb, eab = ex[..., 0], ex[..., 1], ex[..., 2]
    cells = [(1 + x * ea + y * eb + x * y * eab) / 4 for x in (1, -1) for y in (1, -1)]
    return np.stack(cells, axis=-1)


def table_expectations(tables) -> np.ndarray:
    """``(<R_a>, <R_b>, <R_a R_b>)`` from binary rank-2 tables along the last axis."""
    p = np.asarray(tables, dtype=float)
    ea = p[..., 0] + p[..., 1] - p[..., 2] - p[..., 3]
    eb = p[..., 0] - p[..., 1] + p[..., 2] - p[..., 3]
    eab = p[..., 0] - p[..., 1] - p[..., 2] + p[..., 3]
    return np.stack([ea, eb, eab], axis=-1)


def to_cyclic_system(model: EmpiricalModel) -> CyclicSystem:
    sc = model.scenario
    check_binary_rank2(sc)
    order = cycle_order(sc)
    pairs = [sc.contexts[j] for j in order]
    ex = table_expectations(np.array([model.tables[j] for j in order]))
    return CyclicSystem(sc.observables, pairs, ex)


def direct_influence(system: CyclicSystem) -> float:
    total = 0.0
    for q in system.contents:
        j, k = system.contexts_of(q)
        total += abs(system.expectation(q, j) - system.expectation(q, k))
    return total


@dataclass(frozen=True)
class CbdResult:
    delta: float
    s_odd_value: float
    cnt1: float
    n: int

    @property
    def contextual(self) -> bool:
        return self.cnt1 > 0

    @property
    def delta_below_2(self) -> bool:
        return self.delta < 2


def cnt1(system: CyclicSystem) -> CbdResult:
    delta = direct_influence(system)
    s = s_odd(system.expectations[:, 2])
    return CbdResult(delta, s, s - delta - system.n + 2, system.n)


def classify_cbd(model: EmpiricalModel) -> CbdResult:
    return cnt1(to_cyclic_system(model))
