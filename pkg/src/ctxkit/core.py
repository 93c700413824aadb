"""Measurement scenarios, empirical models and the operations on them.

Joint outcomes of a context are indexed lexicographically by outcome index,
first observable of the context most significant.  Every probability table
in the package is a flat vector in that order, so a table reshaped to the
context's outcome-set sizes (C order) is the joint distribution tensor.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Mapping, NamedTuple, Sequence

import numpy as np

DEFAULT_NORM_TOL = 1e-6
DEFAULT_TOL = 1e-9


class ScenarioError(ValueError):
    """A scenario or model violates a structural invariant."""


@dataclass(frozen=True)
class Scenario:
    """Observables, per-observable outcome labels and a cover of contexts.

    ``outcomes`` may be a mapping from observable to labels, or a single
    sequence of labels shared by every observable.
    """

    observables: tuple[str, ...]
    outcomes: tuple[tuple[str, ...], ...]
    contexts: tuple[tuple[str, ...], ...]
    _obs_index: dict = field(init=False, repr=False, compare=False)

    def __init__(self, observables, outcomes, contexts):
        observables = tuple(str(o) for o in observables)
        if isinstance(outcomes, Mapping):
            missing = [o for o in observables if o not in outcomes]
            if missing:
                raise ScenarioError(f"no outcomes given for {missing}")
            extra = set(outcomes) - set(observables)
            if extra:
                raise ScenarioError(f"outcomes given for unknown observables {sorted(extra)}")
            outs = tuple(tuple(str(x) for x in outcomes[o]) for o in observables)
        else:
            labels = tuple(str(x) for x in outcomes)
            outs = tuple(labels for _ in observables)
        object.__setattr__(self, "observables", observables)
        object.__setattr__(self, "outcomes", outs)
        object.__setattr__(self, "contexts", tuple(tuple(str(o) for o in c) for c in contexts))
        object.__setattr__(self, "_obs_index", {o: i for i, o in enumerate(observables)})
        self._check()

    def _check(self):
        if not self.observables:
            raise ScenarioError("scenario has no observables")
        if len(set(self.observables)) != len(self.observables):
            raise ScenarioError("observable identifiers must be unique")
        for obs, labels in zip(self.observables, self.outcomes):
            if len(labels) < 2:
                raise ScenarioError(f"observable {obs!r} needs at least 2 outcomes")
            if len(set(labels)) != len(labels):
                raise ScenarioError(f"duplicate outcome labels for {obs!r}")
        if not self.contexts:
            raise ScenarioError("scenario has no contexts")
        seen = set()
        for i, ctx in enumerate(self.contexts):
            if not ctx:
                raise ScenarioError(f"context {i} is empty")
            if len(set(ctx)) != len(ctx):
                raise ScenarioError(f"context {i} repeats an observable")
            unknown = [o for o in ctx if o not in self._obs_index]
            if unknown:
                raise ScenarioError(f"context {i} names unknown observables {unknown}")
            key = frozenset(ctx)
            if key in seen:
                raise ScenarioError(f"context {i} duplicates an earlier context")
            seen.add(key)
        covered = set().union(*map(set, self.contexts))
        uncovered = [o for o in self.observables if o not in covered]
        if uncovered:
            raise ScenarioError(f"contexts do not cover {uncovered}")

    def obs_index(self, observable: str) -> int:
        try:
            return self._obs_index[observable]
        except KeyError:
            raise ScenarioError(f"unknown observable {observable!r}") from None

    def outcome_labels(self, observable: str) -> tuple[str, ...]:
        return self.outcomes[self.obs_index(observable)]

    def context_index(self, context) -> int:
        """Resolve a context given as an index or as a collection of observables."""
        if isinstance(context, (int, np.integer)):
            if not 0 <= context < len(self.contexts):
                raise ScenarioError(f"context index {context} out of range")
            return int(context)
        key = frozenset(context)
        for i, ctx in enumerate(self.contexts):
            if frozenset(ctx) == key:
                return i
        raise ScenarioError(f"unknown context {tuple(context)}")

    def context_shape(self, context) -> tuple[int, ...]:
        ctx = self.contexts[self.context_index(context)]
        return tuple(len(self.outcome_labels(o)) for o in ctx)

    def n_sections(self, context) -> int:
        return int(np.prod(self.context_shape(context)))

    @property
    def n_contexts(self) -> int:
        return len(self.contexts)

    def is_binary(self) -> bool:
        return all(len(o) == 2 for o in self.outcomes)


@dataclass(frozen=True)
class Section:
    """An assignment of outcome indices to the observables of a context."""

    observables: tuple[str, ...]
    assignment: tuple[int, ...]

    def __post_init__(self):
        if len(self.observables) != len(self.assignment):
            raise ValueError("section needs one outcome per observable")


@dataclass(frozen=True, eq=False)
class ContextDistribution:
    context: tuple[str, ...]
    shape: tuple[int, ...]
    probabilities: np.ndarray

    def __post_init__(self):
        p = np.array(self.probabilities, dtype=float).ravel()
        if p.size != int(np.prod(self.shape, dtype=int)):
            raise ValueError(
                f"distribution on {self.context} needs {int(np.prod(self.shape))} entries, got {p.size}"
            )
        p.setflags(write=False)
        object.__setattr__(self, "probabilities", p)
        object.__setattr__(self, "context", tuple(self.context))
        object.__setattr__(self, "shape", tuple(int(s) for s in self.shape))

    def __getitem__(self, i):
        return self.probabilities[i]


@dataclass(frozen=True, eq=False)
class EmpiricalModel:
    """One probability table per context of ``scenario``, in context order.

    Only shapes are checked here; use :func:`validate` for value checks, so
    that slightly off data (e.g. rounded published tables) can still be held
    and reported on.
    """

    scenario: Scenario
    tables: tuple[np.ndarray, ...]

    def __init__(self, scenario: Scenario, tables: Iterable):
        tables = [np.array(t, dtype=float).ravel() for t in tables]
        if len(tables) != scenario.n_contexts:
            raise ScenarioError(
                f"model has {len(tables)} distributions for {scenario.n_contexts} contexts"
            )
        for i, t in enumerate(tables):
            if t.size != scenario.n_sections(i):
                raise ScenarioError(
                    f"distribution {i} has {t.size} entries, context needs {scenario.n_sections(i)}"
                )
            t.setflags(write=False)
        object.__setattr__(self, "scenario", scenario)
        object.__setattr__(self, "tables", tuple(tables))

    def distribution(self, context) -> ContextDistribution:
        i = self.scenario.context_index(context)
        return ContextDistribution(
            self.scenario.contexts[i], self.scenario.context_shape(i), self.tables[i]
        )

    @property
    def distributions(self) -> list[ContextDistribution]:
        return [self.distribution(i) for i in range(self.scenario.n_contexts)]

    def vector(self) -> np.ndarray:
        """All tables concatenated in (context, section) order."""
        return np.concatenate(self.tables)

    def allclose(self, other: "EmpiricalModel", atol=1e-12) -> bool:
        return self.scenario == other.scenario and all(
            np.allclose(a, b, rtol=0, atol=atol) for a, b in zip(self.tables, other.tables)
        )


def enumerate_sections(scenario: Scenario, context) -> list[Section]:
    i = scenario.context_index(context)
    ctx = scenario.contexts[i]
    shape = scenario.context_shape(i)
    return [Section(ctx, tuple(a)) for a in itertools.product(*map(range, shape))]


def restrict(section: Section, subset: Sequence[str]) -> Section:
    """Sub-assignment of ``section`` on ``subset`` (kept in the given order)."""
    subset = _ordered_subset(section.observables, subset)
    pos = {o: k for k, o in enumerate(section.observables)}
    return Section(tuple(subset), tuple(section.assignment[pos[o]] for o in subset))


def _ordered_subset(context: Sequence[str], subset) -> list[str]:
    if isinstance(subset, (set, frozenset)):
        ordered = [o for o in context if o in subset]
        if len(ordered) != len(subset):
            raise ScenarioError(f"{sorted(subset)} is not contained in context {tuple(context)}")
        return ordered
    subset = list(subset)
    bad = [o for o in subset if o not in context]
    if bad or len(set(subset)) != len(subset):
        raise ScenarioError(f"{subset} is not a subset of context {tuple(context)}")
    return subset


def marginalize(dist: ContextDistribution, subset) -> ContextDistribution:
    """Marginal of ``dist`` on ``subset``.

    A sequence keeps its own order for the result's context; a set is
    ordered as in ``dist.context``.
    """
    subset = _ordered_subset(dist.context, subset)
    axes = [dist.context.index(o) for o in subset]
    tensor = dist.probabilities.reshape(dist.shape)
    drop = tuple(k for k in range(len(dist.shape)) if k not in axes)
    summed = tensor.sum(axis=drop) if drop else tensor
    # remaining axes are in context order; permute into subset order
    kept = sorted(axes)
    out = np.transpose(summed, [kept.index(a) for a in axes]) if axes else summed
    shape = tuple(dist.shape[a] for a in axes)
    return ContextDistribution(tuple(subset), shape, np.asarray(out).ravel())


class SignallingDeviation(NamedTuple):
    value: float
    overlap: tuple[str, ...] | None
    contexts: tuple[int, int] | None
    section: tuple[int, ...] | None


def overlapping_pairs(scenario: Scenario):
    """Yield ``(i, j, overlap)`` for context pairs i < j sharing observables."""
    for i, j in itertools.combinations(range(scenario.n_contexts), 2):
        cj = set(scenario.contexts[j])
        overlap = tuple(o for o in scenario.contexts[i] if o in cj)
        if overlap:
            yield i, j, overlap


def max_signalling_deviation(model: EmpiricalModel) -> SignallingDeviation:
    best = SignallingDeviation(0.0, None, None, None)
    for i, j, overlap in overlapping_pairs(model.scenario):
        mi = marginalize(model.distribution(i), overlap)
        mj = marginalize(model.distribution(j), overlap)
        diff = np.abs(mi.probabilities - mj.probabilities)
        k = int(np.argmax(diff))
        if diff[k] > best.value:
            section = tuple(int(x) for x in np.unravel_index(k, mi.shape))
            best = SignallingDeviation(float(diff[k]), overlap, (i, j), section)
    return best


def is_nonsignalling(model: EmpiricalModel, tol: float = DEFAULT_TOL) -> bool:
    if tol < 0:
        raise ValueError("tolerance must be non-negative")
    return max_signalling_deviation(model).value <= tol


def _involution_table(scenario: Scenario, involution) -> list[np.ndarray]:
    if involution is None:
        if not scenario.is_binary():
            raise ValueError("default outcome swap needs binary observables")
        perms = [np.array([1, 0]) for _ in scenario.observables]
    elif isinstance(involution, Mapping):
        perms = [np.asarray(involution[o]) for o in scenario.observables]
    else:
        perms = [np.asarray(involution) for _ in scenario.observables]
    for obs, labels, p in zip(scenario.observables, scenario.outcomes, perms):
        if p.shape != (len(labels),):
            raise ValueError(f"permutation for {obs!r} has wrong length")
        if sorted(p.tolist()) != list(range(len(labels))):
            raise ValueError(f"{p.tolist()} is not a permutation")
        if not np.array_equal(p[p], np.arange(len(labels))):
            raise ValueError(f"{p.tolist()} is not an involution")
    return perms


def permute_outcomes(model: EmpiricalModel, permutations) -> EmpiricalModel:
    """Relabel outcomes consistently in every context.

    ``permutations`` maps observable to a permutation ``perm`` of its outcome
    indices; outcome ``k`` becomes ``perm[k]``.  Observables not named are
    left alone.
    """
    sc = model.scenario
    tables = []
    for i, ctx in enumerate(sc.contexts):
        tensor = model.tables[i].reshape(sc.context_shape(i))
        for axis, obs in enumerate(ctx):
            if obs in permutations:
                perm = np.asarray(permutations[obs])
                inverse = np.argsort(perm)
                tensor = np.take(tensor, inverse, axis=axis)
        tables.append(tensor.ravel())
    return EmpiricalModel(sc, tables)


def symmetrize(model: EmpiricalModel, involution=None) -> EmpiricalModel:
    """Average every table with its image under an outcome involution.

    ``involution`` is a permutation applied to every observable, a mapping
    from observable to permutation, or ``None`` for swapping binary outcomes.
    """
    sc = model.scenario
    perms = _involution_table(sc, involution)
    index = dict(zip(sc.observables, perms))
    swapped = permute_outcomes(model, index)
    return EmpiricalModel(sc, [(a + b) / 2 for a, b in zip(model.tables, swapped.tables)])


def is_symmetric(model: EmpiricalModel, involution=None, tol: float = DEFAULT_TOL) -> bool:
    """Whether the model is invariant under the outcome involution."""
    try:
        perms = _involution_table(model.scenario, involution)
    except ValueError:
        return False
    swapped = permute_outcomes(model, dict(zip(model.scenario.observables, perms)))
    return all(np.max(np.abs(a - b)) <= tol for a, b in zip(model.tables, swapped.tables))


@dataclass(frozen=True)
class Violation:
    location: str
    message: str

    def __str__(self):
        return f"{self.location}: {self.message}"


def validate(model: EmpiricalModel, tol: float = DEFAULT_NORM_TOL) -> list[Violation]:
    """Every broken value invariant of ``model``; empty when valid."""
    problems = []
    sc = model.scenario
    if len(model.tables) != sc.n_contexts:
        problems.append(Violation("$.distributions", "one distribution per context required"))
    for i, table in enumerate(model.tables):
        loc = f"$.distributions[{i}]"
        if i >= sc.n_contexts:
            problems.append(Violation(loc, "no matching context"))
            continue
        if table.size != sc.n_sections(i):
            problems.append(Violation(loc, f"expected {sc.n_sections(i)} entries, got {table.size}"))
            continue
        if not np.all(np.isfinite(table)):
            problems.append(Violation(loc, "non-finite probability"))
            continue
        for k in np.flatnonzero(table < 0):
            problems.append(Violation(f"{loc}[{k}]", f"negative probability {table[k]!r}"))
        total = float(table.sum())
        if abs(total - 1.0) > tol:
            problems.append(
                Violation(loc, f"probabilities sum to {total:.12g}, off by {abs(total - 1):.3g} > tol {tol:g}")
            )
    return problems


def renormalize(model: EmpiricalModel) -> EmpiricalModel:
    """Divide every table by its total."""
    tables = []
    for i, t in enumerate(model.tables):
        s = t.sum()
        if not s > 0:
            raise ScenarioError(f"distribution {i} has no positive mass")
        tables.append(t / s)
    return EmpiricalModel(model.scenario, tables)


def uniform_model(scenario: Scenario) -> EmpiricalModel:
    return EmpiricalModel(
        scenario, [np.full(scenario.n_sections(i), 1.0 / scenario.n_sections(i))
                   for i in range(scenario.n_contexts)]
    )


def mix(model: EmpiricalModel, other: EmpiricalModel, t: float) -> EmpiricalModel:
    """Convex combination ``(1 - t) * model + t * other``."""
    if model.scenario != other.scenario:
        raise ScenarioError("models live on different scenarios")
    return EmpiricalModel(
        model.scenario, [(1 - t) * a + t * b for a, b in zip(model.tables, other.tables)]
    )


def is_deterministic(model: EmpiricalModel, tol: float = DEFAULT_TOL) -> bool:
    return all(np.isclose(t.max(), 1.0, rtol=0, atol=tol) for t in model.tables)


def cycle_order(scenario: Scenario) -> list[int]:
    """Context indices ordered around the single cycle the scenario forms.

    Requires rank-2 contexts with every observable in exactly two contexts
    and a connected incidence graph.  The walk starts at context 0 and heads
    toward whichever neighbouring context has the smaller index.
    """
    contexts = scenario.contexts
    bad = [i for i, c in enumerate(contexts) if len(c) != 2]
    if bad:
        raise ScenarioError(f"contexts {bad} do not have exactly 2 observables")
    containing: dict[str, list[int]] = {o: [] for o in scenario.observables}
    for i, c in enumerate(contexts):
        for o in c:
            containing[o].append(i)
    bad_obs = [o for o, cs in containing.items() if len(cs) != 2]
    if bad_obs:
        raise ScenarioError(f"observables {bad_obs} are not in exactly 2 contexts")

    def neighbour(ctx, via):
        a, b = containing[via]
        return b if a == ctx else a

    u, v = contexts[0]
    via = v if neighbour(0, v) <= neighbour(0, u) else u
    order, current = [0], 0
    while True:
        nxt = neighbour(current, via)
        if nxt == 0:
            break
        order.append(nxt)
        via = next(o for o in contexts[nxt] if o != via)
        current = nxt
    if len(order) != len(contexts):
        raise ScenarioError("contexts do not form a single cycle")
    return order
