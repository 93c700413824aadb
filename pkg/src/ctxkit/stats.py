"""Multinomial bootstrap of empirical models.

Randomness comes from numpy's Philox4x64 counter-based generator keyed by the
user seed.  Each context draws ``counts[C]`` uniforms per resample and maps
them to sections by inverse CDF over the canonical section order, so results
depend only on the seed, the model and the counts.
"""
from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

from .cbd import table_expectations
from .core import EmpiricalModel, cycle_order
from .measures import check_binary_rank2, contextual_fraction, cyclic_correlations, s_odd_closed_form

DEFAULT_COUNTS = 87
DEFAULT_SAMPLES = 100_000
DEFAULT_BINS = 40

MEASURES = ("violation", "cnt1", "cf")
_ALIASES = {"cyclic_violation": "violation", "chsh": "violation"}


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))


def _counts_for(model: EmpiricalModel, counts) -> np.ndarray:
    n_ctx = model.scenario.n_contexts
    arr = np.atleast_1d(np.asarray(counts))
    if arr.size == 1:
        arr = np.full(n_ctx, arr.item())
    if arr.size != n_ctx:
        raise ValueError(f"need {n_ctx} per-context counts, got {arr.size}")
    if not np.all(arr == np.floor(arr)) or np.any(arr < 1):
        raise ValueError("per-context counts must be positive integers")
    return arr.astype(np.int64)


def _draw_frequencies(rng: np.random.Generator, table: np.ndarray, count: int, size: int,
                      chunk: int = 1 << 22) -> np.ndarray:
    """``size`` resampled frequency vectors for one context, shape (size, sections).

    Draws are taken row by row in chunks; the chunking does not change the
    stream, so results are independent of ``chunk``.
    """
    cdf = np.cumsum(table)
    last = int(np.flatnonzero(table > 0)[-1])
    k = table.size
    hits = np.empty((size, k), dtype=np.int64)
    rows_per = max(1, chunk // count)
    for start in range(0, size, rows_per):
        n = min(rows_per, size - start)
        u = rng.random((n, count)) * cdf[-1]
        idx = np.minimum(np.searchsorted(cdf, u, side="right"), last)
        flat = (idx + k * np.arange(n)[:, None]).ravel()
        hits[start:start + n] = np.bincount(flat, minlength=n * k).reshape(n, k)
    return hits / count


def resample(model: EmpiricalModel, counts, seed: int) -> EmpiricalModel:
    """Empirical frequencies of ``counts[C]`` i.i.d. draws from each context."""
    counts = _counts_for(model, counts)
    rng = make_rng(seed)
    tables = [_draw_frequencies(rng, t, int(c), 1)[0] for t, c in zip(model.tables, counts)]
    return EmpiricalModel(model.scenario, tables)


@dataclass(frozen=True)
class BootstrapConfig:
    n_samples: int = DEFAULT_SAMPLES
    counts: object = DEFAULT_COUNTS
    seed: int = 0
    measure: str = "violation"
    bins: int = DEFAULT_BINS

    def __post_init__(self):
        m = _ALIASES.get(self.measure, self.measure)
        if m not in MEASURES:
            raise ValueError(f"unknown measure {self.measure!r}; choose from {MEASURES}")
        object.__setattr__(self, "measure", m)
        if self.n_samples < 1:
            raise ValueError("n_samples must be positive")
        if self.bins < 1:
            raise ValueError("bins must be positive")


@dataclass(frozen=True, eq=False)
class BootstrapResult:
    measure: str
    n_samples: int
    seed: int
    mean: float
    std: float
    min: float
    max: float
    fraction_positive: float
    bin_edges: np.ndarray
    hist_counts: np.ndarray
    values: np.ndarray = field(repr=False)

    def summary(self) -> dict:
        return {
            "measure": self.measure,
            "n_samples": self.n_samples,
            "seed": self.seed,
            "mean": self.mean,
            "std": self.std,
            "min": self.min,
            "max": self.max,
            "fraction_positive": self.fraction_positive,
        }


def _cyclic_values(model, freqs, measure):
    check_binary_rank2(model.scenario)
    order = cycle_order(model.scenario)
    ex = table_expectations(np.stack(freqs, axis=1))  # (samples, contexts, 3)
    s = s_odd_closed_form(ex[..., 2])
    n = len(order)
    if measure == "violation":
        return s - (n - 2)
    sc = model.scenario
    delta = np.zeros(ex.shape[0])
    for q in sc.observables:
        (j, pj), (k, pk) = [(i, ctx.index(q)) for i, ctx in enumerate(sc.contexts) if q in ctx]
        delta += np.abs(ex[:, j, pj] - ex[:, k, pk])
    return s - delta - n + 2


def bootstrap_values(model: EmpiricalModel, config: BootstrapConfig) -> np.ndarray:
    """The measure recomputed on each of ``config.n_samples`` resamples."""
    counts = _counts_for(model, config.counts)
    rng = make_rng(config.seed)
    freqs = [_draw_frequencies(rng, t, int(c), config.n_samples)
             for t, c in zip(model.tables, counts)]
    if config.measure in ("violation", "cnt1"):
        return _cyclic_values(model, freqs, config.measure)
    out = np.empty(config.n_samples)
    for i in range(config.n_samples):
        sample = EmpiricalModel(model.scenario, [f[i] for f in freqs])
        out[i] = contextual_fraction(sample).value
    return out


def bootstrap(model: EmpiricalModel, config: BootstrapConfig = BootstrapConfig()) -> BootstrapResult:
    if config.measure in ("violation", "cnt1"):
        cyclic_correlations(model)  # fail early on non-cyclic models
    values = bootstrap_values(model, config)
    hist, edges = np.histogram(values, bins=config.bins)
    std = float(values.std(ddof=1)) if values.size > 1 else 0.0
    return BootstrapResult(
        measure=config.measure,
        n_samples=config.n_samples,
        seed=config.seed,
        mean=float(values.mean()),
        std=std,
        min=float(values.min()),
        max=float(values.max()),
        fraction_positive=float(np.mean(values > 0)),
        bin_edges=edges,
        hist_counts=hist,
        values=values,
    )


def histogram_csv(result: BootstrapResult) -> str:
    buf = io.StringIO()
    buf.write("bin_low,bin_high,count\n")
    edges = result.bin_edges
    for lo, hi, n in zip(edges[:-1], edges[1:], result.hist_counts):
        buf.write(f"{float(lo)!r},{float(hi)!r},{int(n)}\n")
    return buf.getvalue()
