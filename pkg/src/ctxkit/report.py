"""Aggregate all measures for one model into a plain, JSON-ready report."""
from __future__ import annotations

from .cbd import classify_cbd
from .core import (
    DEFAULT_NORM_TOL,
    DEFAULT_TOL,
    EmpiricalModel,
    ScenarioError,
    is_deterministic,
    is_symmetric,
    max_signalling_deviation,
)
from .measures import contextual_fraction, cyclic_violation, signalling_fraction

ALL_MEASURES = ("cf", "sf", "emeriau", "chsh", "cbd")


def parse_measures(text: str | None) -> tuple[str, ...]:
    if not text:
        return ALL_MEASURES
    names = tuple(m.strip() for m in text.split(",") if m.strip())
    unknown = [m for m in names if m not in ALL_MEASURES]
    if unknown:
        raise ValueError(f"unknown measures {unknown}; choose from {', '.join(ALL_MEASURES)}")
    return names


def analyze(model: EmpiricalModel, source: str, measures=ALL_MEASURES,
            tol: float = DEFAULT_TOL, norm_tol: float = DEFAULT_NORM_TOL) -> dict:
    """Compute the requested measures; inapplicable ones land under ``errors``."""
    sc = model.scenario
    dev = max_signalling_deviation(model)
    report: dict = {
        "model": {
            "source": source,
            "n_observables": len(sc.observables),
            "n_contexts": sc.n_contexts,
        },
        "tolerances": {"lp": tol, "nonsignalling": tol, "normalization": norm_tol},
        "nonsignalling": {"nonsignalling": dev.value <= tol, "max_deviation": dev.value},
    }
    errors: dict = {}
    notes: list = []
    want = set(measures)
    cf = sf = None

    if want & {"cf", "emeriau"}:
        try:
            r = contextual_fraction(model, tol)
            cf = r.value
            report["cf"] = {"cf": cf, "iterations": r.iterations}
        except (ValueError, RuntimeError) as exc:
            errors["cf"] = str(exc)
    if want & {"sf", "emeriau"}:
        try:
            r = signalling_fraction(model, tol)
            sf = r.value
            report["sf"] = {"sf": sf, "iterations": r.iterations}
        except (ValueError, RuntimeError) as exc:
            errors["sf"] = str(exc)
    if "emeriau" in want:
        if cf is None or sf is None:
            errors["emeriau"] = "needs both cf and sf"
        else:
            threshold = 1.0 / (2 * sc.n_contexts)
            slack = cf - 2 * sc.n_contexts * sf
            report["emeriau"] = {
                "conclusive": slack > 0,
                "slack": slack,
                "sf_threshold": threshold,
                "sf_below": sf < threshold,
            }

    violation = None
    if "chsh" in want:
        try:
            v = cyclic_violation(model)
            violation = v.violation
            report["chsh"] = {
                "n": v.n,
                "correlations": [float(x) for x in v.correlations],
                "s_odd": v.s_odd_value,
                "violation": v.violation,
            }
        except ScenarioError as exc:
            errors["chsh"] = str(exc)
    if "cbd" in want:
        try:
            c = classify_cbd(model)
            report["cbd"] = {
                "delta": c.delta,
                "s_odd": c.s_odd_value,
                "cnt1": c.cnt1,
                "contextual": c.contextual,
                "delta_below_2": c.delta_below_2,
            }
            notes.append("cnt1 equals cnt2 for cyclic systems")
            if c.delta_below_2 != c.contextual:
                notes.append("direct influence below 2 disagrees with the cnt1 > 0 verdict")
        except ScenarioError as exc:
            errors["cbd"] = str(exc)

    if cf is not None and violation is not None:
        lhs = max(0.0, violation / 2)
        applicable = report["nonsignalling"]["nonsignalling"] and is_symmetric(model, tol=tol)
        report["relation"] = {
            "half_violation": lhs,
            "cf": cf,
            "applicable": applicable,
            "holds_as_equality": bool(applicable and abs(lhs - cf) <= 1e-6),
        }
    if cf is not None and is_deterministic(model) and cf <= tol:
        notes.append("deterministic, non-contextual")
    report["notes"] = notes
    report["errors"] = errors
    return report


BATCH_COLUMNS = (
    "file", "status", "error", "n_contexts", "nonsignalling", "max_deviation",
    "cf", "sf", "emeriau_conclusive", "emeriau_slack", "sf_below",
    "violation", "delta", "cnt1", "cbd_contextual",
)


def batch_row(file: str, report: dict | None, error: str | None = None) -> dict:
    row = {k: "" for k in BATCH_COLUMNS}
    row["file"] = file
    if report is None:
        row["status"] = "error"
        row["error"] = error or ""
        return row
    row["status"] = "ok"
    row["n_contexts"] = report["model"]["n_contexts"]
    row["nonsignalling"] = report["nonsignalling"]["nonsignalling"]
    row["max_deviation"] = report["nonsignalling"]["max_deviation"]
    if "cf" in report:
        row["cf"] = report["cf"]["cf"]
    if "sf" in report:
        row["sf"] = report["sf"]["sf"]
    if "emeriau" in report:
        row["emeriau_conclusive"] = report["emeriau"]["conclusive"]
        row["emeriau_slack"] = report["emeriau"]["slack"]
        row["sf_below"] = report["emeriau"]["sf_below"]
    if "chsh" in report:
        row["violation"] = report["chsh"]["violation"]
    if "cbd" in report:
        row["delta"] = report["cbd"]["delta"]
        row["cnt1"] = report["cbd"]["cnt1"]
        row["cbd_contextual"] = report["cbd"]["contextual"]
    return row
