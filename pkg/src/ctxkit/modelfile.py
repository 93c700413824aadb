"""JSON model files.

A model file looks like::

    {
      "name": "bell",                      # optional
      "scenario": {
        "observables": ["a1", "a2", "b1", "b2"],
        "outcomes": ["0", "1"],            # or {"a1": ["0", "1"], ...}
        "contexts": [["a1", "b1"], ...]
      },
      "distributions": [
        {"a1=0,b1=0": "1/2", "a1=1,b1=1": "1/2"},   # missing sections are 0
        ["3/8", "1/8", "1/8", "3/8"],               # or canonical order
        ...
      ]
    }

Probabilities are JSON numbers or strings holding a decimal or an exact
fraction ``p/q``.  Files are written in the keyed form with every section
listed and probabilities as shortest round-trip decimal strings.
"""
from __future__ import annotations

import json
import math
from fractions import Fraction
from pathlib import Path

import numpy as np

from .core import EmpiricalModel, Scenario, ScenarioError, enumerate_sections, renormalize

TOP_KEYS = {"name", "scenario", "distributions"}
SCENARIO_KEYS = {"observables", "outcomes", "contexts"}
_RESERVED = (",", "=")


class ModelFileError(ValueError):
    """A model file is well-formed JSON but does not describe a model."""

    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(self.diagnostics))


def parse_probability(value, where: str) -> float:
    if isinstance(value, bool):
        raise ModelFileError([f"{where}: expected a probability, got {value!r}"])
    if isinstance(value, (int, float)):
        x = float(value)
    elif isinstance(value, str):
        try:
            x = float(Fraction(value.strip()))
        except (ValueError, ZeroDivisionError):
            raise ModelFileError([f"{where}: cannot parse probability {value!r}"]) from None
    else:
        raise ModelFileError([f"{where}: expected a probability, got {type(value).__name__}"])
    if not math.isfinite(x):
        raise ModelFileError([f"{where}: probability must be finite"])
    return x


def format_probability(x: float) -> str:
    return repr(float(x))


def section_key(scenario: Scenario, section) -> str:
    return ",".join(
        f"{o}={scenario.outcome_labels(o)[k]}" for o, k in zip(section.observables, section.assignment)
    )


def _scenario_from(doc, diags) -> Scenario | None:
    if not isinstance(doc, dict):
        diags.append("$.scenario: expected an object")
        return None
    for k in sorted(set(doc) - SCENARIO_KEYS):
        diags.append(f"$.scenario.{k}: unknown key")
    for k in sorted(SCENARIO_KEYS - set(doc)):
        diags.append(f"$.scenario.{k}: missing")
    if diags:
        return None
    obs, outs, ctxs = doc["observables"], doc["outcomes"], doc["contexts"]
    if not (isinstance(obs, list) and all(isinstance(o, str) for o in obs)):
        diags.append("$.scenario.observables: expected a list of strings")
    else:
        for o in obs:
            if any(ch in o for ch in _RESERVED):
                diags.append(f"$.scenario.observables: {o!r} contains ',' or '='")
    if not (isinstance(ctxs, list) and all(isinstance(c, list) for c in ctxs)):
        diags.append("$.scenario.contexts: expected a list of lists")
    if not isinstance(outs, (list, dict)):
        diags.append("$.scenario.outcomes: expected a list or an object")
    if diags:
        return None
    try:
        return Scenario(obs, outs, ctxs)
    except ScenarioError as exc:
        diags.append(f"$.scenario: {exc}")
        return None


def _table_from(scenario: Scenario, i: int, entry, diags) -> np.ndarray | None:
    where = f"$.distributions[{i}]"
    sections = enumerate_sections(scenario, i)
    if isinstance(entry, list):
        if len(entry) != len(sections):
            diags.append(f"{where}: expected {len(sections)} probabilities, got {len(entry)}")
            return None
        try:
            return np.array([parse_probability(v, f"{where}[{k}]") for k, v in enumerate(entry)])
        except ModelFileError as exc:
            diags.extend(exc.diagnostics)
            return None
    if isinstance(entry, dict):
        index = {section_key(scenario, s): k for k, s in enumerate(sections)}
        table = np.zeros(len(sections))
        ok = True
        for key, v in entry.items():
            norm = ",".join(part.strip() for part in key.split(","))
            if norm not in index:
                diags.append(f"{where}.{key}: unknown section for context {list(scenario.contexts[i])}")
                ok = False
                continue
            try:
                table[index[norm]] = parse_probability(v, f"{where}.{key}")
            except ModelFileError as exc:
                diags.extend(exc.diagnostics)
                ok = False
        return table if ok else None
    diags.append(f"{where}: expected an object or a list")
    return None


def model_from_dict(doc, renormalize_rows: bool = False) -> EmpiricalModel:
    """Build a model from a decoded model file; raises :class:`ModelFileError`."""
    diags: list[str] = []
    if not isinstance(doc, dict):
        raise ModelFileError(["$: expected an object"])
    for k in sorted(set(doc) - TOP_KEYS):
        diags.append(f"$.{k}: unknown key")
    for k in ("scenario", "distributions"):
        if k not in doc:
            diags.append(f"$.{k}: missing")
    if diags:
        raise ModelFileError(diags)
    scenario = _scenario_from(doc["scenario"], diags)
    if scenario is None:
        raise ModelFileError(diags)
    dists = doc["distributions"]
    if not isinstance(dists, list):
        raise ModelFileError(["$.distributions: expected a list"])
    if len(dists) != scenario.n_contexts:
        diags.append(
            f"$.distributions: {len(dists)} distributions for {scenario.n_contexts} contexts"
        )
        raise ModelFileError(diags)
    tables = [_table_from(scenario, i, e, diags) for i, e in enumerate(dists)]
    if diags:
        raise ModelFileError(diags)
    model = EmpiricalModel(scenario, tables)
    if renormalize_rows:
        try:
            model = renormalize(model)
        except ScenarioError as exc:
            raise ModelFileError([f"$.distributions: {exc}"]) from None
    return model


def model_to_dict(model: EmpiricalModel, name: str | None = None) -> dict:
    sc = model.scenario
    for o in sc.observables:
        if any(ch in o for ch in _RESERVED):
            raise ValueError(f"observable {o!r} cannot be written: contains ',' or '='")
    labels = set(sc.outcomes)
    outcomes = list(sc.outcomes[0]) if len(labels) == 1 else {
        o: list(l) for o, l in zip(sc.observables, sc.outcomes)
    }
    doc = {}
    if name is not None:
        doc["name"] = name
    doc["scenario"] = {
        "observables": list(sc.observables),
        "outcomes": outcomes,
        "contexts": [list(c) for c in sc.contexts],
    }
    doc["distributions"] = [
        {section_key(sc, s): format_probability(p)
         for s, p in zip(enumerate_sections(sc, i), model.tables[i])}
        for i in range(sc.n_contexts)
    ]
    return doc


def dumps(model: EmpiricalModel, name: str | None = None) -> str:
    return json.dumps(model_to_dict(model, name), indent=2, ensure_ascii=False) + "\n"


def loads(text: str, renormalize_rows: bool = False) -> EmpiricalModel:
    return model_from_dict(json.loads(text), renormalize_rows)


def load(path, renormalize_rows: bool = False) -> EmpiricalModel:
    return loads(Path(path).read_text(encoding="utf-8"), renormalize_rows)


def dump(model: EmpiricalModel, path, name: str | None = None) -> None:
    Path(path).write_text(dumps(model, name), encoding="utf-8")
