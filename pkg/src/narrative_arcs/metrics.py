"""Compatibility metrics of models and ensembles against the median arc."""

from __future__ import annotations

import csv
import io
import json
import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field

import numpy as np

from .arcs import Arc, EnsembleArcs
from .errors import AllExactMatch, EmptyFamily, LengthMismatch, TooShort
from .scorers import format_float

EPS = 1e-12


def _distance(model_arc: Arc, median_arc: Arc) -> float:
    a = np.asarray(getattr(model_arc, "y", model_arc), dtype=float)
    b = np.asarray(getattr(median_arc, "y", median_arc), dtype=float)
    if a.shape != b.shape:
        raise LengthMismatch(f"arc lengths differ: {len(a)} vs {len(b)}")
    diff = a - b
    return math.sqrt(math.fsum((diff * diff).tolist()))


def is_exact_match(model_arc, median_arc) -> bool:
    return _distance(model_arc, median_arc) < EPS


def mcc(model_arc, median_arc) -> float:
    """Model-corpus compatibility: length over Euclidean distance to the median.

    A zero distance is clamped to ``EPS`` so an arc identical to the median
    scores ``L / EPS``; see :func:`is_exact_match`.
    """
    n = len(np.asarray(getattr(model_arc, "y", model_arc)))
    dist = _distance(model_arc, median_arc)
    if n < 2:
        raise TooShort("MCC needs arcs of length >= 2")
    return n / max(EPS, dist)


def ecc(arcs: Sequence, median_arc) -> float:
    """Ensemble-corpus compatibility: reciprocal of summed length-normalized distances."""
    total = math.fsum(_distance(a, median_arc) / len(np.asarray(getattr(a, "y", a))) for a in arcs)
    if total < EPS:
        raise AllExactMatch("every model matches the median exactly")
    return 1.0 / total


def mfc(mcc_values: Mapping[str, float], families: Mapping[str, str]) -> tuple[dict, dict]:
    """Per-family aggregates of MCC.

    Returns ``(literal, mean)``: the reciprocal of the family's MCC sum and
    the family's mean MCC.
    """
    groups: dict[str, list[float]] = {}
    for model, value in mcc_values.items():
        fam = families.get(model)
        if not fam:
            raise EmptyFamily(f"model {model!r} has no family")
        groups.setdefault(fam, []).append(value)
    literal = {f: 1.0 / math.fsum(v) for f, v in sorted(groups.items())}
    mean = {f: math.fsum(v) / len(v) for f, v in sorted(groups.items())}
    return literal, mean


def rank_models(mcc_values: Mapping[str, float]) -> list[str]:
    """Model ids by descending MCC, ties broken by id."""
    return sorted(mcc_values, key=lambda m: (-mcc_values[m], m))


@dataclass(frozen=True)
class MetricTable:
    corpus_id: str
    mcc: dict[str, float]
    ecc: float
    mfc_literal: dict[str, float]
    mfc_mean: dict[str, float]
    ranking: tuple[str, ...]
    families: dict[str, str] = field(default_factory=dict)
    exact_match: frozenset[str] = frozenset()

    def to_dict(self) -> dict:
        return {
            "corpus_id": self.corpus_id,
            "mcc": dict(sorted(self.mcc.items())),
            "families": dict(sorted(self.families.items())),
            "exact_match": sorted(self.exact_match),
            "ranking": list(self.ranking),
            "ecc": self.ecc,
            "mfc_literal": self.mfc_literal,
            "mfc_mean": self.mfc_mean,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> MetricTable:
        raw = json.loads(text)
        return cls(
            raw["corpus_id"], raw["mcc"], raw["ecc"], raw["mfc_literal"], raw["mfc_mean"],
            tuple(raw["ranking"]), raw.get("families", {}), frozenset(raw.get("exact_match", ())),
        )

    def to_csv(self) -> str:
        """One row per model in rank order, then ECC and per-family rows.

        Footer rows carry ``__ecc__``, ``__mfc_literal__`` or ``__mfc_mean__``
        in the model_id column.
        """
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["model_id", "family", "mcc", "rank"])
        for rank, model in enumerate(self.ranking, 1):
            w.writerow([model, self.families.get(model, ""), format_float(self.mcc[model]), rank])
        w.writerow(["__ecc__", "", format_float(self.ecc), ""])
        for fam, v in self.mfc_literal.items():
            w.writerow(["__mfc_literal__", fam, format_float(v), ""])
        for fam, v in self.mfc_mean.items():
            w.writerow(["__mfc_mean__", fam, format_float(v), ""])
        return buf.getvalue()


def compute_metrics(ensemble: EnsembleArcs) -> MetricTable:
    med = ensemble.median
    scores = {a.model.model_id: mcc(a, med) for a in ensemble.arcs}
    families = {a.model.model_id: a.model.family for a in ensemble.arcs}
    literal, mean = mfc(scores, families)
    exact = frozenset(a.model.model_id for a in ensemble.arcs if is_exact_match(a, med))
    return MetricTable(
        ensemble.corpus_id, scores, ecc(ensemble.arcs, med), literal, mean,
        tuple(rank_models(scores)), families, exact,
    )
