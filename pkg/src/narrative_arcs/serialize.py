"""Readers and writers for the intermediate files each CLI stage exchanges."""

from __future__ import annotations

import csv
import io
import json
from collections.abc import Sequence

from .arcs import MEDIAN_MODEL, Arc, EnsembleArcs
from .errors import ValidationError
from .prep import Segment
from .scorers import ModelDescriptor, format_float


def segments_to_csv(segments: Sequence[Segment]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["index", "raw", "tokens"])
    for s in segments:
        w.writerow([s.index, s.raw, " ".join(s.tokens)])
    return buf.getvalue()


def segments_from_csv(text: str) -> list[Segment]:
    reader = csv.DictReader(io.StringIO(text))
    segs = [Segment(int(r["index"]), r["raw"], tuple(r["tokens"].split())) for r in reader]
    if [s.index for s in segs] != list(range(len(segs))):
        raise ValidationError("segment indices must run 0..N-1 in order")
    return segs


def arcs_to_csv(arcs: Sequence[Arc]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["model_id", "stage", "x", "y"])
    for a in arcs:
        for x, y in zip(a.x.tolist(), a.y.tolist()):
            w.writerow([a.model.model_id, a.stage, format_float(x), format_float(y)])
    return buf.getvalue()


def _arc_dict(a: Arc) -> dict:
    return {
        "model_id": a.model.model_id,
        "family": a.model.family,
        "stage": a.stage,
        "x": a.x.tolist(),
        "y": a.y.tolist(),
    }


def _arc_from_dict(d: dict, corpus_id: str) -> Arc:
    return Arc(ModelDescriptor(d["model_id"], d["family"]), corpus_id, d["x"], d["y"], d["stage"])


def arcs_bundle_json(ensemble: EnsembleArcs, downsampled: Sequence[Arc] = ()) -> str:
    """Per-corpus JSON: smoothed model arcs, their median, downsampled arcs."""
    payload = {
        "corpus_id": ensemble.corpus_id,
        "excluded": list(ensemble.excluded),
        "smoothed": [_arc_dict(a) for a in ensemble.arcs],
        "median": _arc_dict(ensemble.median),
        "downsampled": [_arc_dict(a) for a in downsampled],
    }
    return json.dumps(payload, sort_keys=True) + "\n"


def arcs_bundle_from_json(text: str) -> tuple[EnsembleArcs, list[Arc]]:
    raw = json.loads(text)
    cid = raw["corpus_id"]
    arcs = tuple(_arc_from_dict(d, cid) for d in raw["smoothed"])
    median = _arc_from_dict(raw["median"], cid)
    if median.model != MEDIAN_MODEL:
        raise ValidationError("median entry must belong to the ensemble_median model")
    down = [_arc_from_dict(d, cid) for d in raw.get("downsampled", [])]
    return EnsembleArcs(cid, arcs, median, tuple(raw.get("excluded", []))), down
