"""DTW distances between arcs and agglomerative clustering of the result."""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
import re
from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyArc, TooFewArcs, ValidationError
from .scorers import format_float

LINKAGES = ("single", "complete", "average")
COSTS = ("squared", "absolute")


def _values(a) -> np.ndarray:
    return np.asarray(getattr(a, "y", a), dtype=float)


def dtw_distance(a, b, cost: str = "squared", window: int | None = None) -> float:
    """Dynamic time warping distance between the y-values of two arcs.

    With the default ``squared`` cost the cumulative sum of squared
    differences is accumulated and its square root returned; ``absolute``
    accumulates ``|a_i - b_j|``. ``window`` is an optional Sakoe-Chiba band
    half-width (widened to ``|n - m|`` so a path always exists).
    """
    x, y = _values(a), _values(b)
    n, m = len(x), len(y)
    if n == 0 or m == 0:
        raise EmptyArc("DTW needs two non-empty arcs")
    if cost not in COSTS:
        raise ValidationError(f"unknown DTW cost {cost!r}")
    band = max(window, abs(n - m)) if window is not None else max(n, m)
    xs, ys = x.tolist(), y.tolist()
    inf = math.inf
    prev = [inf] * (m + 1)
    prev[0] = 0.0
    for i in range(1, n + 1):
        cur = [inf] * (m + 1)
        xi = xs[i - 1]
        lo, hi = max(1, i - band), min(m, i + band)
        for j in range(lo, hi + 1):
            d = xi - ys[j - 1]
            c = d * d if cost == "squared" else abs(d)
            best = prev[j - 1]
            if prev[j] < best:
                best = prev[j]
            if cur[j - 1] < best:
                best = cur[j - 1]
            cur[j] = c + best
        prev = cur
    total = prev[m]
    return math.sqrt(total) if cost == "squared" else total


@dataclass(frozen=True)
class DistanceMatrix:
    labels: tuple[str, ...]
    d: np.ndarray = field(repr=False)

    def __post_init__(self):
        d = np.asarray(self.d, dtype=float)
        n = len(self.labels)
        if d.shape != (n, n):
            raise ValidationError(f"matrix shape {d.shape} does not match {n} labels")
        if len(set(self.labels)) != n:
            raise ValidationError("distance matrix labels must be unique")
        if not (np.all(np.isfinite(d)) and np.all(d >= 0)):
            raise ValidationError("distances must be finite and non-negative")
        if not (np.array_equal(d, d.T) and np.all(np.diag(d) == 0)):
            raise ValidationError("distance matrix must be symmetric with zero diagonal")
        d.setflags(write=False)
        object.__setattr__(self, "d", d)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["", *self.labels])
        for lab, row in zip(self.labels, self.d):
            w.writerow([lab, *(format_float(v) for v in row)])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> DistanceMatrix:
        rows = list(csv.reader(io.StringIO(text)))
        labels = tuple(rows[0][1:])
        d = np.array([[float(v) for v in r[1:]] for r in rows[1:]])
        if tuple(r[0] for r in rows[1:]) != labels:
            raise ValidationError("row labels do not match column labels")
        return cls(labels, d)


def distance_matrix(
    arcs: Sequence,
    labels: Sequence[str] | None = None,
    metric: Callable[..., float] = dtw_distance,
    threads: int = 1,
    **metric_kw,
) -> DistanceMatrix:
    """Pairwise distances, one metric call per unordered pair."""
    if len(arcs) < 2:
        raise TooFewArcs(f"need at least 2 arcs, got {len(arcs)}")
    if labels is None:
        labels = [a.model.model_id for a in arcs]
    n = len(arcs)
    pairs = list(itertools.combinations(range(n), 2))

    def one(p):
        return metric(arcs[p[0]], arcs[p[1]], **metric_kw)

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            values = list(pool.map(one, pairs))
    else:
        values = [one(p) for p in pairs]
    d = np.zeros((n, n))
    for (i, j), v in zip(pairs, values):
        d[i, j] = d[j, i] = v
    return DistanceMatrix(tuple(labels), d)


# ---------------------------------------------------------------- clustering

@dataclass(frozen=True)
class Merge:
    left: tuple[str, ...]
    right: tuple[str, ...]
    height: float

    @property
    def members(self):
        return tuple(sorted(self.left + self.right))


@dataclass(frozen=True)
class Dendrogram:
    leaves: tuple[str, ...]
    merges: tuple[Merge, ...]
    linkage: str = "single"

    def __post_init__(self):
        if len(self.merges) != max(0, len(self.leaves) - 1):
            raise ValidationError("a dendrogram over n leaves has n - 1 merges")

    def tree(self) -> dict:
        """Nested merge tree; leaves are ``{"name": id}``."""
        nodes = {(leaf,): {"name": leaf} for leaf in self.leaves}
        root = None
        for mg in self.merges:
            root = {
                "height": mg.height,
                "children": [nodes.pop(tuple(sorted(mg.left))), nodes.pop(tuple(sorted(mg.right)))],
            }
            nodes[mg.members] = root
        return root if root is not None else {"name": self.leaves[0]}

    def leaf_order(self) -> list[str]:
        def walk(node):
            if "name" in node:
                return [node["name"]]
            return [leaf for child in node["children"] for leaf in walk(child)]

        return walk(self.tree())

    def to_json(self) -> str:
        payload = {
            "linkage": self.linkage,
            "leaves": list(self.leaves),
            "merges": [
                {"left": list(m.left), "right": list(m.right), "height": m.height}
                for m in self.merges
            ],
            "tree": self.tree(),
        }
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> Dendrogram:
        raw = json.loads(text)
        merges = tuple(
            Merge(tuple(m["left"]), tuple(m["right"]), float(m["height"])) for m in raw["merges"]
        )
        return cls(tuple(raw["leaves"]), merges, raw.get("linkage", "single"))

    def to_newick(self) -> str:
        def name(label):
            if re.fullmatch(r"[A-Za-z0-9_.-]+", label):
                return label
            return "'" + label.replace("'", "''") + "'"

        def walk(node, parent_height):
            if "name" in node:
                return f"{name(node['name'])}:{format_float(parent_height)}"
            inner = ",".join(walk(c, node["height"]) for c in node["children"])
            return f"({inner}):{format_float(parent_height - node['height'])}"

        root = self.tree()
        if "name" in root:
            return name(root["name"]) + ";\n"
        inner = ",".join(walk(c, root["height"]) for c in root["children"])
        return f"({inner});\n"


def _linkage_distance(d, a, b, linkage):
    block = d[np.ix_(a, b)]
    if linkage == "single":
        return float(block.min())
    if linkage == "complete":
        return float(block.max())
    return math.fsum(block.ravel().tolist()) / block.size


def hcluster(m: DistanceMatrix, linkage: str = "single") -> Dendrogram:
    """Agglomerative clustering with single, complete or average linkage.

    Ties at the minimum distance go to the lexicographically smallest pair of
    cluster labels, a cluster's label being its sorted member tuple, so the
    result does not depend on the order of the input labels.
    """
    if linkage not in LINKAGES:
        raise ValidationError(f"unknown linkage {linkage!r}")
    labels = list(m.labels)
    clusters = {(lab,): [i] for i, lab in enumerate(labels)}
    merges = []
    last = 0.0
    while len(clusters) > 1:
        keys = sorted(clusters)
        best = None
        for ka, kb in itertools.combinations(keys, 2):
            dist = _linkage_distance(m.d, clusters[ka], clusters[kb], linkage)
            cand = (dist, ka, kb)
            if best is None or cand < best:
                best = cand
        dist, ka, kb = best
        if dist < last and last - dist <= 1e-12 * last:
            dist = last  # float rounding in average linkage
        last = dist
        merges.append(Merge(ka, kb, dist))
        clusters[tuple(sorted(ka + kb))] = clusters.pop(ka) + clusters.pop(kb)
    return Dendrogram(tuple(labels), tuple(merges), linkage)
