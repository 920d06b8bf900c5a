"""Plain SVG charts with CSV sidecars of the values drawn.

Charts are built as strings with fixed-precision coordinates so that the
same inputs always give the same bytes.
"""

from __future__ import annotations

import csv
import io
from collections.abc import Sequence
from xml.sax.saxutils import escape

from .arcs import EnsembleArcs
from .metrics import MetricTable
from .scorers import format_float
from .similarity import Dendrogram

PALETTE = (
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
)


def _f(v):
    return f"{v:.2f}"


class Canvas:
    def __init__(self, width, height):
        self.width, self.height = width, height
        self.parts = []

    def line(self, x1, y1, x2, y2, stroke="#000", width=1.0):
        self.parts.append(
            f'<line x1="{_f(x1)}" y1="{_f(y1)}" x2="{_f(x2)}" y2="{_f(y2)}" '
            f'stroke="{stroke}" stroke-width="{_f(width)}"/>'
        )

    def polyline(self, pts, stroke, width=1.0, title=None):
        coords = " ".join(f"{_f(x)},{_f(y)}" for x, y in pts)
        tip = f"<title>{escape(title)}</title>" if title else ""
        self.parts.append(
            f'<polyline fill="none" stroke="{stroke}" stroke-width="{_f(width)}" points="{coords}">{tip}</polyline>'
        )

    def rect(self, x, y, w, h, fill):
        self.parts.append(f'<rect x="{_f(x)}" y="{_f(y)}" width="{_f(w)}" height="{_f(h)}" fill="{fill}"/>')

    def text(self, x, y, s, size=11, anchor="start"):
        self.parts.append(
            f'<text x="{_f(x)}" y="{_f(y)}" font-family="sans-serif" font-size="{size}" '
            f'text-anchor="{anchor}">{escape(s)}</text>'
        )

    def render(self):
        head = (
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.width}" height="{self.height}" '
            f'viewBox="0 0 {self.width} {self.height}">'
        )
        bg = f'<rect x="0" y="0" width="{self.width}" height="{self.height}" fill="#ffffff"/>'
        return "\n".join([head, bg, *self.parts, "</svg>"]) + "\n"


def _csv(rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerows(rows)
    return buf.getvalue()


def ensemble_arcs_svg(ens: EnsembleArcs, width=900, height=500) -> tuple[str, str]:
    """Every smoothed model arc plus the median drawn bold."""
    left, right, top, bottom = 60, 170, 40, 40
    arcs = list(ens.arcs) + [ens.median]
    ys = [v for a in arcs for v in a.y.tolist()]
    xs = [v for a in arcs for v in a.x.tolist()]
    ymin, ymax = min(ys), max(ys)
    xmin, xmax = min(xs), max(xs)
    yspan = (ymax - ymin) or 1.0
    xspan = (xmax - xmin) or 1.0
    pw, ph = width - left - right, height - top - bottom

    def px(x):
        return left + (x - xmin) / xspan * pw

    def py(y):
        return top + (ymax - y) / yspan * ph

    c = Canvas(width, height)
    c.text(width / 2, 24, f"Sentiment arcs: {ens.corpus_id}", size=14, anchor="middle")
    c.line(left, top + ph, left + pw, top + ph)
    c.line(left, top, left, top + ph)
    if ymin <= 0 <= ymax:
        c.line(left, py(0), left + pw, py(0), stroke="#bbbbbb", width=0.5)
    c.text(left - 6, py(ymax) + 4, f"{ymax:.2f}", size=10, anchor="end")
    c.text(left - 6, py(ymin) + 4, f"{ymin:.2f}", size=10, anchor="end")
    c.text(left + pw / 2, height - 10, "segment", size=11, anchor="middle")
    rows = [["model_id", "x", "y"]]
    for i, a in enumerate(arcs):
        is_median = a is ens.median
        color = "#000000" if is_median else PALETTE[i % len(PALETTE)]
        c.polyline(
            [(px(x), py(y)) for x, y in zip(a.x.tolist(), a.y.tolist())],
            color, 2.5 if is_median else 1.0, a.model.model_id,
        )
        ly = top + 14 * i
        c.line(left + pw + 10, ly, left + pw + 30, ly, stroke=color, width=2.5 if is_median else 1.5)
        c.text(left + pw + 36, ly + 4, a.model.model_id, size=10)
        rows += [[a.model.model_id, format_float(x), format_float(y)] for x, y in zip(a.x.tolist(), a.y.tolist())]
    return c.render(), _csv(rows)


def mcc_bars_svg(table: MetricTable, width=700) -> tuple[str, str]:
    """Horizontal MCC bars, best model at the bottom."""
    order = list(reversed(table.ranking))
    bar, gap, left, top = 18, 6, 170, 40
    height = top + len(order) * (bar + gap) + 40
    pw = width - left - 90
    vmax = max(table.mcc.values())
    c = Canvas(width, height)
    c.text(width / 2, 24, f"Model-corpus compatibility: {table.corpus_id}", size=14, anchor="middle")
    rows = [["position", "model_id", "mcc", "rank"]]
    for pos, model in enumerate(order):
        v = table.mcc[model]
        y = top + pos * (bar + gap)
        c.rect(left, y, v / vmax * pw, bar, PALETTE[pos % len(PALETTE)])
        c.text(left - 6, y + bar - 5, model, size=11, anchor="end")
        label = "exact-match" if model in table.exact_match else f"{v:.4g}"
        c.text(left + v / vmax * pw + 4, y + bar - 5, label, size=10)
        rows.append([pos, model, format_float(v), table.ranking.index(model) + 1])
    return c.render(), _csv(rows)


def ecc_bars_svg(values: Sequence[tuple[str, float]], width=None, height=420) -> tuple[str, str]:
    """Vertical ECC bars, one per corpus, in ascending ECC order."""
    order = sorted(values, key=lambda kv: (kv[1], kv[0]))
    bar, gap, left, top, bottom = 36, 14, 60, 40, 90
    width = width or max(360, left + len(order) * (bar + gap) + 40)
    ph = height - top - bottom
    vmax = max(v for _, v in order)
    c = Canvas(width, height)
    c.text(width / 2, 24, "Ensemble-corpus compatibility", size=14, anchor="middle")
    c.line(left, top + ph, width - 20, top + ph)
    rows = [["position", "corpus_id", "ecc"]]
    for pos, (cid, v) in enumerate(order):
        x = left + pos * (bar + gap)
        h = v / vmax * ph
        c.rect(x, top + ph - h, bar, h, PALETTE[pos % len(PALETTE)])
        c.text(x + bar / 2, top + ph - h - 4, f"{v:.4g}", size=10, anchor="middle")
        c.text(x + bar / 2, top + ph + 16, cid, size=10, anchor="middle")
        rows.append([pos, cid, format_float(v)])
    return c.render(), _csv(rows)


def dendrogram_svg(dend: Dendrogram, width=700) -> tuple[str, str]:
    """Left-to-right dendrogram; horizontal position encodes merge height."""
    leaves = dend.leaf_order()
    step, left, top, right = 22, 20, 40, 170
    height = top + len(leaves) * step + 40
    hmax = max((m.height for m in dend.merges), default=0.0) or 1.0
    pw = width - left - right
    c = Canvas(width, height)
    c.text(width / 2, 24, f"DTW dendrogram ({dend.linkage} linkage)", size=14, anchor="middle")

    def hx(h):
        return left + pw - h / hmax * pw

    rows = [["kind", "label", "height", "position"]]
    pos = {}
    for i, leaf in enumerate(leaves):
        pos[(leaf,)] = (hx(0.0), top + i * step)
        c.text(hx(0.0) + 6, top + i * step + 4, leaf, size=11)
        rows.append(["leaf", leaf, format_float(0.0), i])
    for mg in dend.merges:
        (xa, ya), (xb, yb) = pos[tuple(sorted(mg.left))], pos[tuple(sorted(mg.right))]
        xm = hx(mg.height)
        c.line(xa, ya, xm, ya)
        c.line(xb, yb, xm, yb)
        c.line(xm, ya, xm, yb)
        pos[mg.members] = (xm, (ya + yb) / 2)
        rows.append(["merge", "+".join(mg.members), format_float(mg.height), ""])
    c.line(left, height - 24, left + pw, height - 24)
    c.text(left, height - 8, f"{hmax:.3g}", size=10)
    c.text(left + pw, height - 8, "0", size=10, anchor="end")
    return c.render(), _csv(rows)
