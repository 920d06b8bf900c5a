"""End-to-end run: text -> scores -> arcs -> metrics -> clustering -> files."""

from __future__ import annotations

import datetime as dt
import hashlib
import json
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from .arcs import Arc, EnsembleArcs, build_ensemble, downsample_lttb
from .config import RunConfig
from .errors import ArcsError, ValidationError
from .metrics import MetricTable, compute_metrics
from .prep import RawDocument, Segment, prepare
from .scorers import Scorer, SentimentSeries, external_scores_csv, ingest_external_scores, score_corpus
from .serialize import arcs_bundle_from_json, arcs_bundle_json, arcs_to_csv, segments_to_csv
from .similarity import Dendrogram, DistanceMatrix, distance_matrix, dtw_distance, hcluster
from .svg import dendrogram_svg, ecc_bars_svg, ensemble_arcs_svg, mcc_bars_svg

log = logging.getLogger(__name__)

# files whose bytes legitimately differ between identical runs
NONDETERMINISTIC = ("manifest.json", "run.log")


class CorpusError(ArcsError):
    """A module error, tagged with the corpus it happened on."""

    def __init__(self, corpus_id: str, cause: Exception):
        super().__init__(f"corpus {corpus_id!r}: {type(cause).__name__}: {cause}")
        self.corpus_id = corpus_id
        self.cause = cause

    @property
    def is_validation(self):
        return isinstance(self.cause, ValidationError)


@dataclass
class CorpusResult:
    corpus_id: str
    segments: list[Segment]
    series: list[SentimentSeries]
    ensemble: EnsembleArcs
    downsampled: list[Arc]
    distances: DistanceMatrix
    dendrogram: Dendrogram
    metrics: MetricTable


@dataclass
class ReportBundle:
    corpora: dict[str, CorpusResult]
    manifest: dict = field(default_factory=dict)
    out_dir: Path | None = None


def process_corpus(cfg: RunConfig, corpus) -> CorpusResult:
    cid = corpus.corpus_id
    try:
        doc = RawDocument.from_file(cfg.resolve(corpus.path), cid)
        segments = prepare(doc, cfg.prep_options())
        log.info("corpus %s: %d segments", cid, len(segments))
        series = [score_corpus(segments, Scorer(cfg.runtime_scorer(s)), cid) for s in cfg.scorers]
        for ext in corpus.external:
            series += ingest_external_scores(cfg.resolve(ext), len(segments), cid)
        ensemble = build_ensemble(series, cfg.smoothing)
        for model in ensemble.excluded:
            log.warning("corpus %s: model %s excluded (constant scores)", cid, model)
        metrics = compute_metrics(ensemble)
        down = [downsample_lttb(a, cfg.lttb) for a in ensemble.arcs]
        dm = distance_matrix(
            down, metric=dtw_distance, threads=cfg.threads, cost=cfg.dtw_cost, window=cfg.dtw_window
        )
        dend = hcluster(dm, cfg.linkage)
    except ArcsError as exc:
        raise CorpusError(cid, exc) from exc
    log.info("corpus %s: %d arcs, ECC %.6g", cid, len(ensemble.arcs), metrics.ecc)
    return CorpusResult(cid, segments, series, ensemble, down, dm, dend, metrics)


def _write(path: Path, text: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8", newline="\n")
    return path


def write_corpus(res: CorpusResult, out: Path) -> list[Path]:
    d = out / res.corpus_id
    return [
        _write(d / "segments.csv", segments_to_csv(res.segments)),
        _write(d / "scores.csv", external_scores_csv(res.series)),
        _write(d / "arcs.csv", arcs_to_csv([*res.ensemble.arcs, res.ensemble.median, *res.downsampled])),
        _write(d / "arcs.json", arcs_bundle_json(res.ensemble, res.downsampled)),
        _write(d / "metrics.json", res.metrics.to_json()),
        _write(d / "metrics.csv", res.metrics.to_csv()),
        _write(d / "distances.csv", res.distances.to_csv()),
        _write(d / "dendrogram.json", res.dendrogram.to_json()),
        _write(d / "dendrogram.nwk", res.dendrogram.to_newick()),
    ]


def emit_plots(bundle: ReportBundle, out: Path | None = None) -> list[Path]:
    """Write every chart with its sidecar CSV; returns the paths written.

    Per corpus: ensemble arcs, MCC bars and the dendrogram. Across corpora:
    one ECC bar chart.
    """
    out = Path(out or bundle.out_dir)
    written = []
    for cid, res in bundle.corpora.items():
        d = out / cid
        for name, (svg, sidecar) in (
            ("plot_arcs", ensemble_arcs_svg(res.ensemble)),
            ("plot_mcc", mcc_bars_svg(res.metrics)),
            ("plot_dendrogram", dendrogram_svg(res.dendrogram)),
        ):
            written += [_write(d / f"{name}.svg", svg), _write(d / f"{name}.csv", sidecar)]
    svg, sidecar = ecc_bars_svg([(cid, r.metrics.ecc) for cid, r in bundle.corpora.items()])
    written += [_write(out / "plot_ecc.svg", svg), _write(out / "plot_ecc.csv", sidecar)]
    return written


def _timestamp():
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    now = dt.datetime.fromtimestamp(int(epoch), dt.timezone.utc) if epoch else dt.datetime.now(dt.timezone.utc)
    return now.isoformat(timespec="seconds")


def sha256(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


class _JsonLines(logging.Formatter):
    def format(self, record):
        return json.dumps(
            {
                "time": dt.datetime.fromtimestamp(record.created, dt.timezone.utc).isoformat(),
                "level": record.levelname,
                "logger": record.name,
                "message": record.getMessage(),
            },
            sort_keys=True,
        )


def run(cfg: RunConfig, out_dir=None, plots: bool = True) -> ReportBundle:
    """Execute the whole pipeline for every corpus and write all artifacts.

    Everything except ``manifest.json`` and ``run.log`` is a pure function of
    the config, the input files and the package version.
    """
    out = Path(out_dir) if out_dir is not None else cfg.resolve(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    handler = logging.FileHandler(out / "run.log", mode="w", encoding="utf-8")
    handler.setFormatter(_JsonLines())
    pkg_log = logging.getLogger(__package__)
    pkg_log.addHandler(handler)
    if pkg_log.level == logging.NOTSET or pkg_log.level > logging.INFO:
        pkg_log.setLevel(logging.INFO)
    started = _timestamp()
    try:
        log.info("run started: %d corpora, %d built-in scorers", len(cfg.corpora), len(cfg.scorers))
        if cfg.threads > 1 and len(cfg.corpora) > 1:
            with ThreadPoolExecutor(cfg.threads) as pool:
                results = list(pool.map(lambda c: process_corpus(cfg, c), cfg.corpora))
        else:
            results = [process_corpus(cfg, c) for c in cfg.corpora]
        bundle = ReportBundle({r.corpus_id: r for r in results}, out_dir=out)
        files = [_write(out / "config.json", cfg.to_json())]
        for r in results:
            files += write_corpus(r, out)
        if plots:
            files += emit_plots(bundle, out)
        bundle.manifest = {
            "tool": __package__,
            "version": __version__,
            "config_sha256": cfg.digest(),
            "started": started,
            "finished": _timestamp(),
            "files": {p.relative_to(out).as_posix(): sha256(p) for p in sorted(files)},
        }
        _write(out / "manifest.json", json.dumps(bundle.manifest, indent=2, sort_keys=True) + "\n")
        log.info("run finished: %d files", len(files))
        return bundle
    finally:
        pkg_log.removeHandler(handler)
        handler.close()


def output_digests(out_dir) -> dict[str, str]:
    """SHA-256 of every deterministic output file under ``out_dir``."""
    out = Path(out_dir)
    return {
        p.relative_to(out).as_posix(): sha256(p)
        for p in sorted(out.rglob("*"))
        if p.is_file() and p.name not in NONDETERMINISTIC
    }


def load_bundle(out_dir) -> ReportBundle:
    """Rebuild the plottable parts of a bundle from a run's JSON files."""
    out = Path(out_dir)
    corpora = {}
    for arcs_json in sorted(out.glob("*/arcs.json")):
        d = arcs_json.parent
        ensemble, down = arcs_bundle_from_json(arcs_json.read_text("utf-8"))
        dist_csv = d / "distances.csv"
        corpora[ensemble.corpus_id] = CorpusResult(
            ensemble.corpus_id,
            [],
            [],
            ensemble,
            down,
            DistanceMatrix.from_csv(dist_csv.read_text("utf-8")) if dist_csv.exists() else None,
            Dendrogram.from_json((d / "dendrogram.json").read_text("utf-8")),
            MetricTable.from_json((d / "metrics.json").read_text("utf-8")),
        )
    if not corpora:
        raise ValidationError(f"no corpus results (*/arcs.json) under {out}")
    return ReportBundle(corpora, out_dir=out)
