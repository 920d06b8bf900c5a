"""Command line entry point.

Each stage reads and writes the same intermediate files the full run
produces, so any stage can be re-run on its own::

    narrative-arcs prep novel.txt --id novel --out seg.csv
    narrative-arcs score seg.csv --scorer vader --scorer vader_rules --out scores.csv
    narrative-arcs arcs scores.csv --out arcs.json
    narrative-arcs metrics arcs.json --out metrics.json
    narrative-arcs cluster arcs.json --out clusters/
    narrative-arcs run --config run.yaml --out results/
    narrative-arcs report results/

Exit codes: 0 success, 1 validation error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .arcs import build_ensemble, downsample_lttb
from .config import RunConfig, validate_config
from .errors import ArcsError, BadFraction, BadThreshold, ConfigError, ValidationError
from .metrics import compute_metrics
from .pipeline import CorpusError, emit_plots, load_bundle, run
from .prep import PrepOptions, RawDocument, prepare
from .scorers import (
    BUILTIN_SCORERS,
    DEFAULT_SCORERS,
    Scorer,
    external_scores_csv,
    ingest_external_scores,
    score_corpus,
)
from .serialize import arcs_bundle_from_json, arcs_bundle_json, segments_from_csv, segments_to_csv
from .similarity import LINKAGES, distance_matrix, dtw_distance, hcluster

log = logging.getLogger(__name__)


def _fraction(s):
    try:
        v = float(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {s!r}") from None
    return v


def _common(p, *names):
    if "config" in names:
        p.add_argument("--config", type=Path, help="YAML run config")
    if "out" in names:
        p.add_argument("--out", type=Path, help="output file or directory")
    if "threads" in names:
        p.add_argument("--threads", type=int, help="worker threads")
    if "linkage" in names:
        p.add_argument("--linkage", choices=LINKAGES)
    if "lttb" in names:
        p.add_argument("--lttb", type=int, help="points kept per arc before DTW (default 25)")
    if "smooth" in names:
        p.add_argument("--smooth", type=_fraction, help="smoothing window fraction (default 0.10)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="narrative-arcs", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging on stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("prep", help="normalize and segment a text into segments.csv")
    p.add_argument("text", type=Path)
    p.add_argument("--id", dest="corpus_id", help="corpus id (default: file stem)")
    _common(p, "config", "out")

    p = sub.add_parser("score", help="score segments.csv with built-in scorers")
    p.add_argument("segments", type=Path)
    p.add_argument("--scorer", action="append", default=[], help="built-in scorer id (repeatable)")
    p.add_argument("--external", action="append", default=[], type=Path, help="external score CSV to append")
    p.add_argument("--id", dest="corpus_id", default="corpus")
    _common(p, "config", "out")

    p = sub.add_parser("arcs", help="standardize, smooth, take the median and downsample")
    p.add_argument("scores", type=Path)
    p.add_argument("--id", dest="corpus_id", default="corpus")
    _common(p, "config", "out", "lttb", "smooth")

    p = sub.add_parser("metrics", help="MCC / ECC / MFC from arcs.json")
    p.add_argument("arcs", type=Path)
    _common(p, "out")

    p = sub.add_parser("cluster", help="DTW distance matrix and dendrogram from arcs.json")
    p.add_argument("arcs", type=Path)
    _common(p, "config", "out", "threads", "linkage")

    p = sub.add_parser("report", help="emit SVG charts for a finished run directory")
    p.add_argument("run_dir", type=Path)
    _common(p, "out")

    p = sub.add_parser("run", help="full pipeline from a config")
    _common(p, "config", "out", "threads", "linkage", "lttb", "smooth")

    return parser


def _write(path: Path | None, text: str):
    if path is None:
        sys.stdout.write(text)
        return
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8", newline="\n")
    log.info("wrote %s", path)


def _overrides(args) -> dict:
    return {
        "threads": getattr(args, "threads", None),
        "linkage": getattr(args, "linkage", None),
        "lttb": getattr(args, "lttb", None),
        "smoothing": getattr(args, "smooth", None),
    }


def _config(args) -> RunConfig | None:
    if getattr(args, "config", None) is None:
        return None
    return validate_config(args.config)


def _check_params(smoothing, lttb):
    if not (0 < smoothing <= 1):
        raise BadFraction(f"smoothing must be in (0, 1], got {smoothing}")
    if lttb < 3:
        raise BadThreshold(f"lttb threshold must be >= 3, got {lttb}")


def cmd_prep(args):
    cfg = _config(args)
    opts = cfg.prep_options() if cfg else PrepOptions(lowercase=False)
    doc = RawDocument.from_file(args.text, args.corpus_id)
    segs = prepare(doc, opts)
    log.info("%s: %d segments", doc.corpus_id, len(segs))
    _write(args.out, segments_to_csv(segs))


def cmd_score(args):
    cfg = _config(args)
    segs = segments_from_csv(args.segments.read_text("utf-8"))
    if args.scorer:
        unknown = [s for s in args.scorer if s not in BUILTIN_SCORERS]
        if unknown:
            raise ConfigError(f"unknown scorer(s): {unknown}")
        specs = [BUILTIN_SCORERS[s] for s in args.scorer]
    elif cfg:
        specs = [cfg.runtime_scorer(s) for s in cfg.scorers]
    elif not args.external:
        specs = [BUILTIN_SCORERS[s] for s in DEFAULT_SCORERS]
    else:
        specs = []
    series = [score_corpus(segs, Scorer(s), args.corpus_id) for s in specs]
    for ext in args.external:
        series += ingest_external_scores(ext, len(segs), args.corpus_id)
    _write(args.out, external_scores_csv(series))


def cmd_arcs(args):
    cfg = _config(args) or RunConfig((), ())
    smoothing = args.smooth if args.smooth is not None else cfg.smoothing
    lttb = args.lttb if args.lttb is not None else cfg.lttb
    _check_params(smoothing, lttb)
    series = ingest_external_scores(args.scores, corpus_id=args.corpus_id)
    ens = build_ensemble(series, smoothing)
    down = [downsample_lttb(a, lttb) for a in ens.arcs]
    _write(args.out, arcs_bundle_json(ens, down))


def cmd_metrics(args):
    ens, _ = arcs_bundle_from_json(args.arcs.read_text("utf-8"))
    table = compute_metrics(ens)
    _write(args.out, table.to_json())
    if args.out is not None:
        _write(args.out.with_suffix(".csv"), table.to_csv())


def cmd_cluster(args):
    cfg = _config(args) or RunConfig((), ())
    ens, down = arcs_bundle_from_json(args.arcs.read_text("utf-8"))
    arcs = down or list(ens.arcs)
    dm = distance_matrix(
        arcs,
        metric=dtw_distance,
        threads=args.threads or cfg.threads,
        cost=cfg.dtw_cost,
        window=cfg.dtw_window,
    )
    dend = hcluster(dm, args.linkage or cfg.linkage)
    if args.out is None:
        sys.stdout.write(dend.to_json())
        return
    _write(args.out / "distances.csv", dm.to_csv())
    _write(args.out / "dendrogram.json", dend.to_json())
    _write(args.out / "dendrogram.nwk", dend.to_newick())


def cmd_report(args):
    bundle = load_bundle(args.run_dir)
    for p in emit_plots(bundle, args.out or args.run_dir):
        log.info("wrote %s", p)


def cmd_run(args):
    if args.config is None:
        raise ConfigError("run needs --config")
    cfg = validate_config(args.config).with_overrides(**_overrides(args))
    bundle = run(cfg, args.out)
    log.info("results in %s", bundle.out_dir)


COMMANDS = {
    "prep": cmd_prep,
    "score": cmd_score,
    "arcs": cmd_arcs,
    "metrics": cmd_metrics,
    "cluster": cmd_cluster,
    "report": cmd_report,
    "run": cmd_run,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    pkg_log = logging.getLogger(__package__)
    if not any(isinstance(h, logging.StreamHandler) and getattr(h, "_cli", False) for h in pkg_log.handlers):
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(logging.Formatter("%(levelname)s %(message)s"))
        handler._cli = True
        pkg_log.addHandler(handler)
    pkg_log.setLevel(logging.DEBUG if args.verbose else logging.INFO)
    try:
        COMMANDS[args.command](args)
    except CorpusError as exc:
        log.error("%s", exc)
        return 1 if exc.is_validation else 2
    except ValidationError as exc:
        log.error("%s: %s", type(exc).__name__, exc)
        return 1
    except ArcsError as exc:
        log.error("%s: %s", type(exc).__name__, exc)
        return 2
    except OSError as exc:
        log.error("%s", exc)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
