"""Run configuration: a YAML file naming corpora, scorers and parameters.

Example::

    smoothing: 0.10          # moving-average window as a fraction of length
    lttb: 25                 # points kept per arc for clustering
    linkage: single
    scorers:
      - vader
      - vader_rules
      - {id: mylex, kind: lexical, lexicon: lexicons/mylex.tsv}
    corpora:
      - path: texts/novel.txt
        id: novel
        external: [scores/novel_transformers.csv]

Relative paths resolve against the config file's directory.
"""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass, field, replace
from pathlib import Path

import yaml

from .errors import BadFraction, BadThreshold, ConfigError, UnknownScorer
from .prep import (
    CORPUS_ID_RE,
    DEFAULT_HEADER_PATTERNS,
    PrepOptions,
    load_abbreviations,
    load_contractions,
)
from .scorers import BUILTIN_SCORERS, BUNDLED_LEXICONS, EXTERNAL_HEADER, KINDS, ScorerSpec
from .similarity import COSTS, LINKAGES


@dataclass(frozen=True)
class CorpusSpec:
    path: str
    corpus_id: str
    external: tuple[str, ...] = ()


@dataclass(frozen=True)
class RunConfig:
    corpora: tuple[CorpusSpec, ...]
    scorers: tuple[ScorerSpec, ...]
    smoothing: float = 0.10
    lttb: int = 25
    linkage: str = "single"
    threads: int = 1
    dtw_cost: str = "squared"
    dtw_window: int | None = None
    expand_contractions: bool = True
    remove_numbers: bool = True
    abbreviations: str | None = None
    contractions: str | None = None
    header_patterns: tuple[str, ...] = DEFAULT_HEADER_PATTERNS
    output_dir: str = "out"
    base_dir: str = field(default=".", compare=False)

    def resolve(self, p: str) -> Path:
        path = Path(p)
        return path if path.is_absolute() else Path(self.base_dir) / path

    def runtime_scorer(self, spec: ScorerSpec) -> ScorerSpec:
        """``spec`` with its file references resolved against the config directory."""
        lexicon = spec.lexicon if spec.lexicon in BUNDLED_LEXICONS else str(self.resolve(spec.lexicon))
        rules = str(self.resolve(spec.rules)) if spec.rules else None
        return replace(spec, lexicon=lexicon, rules=rules)

    def prep_options(self) -> PrepOptions:
        kw = {}
        if self.abbreviations:
            kw["abbreviation_guard"] = load_abbreviations(self.resolve(self.abbreviations))
        if self.contractions:
            kw["contractions"] = load_contractions(self.resolve(self.contractions))
        return PrepOptions(
            expand_contractions=self.expand_contractions,
            remove_numbers=self.remove_numbers,
            header_patterns=tuple(self.header_patterns),
            lowercase=False,
            **kw,
        )

    def to_dict(self) -> dict:
        """Content of the run, without where it is written to."""
        return {
            "corpora": [
                {"path": c.path, "id": c.corpus_id, "external": list(c.external)} for c in self.corpora
            ],
            "scorers": [
                {"id": s.model_id, "kind": s.kind, "lexicon": s.lexicon, "rules": s.rules, "stem": s.stem}
                for s in self.scorers
            ],
            "smoothing": self.smoothing,
            "lttb": self.lttb,
            "linkage": self.linkage,
            "dtw": {"cost": self.dtw_cost, "window": self.dtw_window},
            "prep": {
                "expand_contractions": self.expand_contractions,
                "remove_numbers": self.remove_numbers,
                "abbreviations": self.abbreviations,
                "contractions": self.contractions,
                "header_patterns": list(self.header_patterns),
            },
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def digest(self) -> str:
        return hashlib.sha256(self.to_json().encode("utf-8")).hexdigest()

    def with_overrides(self, **kw) -> RunConfig:
        kw = {k: v for k, v in kw.items() if v is not None}
        cfg = replace(self, **kw)
        check(cfg)
        return cfg


def _under(base: Path, p) -> Path:
    p = Path(p)
    return p if p.is_absolute() else base / p


def _scorer(entry, base: Path) -> ScorerSpec:
    if isinstance(entry, str):
        entry = {"id": entry}
    if not isinstance(entry, dict) or "id" not in entry:
        raise ConfigError(f"scorer entries need an id: {entry!r}")
    sid = str(entry["id"])
    known = BUILTIN_SCORERS.get(sid)
    if known is None and "lexicon" not in entry:
        raise UnknownScorer(f"unknown scorer {sid!r} (give kind and lexicon for a custom one)")
    kind = entry.get("kind", known.kind if known else "lexical")
    if kind not in KINDS:
        raise UnknownScorer(f"unknown scorer kind {kind!r}")
    lexicon = str(entry.get("lexicon", known.lexicon if known else ""))
    # bundled lexicons that still need downloading are reported at run time
    if lexicon not in BUNDLED_LEXICONS and not _under(base, lexicon).is_file():
        raise ConfigError(f"lexicon file not found for scorer {sid!r}: {lexicon}")
    rules = entry.get("rules")
    if rules is not None and not _under(base, rules).is_file():
        raise ConfigError(f"rules file not found for scorer {sid!r}: {rules}")
    unknown = set(entry) - {"id", "kind", "lexicon", "rules", "stem"}
    if unknown:
        raise ConfigError(f"unknown keys for scorer {sid!r}: {sorted(unknown)}")
    return ScorerSpec(sid, kind, lexicon, rules, bool(entry.get("stem", False)))


def _external_models(path: Path) -> list[str]:
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != EXTERNAL_HEADER:
            raise ConfigError(f"{path}: header must be {','.join(EXTERNAL_HEADER)}")
        seen = {}
        for row in reader:
            if row:
                seen.setdefault(row[0].strip(), None)
    return list(seen)


def check(cfg: RunConfig) -> None:
    """Raise if ``cfg`` violates any run invariant."""
    if not (0 < cfg.smoothing <= 1):
        raise BadFraction(f"smoothing must be in (0, 1], got {cfg.smoothing}")
    if cfg.lttb < 3:
        raise BadThreshold(f"lttb threshold must be >= 3, got {cfg.lttb}")
    if cfg.linkage not in LINKAGES:
        raise ConfigError(f"linkage must be one of {LINKAGES}, got {cfg.linkage!r}")
    if cfg.dtw_cost not in COSTS:
        raise ConfigError(f"dtw cost must be one of {COSTS}")
    if cfg.dtw_window is not None and cfg.dtw_window < 0:
        raise ConfigError("dtw window must be >= 0")
    if cfg.threads < 1:
        raise ConfigError("threads must be >= 1")
    if not cfg.corpora:
        raise ConfigError("config names no corpora")
    ids = [c.corpus_id for c in cfg.corpora]
    if len(set(ids)) != len(ids):
        raise ConfigError("corpus ids must be unique")
    scorer_ids = [s.model_id for s in cfg.scorers]
    if len(set(scorer_ids)) != len(scorer_ids):
        raise ConfigError("scorer ids must be unique")
    for c in cfg.corpora:
        if not CORPUS_ID_RE.match(c.corpus_id):
            raise ConfigError(f"corpus id must match [a-z0-9_-]+: {c.corpus_id!r}")
        if not cfg.resolve(c.path).is_file():
            raise ConfigError(f"corpus file not found: {c.path}")
        models = list(scorer_ids)
        for ext in c.external:
            p = cfg.resolve(ext)
            if not p.is_file():
                raise ConfigError(f"external score file not found: {ext}")
            models += _external_models(p)
        if len(set(models)) != len(models):
            raise ConfigError(f"model ids repeat for corpus {c.corpus_id!r}")
        if len(models) < 2:
            raise ConfigError(f"corpus {c.corpus_id!r} has {len(models)} model(s); at least 2 are required")


def load_config(data: dict, base_dir=".") -> RunConfig:
    if not isinstance(data, dict):
        raise ConfigError("config must be a mapping")
    base = Path(base_dir)
    allowed = {
        "corpora", "scorers", "smoothing", "lttb", "linkage", "threads", "dtw", "prep", "output",
    }
    unknown = set(data) - allowed
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    corpora = []
    for c in data.get("corpora") or []:
        if isinstance(c, str):
            c = {"path": c}
        if "path" not in c:
            raise ConfigError(f"corpus entry needs a path: {c!r}")
        cid = c.get("id") or Path(c["path"]).stem.lower().replace(" ", "_")
        ext = c.get("external") or []
        if isinstance(ext, str):
            ext = [ext]
        corpora.append(CorpusSpec(str(c["path"]), str(cid), tuple(str(e) for e in ext)))
    scorers = tuple(_scorer(s, base) for s in data.get("scorers") or [])
    dtw = data.get("dtw") or {}
    prep = data.get("prep") or {}
    try:
        smoothing = float(data.get("smoothing", 0.10))
    except (TypeError, ValueError):
        raise BadFraction(f"smoothing must be a number, got {data.get('smoothing')!r}") from None
    lttb = data.get("lttb", 25)
    if not isinstance(lttb, int) or isinstance(lttb, bool):
        raise BadThreshold(f"lttb must be an integer, got {lttb!r}")
    cfg = RunConfig(
        corpora=tuple(corpora),
        scorers=scorers,
        smoothing=smoothing,
        lttb=lttb,
        linkage=str(data.get("linkage", "single")),
        threads=int(data.get("threads", 1)),
        dtw_cost=str(dtw.get("cost", "squared")),
        dtw_window=dtw.get("window"),
        expand_contractions=bool(prep.get("expand_contractions", True)),
        remove_numbers=bool(prep.get("remove_numbers", True)),
        abbreviations=prep.get("abbreviations"),
        contractions=prep.get("contractions"),
        header_patterns=tuple(prep.get("header_patterns", DEFAULT_HEADER_PATTERNS)),
        output_dir=str(data.get("output", "out")),
        base_dir=str(base),
    )
    check(cfg)
    return cfg


def validate_config(path) -> RunConfig:
    """Parse, default and validate a YAML run config."""
    path = Path(path)
    try:
        data = yaml.safe_load(path.read_text("utf-8"))
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return load_config(data or {}, path.parent)
