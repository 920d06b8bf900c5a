"""Per-segment sentiment scorers and external score ingestion.

Built-in scorers are lexicon lookups, optionally wrapped in valence-shifter
rules (negation, degree modifiers, exclamation, all-caps, adversative
conjunctions). Scores from models that are not run in-process come in
through a long-format CSV.
"""

from __future__ import annotations

import csv
import io
import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .errors import (
    DuplicateIndex,
    DuplicateToken,
    EmptyCorpus,
    EmptyLexicon,
    ExternalScoresError,
    LengthMismatch,
    LexiconError,
    MissingData,
    MissingIndex,
    NonFiniteScore,
    NonFiniteValence,
    RuleSetError,
    UnknownScorer,
)
from .prep import PrepOptions, Segment, data_path, words

FAMILIES = ("lexical", "heuristic", "ml", "dnn", "transformer", "external")
EXTERNAL_HEADER = ("model_id", "family", "segment_index", "score")


@dataclass(frozen=True)
class ModelDescriptor:
    model_id: str
    family: str

    def __post_init__(self):
        # "ensemble" is reserved for the synthetic median arc
        if self.family not in FAMILIES and self.family != "ensemble":
            raise ExternalScoresError(f"unknown model family {self.family!r}")
        if not self.model_id or self.model_id.startswith("__"):
            raise ExternalScoresError(f"bad model id {self.model_id!r}")


@dataclass(frozen=True)
class Lexicon:
    name: str
    entries: dict[str, float] = field(repr=False)

    def __post_init__(self):
        if not self.entries:
            raise EmptyLexicon(f"lexicon {self.name!r} has no entries")
        for tok, val in self.entries.items():
            if not math.isfinite(val):
                raise NonFiniteValence(tok)

    def __len__(self):
        return len(self.entries)

    def __contains__(self, token):
        return token in self.entries

    def get(self, token, default=None):
        return self.entries.get(token, default)


def load_lexicon(path, name=None) -> Lexicon:
    """Parse a ``token<TAB>valence`` file; ``#`` lines are comments."""
    path = Path(path)
    entries = {}
    for lineno, line in enumerate(path.read_text("utf-8").splitlines(), 1):
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) < 2:
            raise LexiconError(f"{path}:{lineno}: expected token<TAB>valence")
        token = parts[0].strip()
        try:
            val = float(parts[1])
        except ValueError:
            raise NonFiniteValence(lineno) from None
        if not math.isfinite(val):
            raise NonFiniteValence(lineno)
        if token in entries:
            raise DuplicateToken(token)
        entries[token] = val
    if not entries:
        raise EmptyLexicon(str(path))
    return Lexicon(name or path.stem, entries)


def _load_amplifiers(path):
    table = {}
    for line in Path(path).read_text("utf-8").splitlines():
        if not line.strip() or line.startswith("#"):
            continue
        tok, _, boost = line.partition("\t")
        table[tok.strip()] = float(boost)
    return table


@dataclass(frozen=True)
class RuleSet:
    negators: frozenset[str]
    amplifiers: dict[str, float] = field(compare=False)
    adversatives: frozenset[str]
    negation_scope: int = 3
    negation_factor: float = -0.5
    adversative_before_factor: float = 0.5
    adversative_after_factor: float = 1.5
    exclaim_boost: float = 0.1
    exclaim_cap: int = 3
    allcaps_boost: float = 0.2

    def __post_init__(self):
        if self.negation_scope < 1:
            raise RuleSetError("negation_scope must be >= 1")
        if self.exclaim_cap < 0:
            raise RuleSetError("exclaim_cap must be >= 0")
        factors = [
            self.negation_factor, self.adversative_before_factor, self.adversative_after_factor,
            self.exclaim_boost, self.allcaps_boost, *self.amplifiers.values(),
        ]
        if not all(math.isfinite(f) for f in factors):
            raise RuleSetError("rule factors must be finite")

    @property
    def shifters(self):
        return self.negators | self.adversatives | self.amplifiers.keys()


_SCALARS = {
    "negation_scope": int, "negation_factor": float,
    "adversative_before_factor": float, "adversative_after_factor": float,
    "exclaim_boost": float, "exclaim_cap": int, "allcaps_boost": float,
}


def load_rules(path=None, base: RuleSet | None = None) -> RuleSet:
    """Read a YAML rules file; keys it omits keep the values from ``base``.

    With no ``base`` the shipped defaults are the starting point. The
    ``amplifiers`` key may be a mapping or a path to a TSV table.
    """
    if base is None and path is not None:
        base = default_rules()
    src = Path(path) if path is not None else data_path("rules.yaml")
    try:
        raw = yaml.safe_load(src.read_text("utf-8")) or {}
    except yaml.YAMLError as exc:
        raise RuleSetError(f"{src}: {exc}") from None
    if not isinstance(raw, dict):
        raise RuleSetError(f"{src}: expected a mapping")
    unknown = set(raw) - set(_SCALARS) - {"negators", "adversatives", "amplifiers"}
    if unknown:
        raise RuleSetError(f"{src}: unknown rule keys {sorted(unknown)}")
    kw = {}
    if base is not None:
        kw = {k: getattr(base, k) for k in (*_SCALARS, "negators", "adversatives", "amplifiers")}
    for key, conv in _SCALARS.items():
        if key in raw:
            try:
                kw[key] = conv(raw[key])
            except (TypeError, ValueError):
                raise RuleSetError(f"{src}: bad value for {key}") from None
    for key in ("negators", "adversatives"):
        if key in raw:
            # unquoted yes/no in YAML arrive as booleans
            if not all(isinstance(t, str) for t in raw[key]):
                raise RuleSetError(f"{src}: {key} entries must be strings (quote yes/no/on/off)")
            kw[key] = frozenset(t.lower() for t in raw[key])
    if "amplifiers" in raw:
        amp = raw["amplifiers"]
        if isinstance(amp, str):
            kw["amplifiers"] = _load_amplifiers(src.parent / amp)
        elif isinstance(amp, dict):
            kw["amplifiers"] = {str(k).lower(): float(v) for k, v in amp.items()}
        else:
            raise RuleSetError(f"{src}: amplifiers must be a mapping or a file name")
    missing = {"negators", "adversatives", "amplifiers"} - set(kw)
    if missing:
        raise RuleSetError(f"{src}: missing {sorted(missing)}")
    return RuleSet(**kw)


_DEFAULT_RULES = None


def default_rules() -> RuleSet:
    global _DEFAULT_RULES
    if _DEFAULT_RULES is None:
        _DEFAULT_RULES = load_rules()
    return _DEFAULT_RULES


def score_lexical(seg: Segment, lex: Lexicon) -> float:
    """Sum of lexicon valences over the segment's tokens."""
    return math.fsum(lex.entries.get(t, 0.0) for t in seg.tokens)


def score_binary(seg: Segment, lex: Lexicon) -> float:
    """Count of positive minus negative lexicon hits."""
    pos = neg = 0
    for t in seg.tokens:
        v = lex.entries.get(t, 0.0)
        pos += v > 0
        neg += v < 0
    return float(pos - neg)


def _trailing_exclamations(raw):
    tail = raw.rstrip().rstrip("\"'”’)]")
    return len(tail) - len(tail.rstrip("!"))


def _caps_flags(seg):
    # align cased words in raw with the tokens; no caps cue when they differ
    for keep_numbers in (False, True):
        cased = words(seg.raw, remove_numbers=not keep_numbers)
        if [w.lower() for w in cased] == list(seg.tokens):
            return [len(w) > 1 and w.isupper() for w in cased]
    return [False] * len(seg.tokens)


def score_heuristic(seg: Segment, lex: Lexicon, rules: RuleSet | None = None) -> float:
    """Lexicon sum adjusted by valence-shifter rules.

    Each lexicon hit is scaled by ``negation_factor`` when a negator occurs in
    the preceding ``negation_scope`` tokens (not reaching back across an
    adversative), by the boost of an amplifier directly before it, and by
    ``1 + allcaps_boost`` when written in capitals. Hits before the first
    adversative are weighted by ``adversative_before_factor`` and hits after
    it by ``adversative_after_factor``. Trailing exclamation marks scale the
    total by ``(1 + exclaim_boost)`` each, at most ``exclaim_cap`` times.

    Tokens acting as shifters contribute no valence of their own.
    """
    rules = rules or default_rules()
    toks = seg.tokens
    shifters = rules.shifters
    caps = _caps_flags(seg)
    split = next((k for k, t in enumerate(toks) if t in rules.adversatives), None)
    clause_start = 0
    before, after = [], []
    for k, tok in enumerate(toks):
        if tok in rules.adversatives:
            clause_start = k + 1
            continue
        val = lex.entries.get(tok)
        if val is None or tok in shifters:
            continue
        window = toks[max(clause_start, k - rules.negation_scope):k]
        if any(t in rules.negators for t in window):
            val *= rules.negation_factor
        if k > 0 and toks[k - 1] in rules.amplifiers:
            val *= rules.amplifiers[toks[k - 1]]
        if caps[k]:
            val *= 1.0 + rules.allcaps_boost
        (before if split is None or k < split else after).append(val)
    if split is None:
        total = math.fsum(before)
    else:
        total = (
            rules.adversative_before_factor * math.fsum(before)
            + rules.adversative_after_factor * math.fsum(after)
        )
    n_excl = min(_trailing_exclamations(seg.raw), rules.exclaim_cap)
    return total * (1.0 + rules.exclaim_boost) ** n_excl


@dataclass(frozen=True)
class SentimentSeries:
    model: ModelDescriptor
    corpus_id: str
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 1:
            raise ValueError("values must be one-dimensional")
        if not np.all(np.isfinite(vals)):
            raise NonFiniteScore(f"non-finite score in {self.model.model_id}")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def __len__(self):
        return len(self.values)


# ---------------------------------------------------------------- built-ins

@dataclass(frozen=True)
class ScorerSpec:
    """How to produce one model's scores: a lexicon plus a scoring rule."""

    model_id: str
    kind: str  # lexical | binary | heuristic
    lexicon: str  # bundled lexicon name or a path
    rules: str | None = None
    stem: bool = False

    @property
    def family(self):
        return "heuristic" if self.kind == "heuristic" else "lexical"

    @property
    def descriptor(self):
        return ModelDescriptor(self.model_id, self.family)


# lexicons that the fetch script drops into data/lexicons when the network
# allows; vader.tsv and narrative.tsv ship with the package
BUNDLED_LEXICONS = {
    "vader": "vader.tsv",
    "narrative": "narrative.tsv",
    "afinn": "afinn-111.tsv",
    "bing": "bing.tsv",
}

BUILTIN_SCORERS = {
    s.model_id: s
    for s in (
        ScorerSpec("vader", "lexical", "vader"),
        ScorerSpec("vader_rules", "heuristic", "vader"),
        ScorerSpec("vader_binary", "binary", "vader"),
        ScorerSpec("narrative", "lexical", "narrative"),
        ScorerSpec("narrative_rules", "heuristic", "narrative"),
        ScorerSpec("narrative_binary", "binary", "narrative"),
        ScorerSpec("afinn", "lexical", "afinn"),
        ScorerSpec("afinn_rules", "heuristic", "afinn"),
        ScorerSpec("bing", "binary", "bing"),
        ScorerSpec("bing_rules", "heuristic", "bing"),
    )
}

# scorers whose lexicons are always present
DEFAULT_SCORERS = (
    "vader", "vader_rules", "vader_binary",
    "narrative", "narrative_rules", "narrative_binary",
)

KINDS = ("lexical", "binary", "heuristic")

_LEXICON_CACHE: dict[Path, Lexicon] = {}


def resolve_lexicon(ref: str) -> Lexicon:
    """Load a lexicon by bundled name or by path (cached per path)."""
    if ref in BUNDLED_LEXICONS:
        path = data_path("lexicons", BUNDLED_LEXICONS[ref])
        name = ref
        if not path.exists():
            raise MissingData(
                f"lexicon {ref!r} is not installed; run scripts/fetch_data.py to download it"
            )
    else:
        path = Path(ref)
        name = path.stem
    path = path.resolve()
    if path not in _LEXICON_CACHE:
        _LEXICON_CACHE[path] = load_lexicon(path, name)
    return _LEXICON_CACHE[path]


class Scorer:
    """A ready-to-run scorer: resolved lexicon and rules."""

    def __init__(self, spec: ScorerSpec):
        if spec.kind not in KINDS:
            raise UnknownScorer(f"unknown scorer kind {spec.kind!r}")
        self.spec = spec
        self.lexicon = resolve_lexicon(spec.lexicon)
        self.rules = load_rules(spec.rules) if spec.rules else default_rules()
        self.prep = PrepOptions(stem=True) if spec.stem else None

    @property
    def descriptor(self):
        return self.spec.descriptor

    def __call__(self, seg: Segment) -> float:
        if self.prep is not None:
            from .prep import tokenize
            seg = tokenize(seg, self.prep)
        if self.spec.kind == "lexical":
            return score_lexical(seg, self.lexicon)
        if self.spec.kind == "binary":
            return score_binary(seg, self.lexicon)
        return score_heuristic(seg, self.lexicon, self.rules)


def builtin_scorer(model_id: str) -> Scorer:
    try:
        return Scorer(BUILTIN_SCORERS[model_id])
    except KeyError:
        raise UnknownScorer(f"unknown scorer {model_id!r}") from None


def score_corpus(segments: Sequence[Segment], scorer, corpus_id: str = "corpus") -> SentimentSeries:
    """Score every segment in order with ``scorer`` (a Scorer, spec or id)."""
    if not segments:
        raise EmptyCorpus(f"corpus {corpus_id!r} has no segments")
    if isinstance(scorer, str):
        scorer = builtin_scorer(scorer)
    elif isinstance(scorer, ScorerSpec):
        scorer = Scorer(scorer)
    values = np.fromiter((scorer(s) for s in segments), dtype=float, count=len(segments))
    return SentimentSeries(scorer.descriptor, corpus_id, values)


# ---------------------------------------------------------------- external CSV

def ingest_external_scores(path, n_segments: int | None = None, corpus_id: str = "corpus") -> list[SentimentSeries]:
    """Read long-format model scores (``model_id,family,segment_index,score``).

    Returns one series per model, in order of first appearance. When
    ``n_segments`` is given every model must cover exactly that many segments.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != EXTERNAL_HEADER:
            raise ExternalScoresError(f"{path}: header must be {','.join(EXTERNAL_HEADER)}")
        rows: dict[str, dict[int, float]] = {}
        families: dict[str, str] = {}
        for lineno, row in enumerate(reader, 2):
            if not row:
                continue
            if len(row) != 4:
                raise ExternalScoresError(f"{path}:{lineno}: expected 4 fields")
            model, family, idx, score = (c.strip() for c in row)
            try:
                idx = int(idx)
                val = float(score)
            except ValueError:
                raise ExternalScoresError(f"{path}:{lineno}: bad index or score") from None
            if not math.isfinite(val):
                raise NonFiniteScore(f"{path}:{lineno}: non-finite score for {model!r}")
            if families.setdefault(model, family) != family:
                raise ExternalScoresError(f"{path}:{lineno}: model {model!r} changes family")
            scores = rows.setdefault(model, {})
            if idx in scores:
                raise DuplicateIndex(model, idx)
            scores[idx] = val
    out = []
    for model, scores in rows.items():
        if min(scores) < 0:
            raise ExternalScoresError(f"{path}: negative segment index for {model!r}")
        n = max(scores) + 1
        for i in range(n):
            if i not in scores:
                raise MissingIndex(model, i)
        if n_segments is not None and n != n_segments:
            raise LengthMismatch(f"model {model!r} has {n} scores, corpus has {n_segments} segments")
        values = np.array([scores[i] for i in range(n)])
        out.append(SentimentSeries(ModelDescriptor(model, families[model]), corpus_id, values))
    return out


def format_float(x: float) -> str:
    """Shortest repr that round-trips; used by every CSV/JSON writer."""
    return repr(float(x))


def external_scores_csv(series: Sequence[SentimentSeries]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(EXTERNAL_HEADER)
    for s in series:
        for i, v in enumerate(s.values):
            w.writerow((s.model.model_id, s.model.family, i, format_float(v)))
    return buf.getvalue()


def write_external_scores(series: Sequence[SentimentSeries], path) -> None:
    Path(path).write_text(external_scores_csv(series), encoding="utf-8")
