"""Text preparation: normalization, sentence segmentation and tokenization."""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass, field, replace
from functools import lru_cache
from pathlib import Path

from . import porter
from .errors import InvalidCorpusId, InvalidEncoding, ValidationError

CORPUS_ID_RE = re.compile(r"^[a-z0-9_-]+$")

DEFAULT_HEADER_PATTERNS = (r"^chapter\b", r"^book\b", r"^stave\b")

# ASCII punctuation plus the typographic marks common in e-texts
PUNCTUATION = "!\"#$%&'()*+,-./:;<=>?@[\\]^_`{|}~‘’“”—–…«»"

_APOSTROPHES = str.maketrans({"’": "'", "‘": "'", "ʼ": "'"})
_HYPHEN_BREAK = re.compile(r"(\w)-[ \t]*\n[ \t]*(\w)")
_BLANK_LINE = re.compile(r"\n[ \t]*\n")
# terminal punctuation, optional closing quotes/brackets, then whitespace
_SENTENCE_END = re.compile(r"[.!?]+[\"'”’)\]]*(?=\s)")


def data_path(*parts) -> Path:
    """Location of a file shipped in the package's data directory."""
    return Path(__file__).parent.joinpath("data", *parts)


@lru_cache(maxsize=None)
def _read_table(name):
    text = data_path(name).read_text("utf-8")
    return tuple(ln for ln in text.splitlines() if ln.strip() and not ln.startswith("#"))


def load_contractions(path=None) -> dict[str, str]:
    """Read a contraction table (``contraction<TAB>expansion`` per line)."""
    if path is None:
        lines = _read_table("contractions.tsv")
    else:
        lines = [
            ln for ln in Path(path).read_text("utf-8").splitlines()
            if ln.strip() and not ln.startswith("#")
        ]
    table = {}
    for ln in lines:
        short, sep, long = ln.partition("\t")
        if not sep or not long.strip():
            raise ValidationError(f"bad contraction row: {ln!r}")
        table[short.strip().lower()] = long.strip().lower()
    return table


def load_abbreviations(path=None) -> frozenset[str]:
    """Read an abbreviation guard list, one entry per line."""
    if path is None:
        lines = _read_table("abbreviations.txt")
    else:
        lines = [
            ln for ln in Path(path).read_text("utf-8").splitlines()
            if ln.strip() and not ln.startswith("#")
        ]
    return frozenset(ln.strip().lower() for ln in lines)


@dataclass(frozen=True)
class RawDocument:
    corpus_id: str
    text: str

    def __post_init__(self):
        if not CORPUS_ID_RE.match(self.corpus_id):
            raise InvalidCorpusId(f"corpus id must match [a-z0-9_-]+, got {self.corpus_id!r}")
        try:
            self.text.encode("utf-8")
        except UnicodeEncodeError as exc:
            raise InvalidEncoding(str(exc)) from None

    @classmethod
    def from_file(cls, path, corpus_id=None):
        path = Path(path)
        try:
            text = path.read_bytes().decode("utf-8")
        except UnicodeDecodeError as exc:
            raise InvalidEncoding(f"{path}: {exc}") from None
        if corpus_id is None:
            corpus_id = re.sub(r"[^a-z0-9_-]+", "_", path.stem.lower()).strip("_") or "corpus"
        return cls(corpus_id, text.lstrip("\ufeff"))


@dataclass(frozen=True)
class Segment:
    index: int
    raw: str
    tokens: tuple[str, ...] = ()


@dataclass(frozen=True)
class PrepOptions:
    expand_contractions: bool = True
    remove_numbers: bool = True
    stem: bool = False
    abbreviation_guard: frozenset[str] = field(default_factory=load_abbreviations)
    contractions: dict[str, str] = field(default_factory=load_contractions, compare=False)
    header_patterns: tuple[str, ...] = DEFAULT_HEADER_PATTERNS
    # False keeps the original case in Segment.raw so the heuristic scorers
    # can see all-caps emphasis; tokens are lowercased either way
    lowercase: bool = True

    def __post_init__(self):
        bad = [a for a in self.abbreviation_guard if not a.endswith(".")]
        if bad:
            raise ValidationError(f"abbreviation guard entries must end with '.': {sorted(bad)}")
        object.__setattr__(self, "abbreviation_guard", frozenset(a.lower() for a in self.abbreviation_guard))
        for pat in self.header_patterns:
            try:
                re.compile(pat)
            except re.error as exc:
                raise ValidationError(f"bad header pattern {pat!r}: {exc}") from None


def _strip_nonprintable(text):
    keep = []
    for ch in text:
        if ch in "\n\t" or ch.isprintable():
            keep.append(ch)
        elif unicodedata.category(ch) == "Zs":
            keep.append(" ")
    return "".join(keep)


def _strip_headers(text, patterns):
    if not patterns:
        return text
    regexes = [re.compile(p, re.IGNORECASE) for p in patterns]
    lines = text.split("\n")
    return "\n".join(ln for ln in lines if not any(r.search(ln.strip()) for r in regexes))


def _match_case(src, repl):
    if src.isupper() and len(src) > 1:
        return repl.upper()
    if src[:1].isupper():
        return repl[:1].upper() + repl[1:]
    return repl


def _expand(text, table):
    if not table:
        return text
    keys = sorted(table, key=len, reverse=True)
    pattern = re.compile(
        r"(?<![\w'])(" + "|".join(re.escape(k) for k in keys) + r")(?![\w'])",
        re.IGNORECASE,
    )
    return pattern.sub(lambda m: _match_case(m.group(0), table[m.group(0).lower()]), text)


def normalize_text(doc: RawDocument, opts: PrepOptions | None = None) -> str:
    """Clean a raw document ahead of segmentation.

    Drops non-printable characters and header lines, lowercases, rejoins
    words hyphenated across a line break and expands contractions. Blank
    lines between paragraphs survive.
    """
    opts = opts or PrepOptions()
    text = doc.text.replace("\r\n", "\n").replace("\r", "\n")
    text = _strip_nonprintable(text).replace("\t", " ")
    text = _strip_headers(text, opts.header_patterns)
    if opts.lowercase:
        text = text.lower()
    text = _HYPHEN_BREAK.sub(r"\1\2", text)
    text = text.translate(_APOSTROPHES)
    if opts.expand_contractions:
        text = _expand(text, opts.contractions)
    return text


def _guarded(chunk, end, guard):
    # the word that the terminal punctuation belongs to
    start = max(chunk.rfind(" ", 0, end), chunk.rfind("\n", 0, end)) + 1
    word = chunk[start:end].lstrip(PUNCTUATION.replace(".", "")).lower()
    return word in guard


def segment(text: str, abbreviation_guard=None) -> list[Segment]:
    """Split normalized text into sentence segments.

    A sentence ends at a run of ``.``, ``!`` or ``?`` (plus any closing
    quotes) followed by whitespace, unless the word ending there is in the
    abbreviation guard. Paragraph breaks always end a sentence.
    """
    guard = load_abbreviations() if abbreviation_guard is None else frozenset(
        a.lower() for a in abbreviation_guard
    )
    sentences = []
    for para in _BLANK_LINE.split(text):
        pos = 0
        for m in _SENTENCE_END.finditer(para):
            punct_end = m.start() + len(m.group(0).rstrip("\"'”’)]"))
            if _guarded(para, punct_end, guard):
                continue
            sentences.append(para[pos:m.end()])
            pos = m.end()
        sentences.append(para[pos:])
    out = []
    for s in sentences:
        s = " ".join(s.split())
        if s:
            out.append(Segment(len(out), s))
    return out


def words(raw: str, remove_numbers: bool = True) -> list[str]:
    """Whitespace-split words with edge punctuation stripped, case kept."""
    out = []
    # NFKC folds styled letters and digits (e.g. mathematical bold) to plain ones
    for w in unicodedata.normalize("NFKC", raw).split():
        w = w.strip(PUNCTUATION)
        if not w or not any(ch.isalnum() for ch in w):
            continue
        if remove_numbers and any(ch.isdigit() for ch in w):
            continue
        out.append(w)
    return out


def _lower(word):
    # a few symbol letters (negative circled capitals) have no lowercase form
    return "".join(ch for ch in word.lower() if not ch.isupper())


def tokenize(seg: Segment, opts: PrepOptions | None = None) -> Segment:
    opts = opts or PrepOptions()
    toks = [_lower(w) for w in words(seg.raw, opts.remove_numbers)]
    toks = [t for t in toks if t]
    if opts.stem:
        toks = [porter.stem(t) for t in toks]
    return replace(seg, tokens=tuple(toks))


def prepare(doc: RawDocument, opts: PrepOptions | None = None) -> list[Segment]:
    """Normalize, segment and tokenize a document in one pass."""
    opts = opts or PrepOptions()
    segs = segment(normalize_text(doc, opts), opts.abbreviation_guard)
    return [tokenize(s, opts) for s in segs]
