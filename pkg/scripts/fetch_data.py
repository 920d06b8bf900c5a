"""Download the optional lexicons and the Dickens sample corpus.

Writes into the package data directory:

    lexicons/afinn-111.tsv        AFINN-111, 2,477 entries, integer valence -5..+5
    lexicons/bing.tsv             Hu & Liu opinion lexicon as +1 / -1
    corpora/christmas_carol.txt   Project Gutenberg #46, boilerplate stripped

Usage: python scripts/fetch_data.py [--force] [--timeout SECONDS]
"""

import argparse
import re
import sys
import urllib.request
from pathlib import Path

from narrative_arcs.prep import data_path

AFINN_URL = "https://raw.githubusercontent.com/fnielsen/afinn/master/afinn/data/AFINN-111.txt"
BING_URLS = {
    1: "https://raw.githubusercontent.com/jeffreybreen/twitter-sentiment-analysis-tutorial-201107/master/data/opinion-lexicon-English/positive-words.txt",
    -1: "https://raw.githubusercontent.com/jeffreybreen/twitter-sentiment-analysis-tutorial-201107/master/data/opinion-lexicon-English/negative-words.txt",
}
CAROL_URLS = (
    "https://www.gutenberg.org/cache/epub/46/pg46.txt",
    "https://www.gutenberg.org/files/46/46-0.txt",
)


def fetch(url, timeout):
    print(f"GET {url}", file=sys.stderr)
    req = urllib.request.Request(url, headers={"User-Agent": "narrative-arcs-fetch"})
    with urllib.request.urlopen(req, timeout=timeout) as resp:
        return resp.read()


def afinn(timeout):
    text = fetch(AFINN_URL, timeout).decode("utf-8")
    rows = [line.rsplit("\t", 1) for line in text.splitlines() if line.strip()]
    body = "".join(f"{w.strip()}\t{int(v)}\n" for w, v in rows)
    return "# AFINN-111 (Finn Arup Nielsen), ODbL 1.0\n" + body


def bing(timeout):
    words = {}
    for sign, url in BING_URLS.items():
        # the negative list is latin-1 encoded
        text = fetch(url, timeout).decode("latin-1")
        for line in text.splitlines():
            w = line.strip()
            if w and not w.startswith(";"):
                words.setdefault(w, set()).add(sign)
    # a handful of words sit in both lists; they carry no usable polarity
    both = sorted(w for w, s in words.items() if len(s) > 1)
    if both:
        print(f"bing: dropping {len(both)} words listed as both positive and negative: {both}", file=sys.stderr)
    body = "".join(f"{w}\t{s.pop()}\n" for w, s in sorted(words.items()) if len(s) == 1)
    return "# Hu & Liu opinion lexicon (positive +1, negative -1)\n" + body


def strip_gutenberg(text):
    text = text.replace("\r\n", "\n")
    start = re.search(r"^\*\*\* ?START OF (THE|THIS) PROJECT GUTENBERG.*$", text, re.M)
    end = re.search(r"^\*\*\* ?END OF (THE|THIS) PROJECT GUTENBERG.*$", text, re.M)
    body = text[start.end() if start else 0 : end.start() if end else len(text)]
    # skip front matter (title page, contents) up to the first stave heading
    first = list(re.finditer(r"^\s*STAVE\s+(I|ONE)\b.*$", body, re.M | re.I))
    if len(first) > 1:
        body = body[first[-1].start():]
    return body.strip() + "\n"


def carol(timeout):
    last = None
    for url in CAROL_URLS:
        try:
            return strip_gutenberg(fetch(url, timeout).decode("utf-8-sig"))
        except OSError as exc:
            last = exc
    raise last


TARGETS = {
    ("lexicons", "afinn-111.tsv"): afinn,
    ("lexicons", "bing.tsv"): bing,
    ("corpora", "christmas_carol.txt"): carol,
}


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--force", action="store_true", help="re-download files that already exist")
    ap.add_argument("--timeout", type=float, default=30.0)
    args = ap.parse_args(argv)
    failed = 0
    for parts, make in TARGETS.items():
        dest = data_path(*parts)
        if dest.exists() and not args.force:
            print(f"have {dest}", file=sys.stderr)
            continue
        try:
            content = make(args.timeout)
        except OSError as exc:
            print(f"FAILED {dest.name}: {exc}", file=sys.stderr)
            failed += 1
            continue
        dest.parent.mkdir(parents=True, exist_ok=True)
        dest.write_text(content, encoding="utf-8")
        print(f"wrote {dest}", file=sys.stderr)
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
