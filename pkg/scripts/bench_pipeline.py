"""Time the full pipeline on a synthetic corpus with ten offline scorers.

Usage: python scripts/bench_pipeline.py [--segments 10000] [--seed 0] [--out DIR]
"""

import argparse
import tempfile
import time
from pathlib import Path

from narrative_arcs.config import load_config
from narrative_arcs.pipeline import run
from narrative_arcs.synthetic import synthetic_story

TEN_SCORERS = [
    "vader", "vader_rules", "vader_binary",
    "narrative", "narrative_rules", "narrative_binary",
    {"id": "vader_stem", "kind": "lexical", "lexicon": "vader", "stem": True},
    {"id": "vader_rules_stem", "kind": "heuristic", "lexicon": "vader", "stem": True},
    {"id": "narrative_stem", "kind": "lexical", "lexicon": "narrative", "stem": True},
    {"id": "narrative_rules_stem", "kind": "heuristic", "lexicon": "narrative", "stem": True},
]


def bench(segments, seed, out):
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    text = out / "synthetic.txt"
    text.write_text(synthetic_story(segments, seed), encoding="utf-8")
    cfg = load_config(
        {"scorers": TEN_SCORERS, "corpora": [{"path": str(text), "id": "synthetic"}]}, out
    )
    t0 = time.perf_counter()
    bundle = run(cfg, out / "run")
    elapsed = time.perf_counter() - t0
    n = len(bundle.corpora["synthetic"].segments)
    return n, elapsed


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--segments", type=int, default=10_000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", type=Path)
    args = ap.parse_args()
    if args.out:
        n, t = bench(args.segments, args.seed, args.out)
    else:
        with tempfile.TemporaryDirectory() as tmp:
            n, t = bench(args.segments, args.seed, tmp)
    print(f"{n} segments x {len(TEN_SCORERS)} scorers: {t:.2f} s")


if __name__ == "__main__":
    main()
