"""Classify the regression corpus and cross-check every verdict."""
import argparse
import json
import sys
import time

from ergconv.corpus import random_corpus, run_corpus, worked_examples


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--count", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--json", help="write per-case results here")
    args = ap.parse_args()

    cases = worked_examples() + random_corpus(args.count, args.seed)
    t0 = time.perf_counter()
    results = run_corpus(cases, args.workers)
    dt = time.perf_counter() - t0
    dirty = [r for r in results if not r.clean]
    for r in dirty:
        print(f"{r.name} p={r.p}: violations={r.violations} discrepancies={r.discrepancies}")
    skipped = sum(bool(r.skipped) for r in results)
    print(f"{len(results)} cases, {len(dirty)} with problems, {skipped} with skipped checks, {dt:.0f}s")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump([{"name": r.name, "p": str(r.p), "verdicts": r.verdicts, "violations": r.violations,
                        "discrepancies": r.discrepancies, "skipped": r.skipped} for r in results], fh, indent=1)
    return 1 if dirty else 0


if __name__ == "__main__":
    sys.exit(main())
