"""Recompute the golden table and write it as JSON next to the printed table."""
import argparse
import json
import sys
import time

from ergconv.cli import normalize
from ergconv.golden import format_table, rows


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--json", help="also write the rows to this file")
    args = ap.parse_args()
    t0 = time.perf_counter()
    rs = rows()
    print(format_table(rs))
    print(f"{sum(r.passed for r in rs)}/{len(rs)} rows pass in {time.perf_counter() - t0:.1f}s")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(normalize([r.to_json() for r in rs]), fh, indent=2, sort_keys=True)
    return 0 if all(r.passed for r in rs) else 1


if __name__ == "__main__":
    sys.exit(main())
