"""Regenerate the verdict matrix and report how it compares to the golden copy.

    python3 scripts/run_matrix.py [--workers N] [--write-golden]
"""

import argparse
import sys
import time
from pathlib import Path

from fragpsm.harness import Runner, format_matrix, golden_matrix_text, matrix_rows

GOLDEN = Path(__file__).resolve().parents[1] / "src" / "fragpsm" / "data" / "golden_matrix.tsv"


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--write-golden", action="store_true",
                    help="overwrite the packaged golden matrix (review the diff first)")
    args = ap.parse_args()

    t = time.perf_counter()
    text = format_matrix(matrix_rows(Runner(workers=args.workers)))
    dt = time.perf_counter() - t
    old = golden_matrix_text().splitlines()
    changed = [ln for ln in text.splitlines() if ln not in old]
    print(f"{len(text.splitlines()) - 1} rows in {dt:.1f}s, {len(changed)} differ from golden")
    for ln in changed:
        print("  " + ln)
    if args.write_golden:
        GOLDEN.write_text(text)
        print(f"wrote {GOLDEN}")
    return 1 if changed and not args.write_golden else 0


if __name__ == "__main__":
    sys.exit(main())
