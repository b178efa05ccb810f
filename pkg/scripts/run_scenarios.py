"""Run every scripted attack and write its trace files.

    python3 scripts/run_scenarios.py [out_dir]
"""

import sys
import time

from fragpsm.harness import SCENARIOS, run_scenario


def main(out_dir="traces"):
    failed = 0
    for name in SCENARIOS:
        t = time.perf_counter()
        r = run_scenario(name, out_dir)
        for line in r.lines():
            print(line)
        print(f"  {'ok' if r.ok else 'UNEXPECTED'} in {time.perf_counter() - t:.1f}s")
        failed += not r.ok
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main(*sys.argv[1:]))
