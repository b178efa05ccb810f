"""Find the shortest depth at which each scenario's base model yields a witness.

Used to pick the per-scenario depth bounds; prints one line per scenario
with the witness depth and the patched verdict at that bound.
"""

import sys
from dataclasses import replace

from fragpsm.config import ModelVariant
from fragpsm.harness import SCENARIOS, scenario_run, variant_of
from fragpsm.props import WITNESS, evaluate


def shortest(s, limit):
    for d in range(1, limit + 1):
        v = evaluate(s.prop, scenario_run(replace(s, depth=d), ModelVariant.base()))
        if v.outcome == WITNESS:
            return d
    return None


def main(limit=14):
    for name, s in SCENARIOS.items():
        d = shortest(s, int(limit))
        if d is None:
            print(f"{name}\tno witness up to depth {limit}")
            continue
        patched = evaluate(s.prop, scenario_run(s, variant_of(s.patched))).outcome
        print(f"{name}\twitness at {d}\tconfigured {s.depth}\t{s.patched} at {s.depth}: {patched}")


if __name__ == "__main__":
    main(*sys.argv[1:])
