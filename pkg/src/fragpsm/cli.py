"""Command-line entry point.

Exit codes: 0 when every verdict matches what the reviewed golden matrix
implies (or no expectation applies), 1 on a mismatch, 2 on usage or
resource errors.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import DEFAULT_STATE_CAP, TOGGLE_HELP, TOGGLES, ModelVariant
from .explorer import ResourceExceeded
from .harness import (
    RUN_CONFIGS, SCENARIOS, Runner, ScenarioBroken, emit_trace, expected_outcome, format_matrix,
    golden_matrix_text, matrix_rows, parse_matrix, run_scenario,
)
from .props import catalog, lookup

EXIT_OK, EXIT_MISMATCH, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _positive(text: str) -> int:
    n = int(text)
    if n < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return n


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fragpsm", description=__doc__.split("\n")[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def resources(p):
        p.add_argument("--state-cap", type=_positive, default=DEFAULT_STATE_CAP)
        p.add_argument("--workers", type=_positive, default=1)

    v = sub.add_parser("verify", help="check properties on one model variant")
    v.add_argument("--model", choices=("base", "patched", "custom"), default="base")
    v.add_argument("--toggle", action="append", default=[], choices=TOGGLES,
                   help="; ".join(f"{k}: {h}" for k, h in TOGGLE_HELP.items()))
    v.add_argument("--adv", choices=("passive", "dolev-yao", "mac-spoofing"), default="dolev-yao")
    v.add_argument("--depth", type=_positive, default=None,
                   help="exploration bound (default depends on segment and adversary)")
    which = v.add_mutually_exclusive_group(required=True)
    which.add_argument("--property", action="append", help="property id or title; repeatable")
    which.add_argument("--all", action="store_true", help="every catalog property")
    v.add_argument("--out", type=Path, default=None, help="directory for the report and trace files")
    resources(v)

    s = sub.add_parser("scenario", help="run one scripted attack on base and patched models")
    s.add_argument("name", choices=sorted(SCENARIOS))
    s.add_argument("--out", type=Path, default=Path("traces"))
    resources(s)

    m = sub.add_parser("matrix", help="property x variant x adversary verdict grid")
    m.add_argument("--out", type=Path, default=None, help="write the TSV here instead of stdout")
    resources(m)

    sub.add_parser("list-properties", help="show the property catalog")
    return ap


def _variant(args) -> ModelVariant:
    if args.model == "custom":
        if not args.toggle:
            raise UsageError("--model custom needs at least one --toggle")
        return ModelVariant.of(*args.toggle)
    if args.toggle:
        raise UsageError("--toggle is only valid with --model custom")
    return ModelVariant.base() if args.model == "base" else ModelVariant.patched()


def cmd_verify(args) -> int:
    variant = _variant(args)
    if args.all:
        props = catalog()
    else:
        try:
            props = [lookup(name) for name in args.property]
        except KeyError as e:
            raise UsageError(f"unknown property {e.args[0]}") from None
    runner = Runner(args.state_cap, args.workers)
    golden = parse_matrix(golden_matrix_text())
    if args.out is not None:
        args.out.mkdir(parents=True, exist_ok=True)
    status, report = EXIT_OK, []
    for p in props:
        res = runner.result(p.segment, variant, args.adv, args.depth)
        v = runner.verdict(p, variant, args.adv, args.depth)
        want = expected_outcome(p.name, variant.name, args.adv, v.depth, golden)
        mark = "" if want is None else ("\tas expected" if want == v.outcome else f"\texpected {want}")
        if want is not None and want != v.outcome:
            status = EXIT_MISMATCH
        line = f"{p.name}\t{v.outcome}\tdepth={v.depth}"
        report.append(line)
        print(line + mark)
        if args.out is not None and v.trace is not None:
            path = args.out / f"{p.name}.trace"
            emit_trace(v.trace, path, variant, res.adv, RUN_CONFIGS[(p.segment, args.adv)].workload)
            print(f"  trace written to {path}")
    if args.out is not None:
        (args.out / "verify.tsv").write_text("\n".join(report) + "\n")
    return status


def cmd_scenario(args) -> int:
    r = run_scenario(args.name, args.out, args.state_cap, args.workers)
    print(f"scenario {r.name}: {SCENARIOS[r.name].summary}")
    for tag, v, path in (("base", r.base, r.trace_files[0]), (r.patched_variant, r.patched, r.trace_files[1])):
        print(f"  {tag}\t{v.outcome}\tdepth={r.depth}\t{path}")
    return EXIT_OK if r.ok else EXIT_MISMATCH


def cmd_matrix(args) -> int:
    rows = matrix_rows(Runner(args.state_cap, args.workers))
    text = format_matrix(rows)
    if args.out is None:
        sys.stdout.write(text)
    else:
        args.out.parent.mkdir(parents=True, exist_ok=True)
        args.out.write_text(text)
    golden = parse_matrix(golden_matrix_text())
    diff = sorted(set(rows) ^ set(golden), key=lambda r: r.line())
    for r in diff:
        print(f"differs from golden: {r.line()}", file=sys.stderr)
    return EXIT_MISMATCH if diff else EXIT_OK


def cmd_list(args) -> int:
    for p in catalog():
        tag = "extension" if p.extension else "catalog"
        print(f"{p.name}\t{p.kind}\t{p.segment}\t{tag}\t{p.title}")
    return EXIT_OK


COMMANDS = {"verify": cmd_verify, "scenario": cmd_scenario, "matrix": cmd_matrix,
            "list-properties": cmd_list}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except UsageError as e:
        print(f"fragpsm: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except ResourceExceeded as e:
        print(f"fragpsm: resource limit: {e}", file=sys.stderr)
        return EXIT_USAGE
    except ScenarioBroken as e:
        print(f"fragpsm: {e}", file=sys.stderr)
        return EXIT_MISMATCH
    except OSError as e:
        print(f"fragpsm: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
