"""Command line front end.

Exit codes: 0 when every check is verified, 1 when a report carries a
counterexample, 2 on invalid input.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from . import reports
from .closed_sets import ClosedSetAutomaton
from .lemma_engine import LemmaInstance, PreconditionError

log = logging.getLogger("cantorduality")


class InputError(Exception):
    pass


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0, help="64-bit seed for every random choice")
    p.add_argument("--workers", type=int, default=1, help="worker threads (output does not depend on it)")
    p.add_argument("--out", help="write the JSON report here instead of stdout")
    p.add_argument("--timing", action="store_true", help="add wall-clock timing to the report")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cantorduality", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    lemma = sub.add_parser("lemma", help="translation-covering lemma on a finite cube")
    lsub = lemma.add_subparsers(dest="action", required=True)
    v = lsub.add_parser("verify", help="sweep a family of instances")
    v.add_argument("--n", type=int, required=True, help="cube width")
    mode = v.add_mutually_exclusive_group(required=True)
    mode.add_argument("--exhaustive", action="store_true", help="every J' ⊆ J (n <= 3)")
    mode.add_argument("--samples", type=int, help="number of random instances")
    _common(v)
    s = lsub.add_parser("search", help="find a witness pair for one instance")
    s.add_argument("--instance", required=True, help='JSON file {"Jprime": ..., "J": ...}')
    s.add_argument("--mode", choices=["exhaustive", "randomized"], default="exhaustive")
    s.add_argument("--budget", type=int, default=10**6)
    _common(s)

    carlson = sub.add_parser("carlson", help="two translations combined into one")
    csub = carlson.add_subparsers(dest="action", required=True)
    c = csub.add_parser("verify")
    c.add_argument("--blocks", type=int, default=8)
    c.add_argument("--trials", type=int, default=100)
    c.add_argument("--max-length", type=int, default=16, help="oracle limit on N")
    c.add_argument("--large-blocks", type=int, default=1000)
    c.add_argument("--large-trials", type=int, default=100)
    c.add_argument("--sabotage", choices=["perturb"], help="negative control: perturb the combined x")
    _common(c)

    adversary = sub.add_parser("adversary", help="two translates no single translate covers")
    asub = adversary.add_subparsers(dest="action", required=True)
    a = asub.add_parser("run")
    a.add_argument("--stages", type=int, default=2)
    a.add_argument("--x-samples", type=int, default=200)
    a.add_argument("--n-start", type=int, default=2)
    a.add_argument("--n-end", type=int, default=6)
    a.add_argument("--cprime", help="automaton JSON for C' (default: shifted copy of the target)")
    a.add_argument("--sabotage", choices=["drop-t2"], help="negative control")
    _common(a)

    oracle = sub.add_parser("oracle", help="brute-force cross-check battery")
    osub = oracle.add_subparsers(dest="action", required=True)
    o = osub.add_parser("run")
    o.add_argument("--corpus", type=int, default=50)
    o.add_argument("--oracle-limit", type=int, default=16)
    _common(o)
    return parser


def _load_json(path: str):
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc


def dispatch(args) -> dict:
    common = dict(seed=args.seed, timing=args.timing)
    if args.command == "lemma" and args.action == "verify":
        if args.exhaustive and args.n > 3:
            raise InputError("exhaustive lemma sweeps need --n <= 3")
        return reports.run_lemma_verify(args.n, args.exhaustive, args.samples or 0, workers=args.workers, **common)
    if args.command == "lemma" and args.action == "search":
        try:
            inst = LemmaInstance.from_json(_load_json(args.instance))
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"bad instance: {exc}") from exc
        try:
            return reports.run_lemma_search(inst, args.mode, budget=args.budget, **common)
        except PreconditionError as exc:
            raise InputError(str(exc)) from exc
    if args.command == "carlson":
        return reports.run_carlson_verify(
            args.blocks, args.trials, max_length=args.max_length, large_blocks=args.large_blocks,
            large_trials=args.large_trials, sabotage=args.sabotage == "perturb", workers=args.workers, **common)
    if args.command == "adversary":
        cprime = None
        if args.cprime:
            try:
                cprime = ClosedSetAutomaton.from_json(_load_json(args.cprime))
            except (KeyError, TypeError, ValueError) as exc:
                raise InputError(f"bad automaton: {exc}") from exc
        return reports.run_adversary(args.stages, args.x_samples, n_start=args.n_start, n_end=args.n_end,
                                     sabotage=args.sabotage, cprime=cprime, workers=args.workers, **common)
    if args.command == "oracle":
        return reports.run_oracle(corpus=args.corpus, oracle_limit=args.oracle_limit, workers=args.workers, **common)
    raise InputError("unknown command")


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        report = dispatch(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    text = reports.dumps(report)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return reports.EXIT_CODES[report["status"]]


if __name__ == "__main__":
    sys.exit(main())
