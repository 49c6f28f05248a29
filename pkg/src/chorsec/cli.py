"""Command-line entry points: check, infer, run and nitest."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from chorsec.errors import ChorError
from chorsec.harness import nitest
from chorsec.infer import lfp
from chorsec.lattice import Policy, parse_policy
from chorsec.parser import parse_program
from chorsec.runtime import (
    Cutoff, FunEnv, Stuck, format_store, make_scheduler, parse_store, program_config, run,
)
from chorsec.syntax import Program, validate_program
from chorsec.typecheck import check_program

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_CUTOFF = 0, 1, 2, 3


class _InputError(Exception):
    pass


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise _InputError(f"cannot read {path}: {exc.strerror}") from None


def _load_policy(path: str | None) -> Policy | None:
    if path is None:
        return None
    try:
        return parse_policy(_read(path))
    except ChorError as exc:
        raise _InputError(f"{path}: {exc}") from None


def _load_program(path: str, pol: Policy | None) -> Program:
    try:
        prog = parse_program(_read(path))
    except ChorError as exc:
        raise _InputError(f"{path}:{exc}") from None
    diags = validate_program(prog, pol.externs if pol else ())
    if diags:
        raise _InputError("\n".join(f"{path}: {d}" for d in diags))
    return prog


def cmd_check(args, out) -> int:
    pol = _load_policy(args.policy)
    prog = _load_program(args.file, pol)
    try:
        report = check_program(prog, pol, lfp(prog))
    except ChorError as exc:
        raise _InputError(str(exc)) from None
    for line in report.render(args.file):
        print(line, file=out)
    if report.accepted:
        print(f"ok {args.file}: well-typed at pc={pol.lattice.bottom}", file=out)
        return EXIT_OK
    return EXIT_FAIL


def cmd_infer(args, out) -> int:
    pol = _load_policy(args.policy)
    prog = _load_program(args.file, pol)
    delta = lfp(prog)
    for name in sorted(delta.constraints):
        n = len(delta[name])
        print(f"# {name}: {n} constraint{'s' if n != 1 else ''}", file=out)
    if args.show_constraints:
        for line in delta.format():
            print(line, file=out)
    print(f"iterations={delta.iterations}", file=out)
    return EXIT_OK


def cmd_run(args, out) -> int:
    pol = _load_policy(args.policy)
    prog = _load_program(args.file, pol)
    store = {}
    if args.store:
        try:
            store = parse_store(_read(args.store))
        except ChorError as exc:
            raise _InputError(f"{args.store}: {exc}") from None
    fe = FunEnv.for_program(prog, pol.externs if pol else (), seed=args.seed,
                            strict=args.strict_eval)
    outcome = run(program_config(prog, store), fe, make_scheduler(args.sched, args.seed),
                  args.max_steps)
    out.write(format_store(outcome.store))
    if args.trace:
        print("# trace", file=out)
        for mu in outcome.trace:
            print(mu, file=out)
    if isinstance(outcome, Stuck):
        print(f"stuck after {len(outcome.trace)} step(s): {outcome.diagnostic}", file=sys.stderr)
        return EXIT_FAIL
    if isinstance(outcome, Cutoff):
        print(f"cutoff after {args.max_steps} step(s)", file=sys.stderr)
        return EXIT_CUTOFF
    return EXIT_OK


def cmd_nitest(args, out) -> int:
    pol = _load_policy(args.policy)
    prog = _load_program(args.file, pol)
    try:
        report = nitest(prog, pol, lfp(prog), trials=args.trials, seed=args.seed,
                        max_steps=args.max_steps, workers=args.workers)
    except ChorError as exc:
        raise _InputError(str(exc)) from None
    out.write(report.render())
    print(f"wall-clock {report.wall_clock:.3f}s", file=sys.stderr)
    return EXIT_OK if not report.violations else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="chorsec",
                                 description="Information-flow checking for choreographies.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="type-check main at the bottom program counter")
    p.add_argument("file")
    p.add_argument("--policy", required=True)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("infer", help="print the reconstructed procedure context")
    p.add_argument("file")
    p.add_argument("--policy")
    p.add_argument("--show-constraints", action="store_true")
    p.set_defaults(func=cmd_infer)

    p = sub.add_parser("run", help="execute main from a store")
    p.add_argument("file")
    p.add_argument("--store")
    p.add_argument("--policy", help="only consulted for extern declarations")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sched", choices=["det", "rand"], default="det")
    p.add_argument("--max-steps", type=int, default=10_000)
    p.add_argument("--trace", action="store_true")
    p.add_argument("--strict-eval", action="store_true")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("nitest", help="differentially test non-interference")
    p.add_argument("file")
    p.add_argument("--policy", required=True)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-steps", type=int, default=10_000)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_nitest)
    return ap


def main(argv: list[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    for name in ("trials", "max_steps"):
        if getattr(args, name, 0) < 0:
            print(f"chorsec: --{name.replace('_', '-')} must be non-negative", file=sys.stderr)
            return EXIT_USAGE
    try:
        return args.func(args, out)
    except _InputError as exc:
        print(f"chorsec: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
