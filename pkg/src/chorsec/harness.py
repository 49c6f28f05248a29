"""Differential testing of termination-insensitive non-interference.

Each trial draws two stores that agree on every low-visible variable, runs
the program on both under independent random schedulers (sharing one
interpretation of the extern functions), and compares the low parts of the
final stores when both runs terminate.
"""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable

from chorsec.infer import DeltaContext
from chorsec.lattice import ExternDecl, Policy, low_equiv
from chorsec.prng import SplitMix64, derive_seed
from chorsec.runtime import (
    Configuration, Cutoff, FunEnv, RandomScheduler, Store, Stuck, Terminated,
    format_store, run, store_from_items,
)
from chorsec.syntax import Program, located_vars
from chorsec.typecheck import check_program

_LETTERS = "abcdefghijklmnopqrstuvwxyz"


def _random_value(rng: SplitMix64):
    match rng.below(3):
        case 0:
            return rng.below(8)
        case 1:
            return rng.below(2) == 1
        case _:
            return "".join(_LETTERS[rng.below(26)] for _ in range(4))


def gen_store_pair(prog: Program, pol: Policy, seed: int) -> tuple[Store, Store]:
    rng = SplitMix64(seed)
    one, two = [], []
    for loc in sorted(located_vars(prog)):
        v = _random_value(rng)
        one.append((loc, v))
        two.append((loc, v if pol.observable(*loc) else _random_value(rng)))
    return store_from_items(one), store_from_items(two)


@dataclass(frozen=True)
class TrialSeeds:
    trial: int
    seed: int
    stores: int
    sched1: int
    sched2: int
    functions: int

    @classmethod
    def derive(cls, base: int, index: int) -> TrialSeeds:
        seed = derive_seed(base, index)
        rng = SplitMix64(seed)
        return cls(index, seed, rng.next(), rng.next(), rng.next(), rng.next())


@dataclass(frozen=True)
class Trial:
    seeds: TrialSeeds
    initial: tuple[Store, Store]
    verdict: str  # pass | violation | inconclusive
    finals: tuple[Store, Store]
    traces: tuple[list, list]
    reason: str = ""


def run_trial(prog: Program, pol: Policy, seeds: TrialSeeds, max_steps: int,
              externs: Iterable[ExternDecl] = ()) -> Trial:
    s1, s2 = gen_store_pair(prog, pol, seeds.stores)
    fe = FunEnv.for_program(prog, (*pol.externs, *externs), seed=seeds.functions)
    outs = [run(Configuration(prog.main, s, prog.procs), fe, RandomScheduler(sched), max_steps)
            for s, sched in ((s1, seeds.sched1), (s2, seeds.sched2))]
    finals = (outs[0].store, outs[1].store)
    traces = (outs[0].trace, outs[1].trace)
    for side, out in enumerate(outs, 1):
        if isinstance(out, Cutoff):
            return Trial(seeds, (s1, s2), "inconclusive", finals, traces, f"cutoff on side {side}")
        if isinstance(out, Stuck):
            return Trial(seeds, (s1, s2), "inconclusive", finals, traces,
                         f"stuck on side {side}: {out.diagnostic}")
    assert all(isinstance(o, Terminated) for o in outs)
    verdict = "pass" if low_equiv(pol, *finals) else "violation"
    return Trial(seeds, (s1, s2), verdict, finals, traces)


@dataclass
class NiReport:
    trials: int = 0
    passes: int = 0
    violations: list[Trial] = field(default_factory=list)
    inconclusive: int = 0
    wall_clock: float = 0.0
    well_typed: bool | None = None

    @property
    def soundness_breach(self) -> bool:
        """A well-typed program that leaks: a checker or interpreter bug."""
        return bool(self.well_typed and self.violations)

    def summary(self) -> str:
        typed = "" if self.well_typed is None else f" well-typed={str(self.well_typed).lower()}"
        return (f"nitest trials={self.trials} passes={self.passes} "
                f"violations={len(self.violations)} inconclusive={self.inconclusive}{typed}")

    def render(self) -> str:
        lines = [self.summary()]
        for t in self.violations:
            s = t.seeds
            lines.append(f"VIOLATION trial={s.trial} seed={s.seed}")
            lines.append(f"  store-seed={s.stores} sched1={s.sched1} sched2={s.sched2} "
                         f"functions={s.functions}")
            for side in (0, 1):
                lines.append(f"--- initial store {side + 1}")
                lines.append(format_store(t.initial[side]).rstrip("\n"))
                lines.append(f"--- final store {side + 1}")
                lines.append(format_store(t.finals[side]).rstrip("\n"))
                lines.append(f"--- trace {side + 1}")
                lines.extend(str(mu) for mu in t.traces[side])
        if self.soundness_breach:
            lines.append("HARD FAILURE: violation on a well-typed program")
        return "\n".join(lines) + "\n"


def _trial_job(args) -> Trial:
    prog, pol, base, index, max_steps, externs = args
    return run_trial(prog, pol, TrialSeeds.derive(base, index), max_steps, externs)


def nitest(prog: Program, pol: Policy, delta: DeltaContext | None = None, trials: int = 100,
           seed: int = 0, max_steps: int = 10_000, externs: Iterable[ExternDecl] = (),
           workers: int = 1) -> NiReport:
    """Run ``trials`` paired executions; ``delta`` enables the well-typedness cross-check."""
    start = time.perf_counter()
    report = NiReport()
    if delta is not None:
        report.well_typed = check_program(prog, pol, delta).accepted
    externs = tuple(externs)
    jobs = [(prog, pol, seed, i, max_steps, externs) for i in range(trials)]
    if workers > 1 and trials > 1:
        with ProcessPoolExecutor(workers) as pool:
            results = list(pool.map(_trial_job, jobs, chunksize=max(1, trials // (4 * workers))))
    else:
        results = [_trial_job(j) for j in jobs]
    for t in results:
        report.trials += 1
        if t.verdict == "pass":
            report.passes += 1
        elif t.verdict == "violation":
            report.violations.append(t)
        else:
            report.inconclusive += 1
    report.wall_clock = time.perf_counter() - start
    return report

