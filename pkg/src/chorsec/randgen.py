"""Random well-formed programs, policies and labellings for property testing.

Recursive calls inside procedure bodies sit behind a fuel guard on a
reserved variable ``k`` so that most generated runs terminate.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from chorsec.lattice import Lattice, Policy
from chorsec.syntax import (
    BUILTINS, Assign, Call, Com, Cond, Const, FunCall, ProcDef, Program, Sel, Var,
    chor_located_vars, located_vars, walk,
)

PROCESSES = ("a", "b", "c")
FORMALS = ("p", "q", "r")
VARS = ("x", "y", "z")
FUEL = "k"


def two_point() -> Lattice:
    return Lattice.chain("Low", "High")


def diamond() -> Lattice:
    return Lattice.build(["Low", "A", "B", "Top"], "Low",
                         [("Low", "A"), ("Low", "B"), ("A", "Top"), ("B", "Top")])


@dataclass
class _Budget:
    left: int

    def take(self, n: int = 1) -> bool:
        if self.left < n:
            return False
        self.left -= n
        return True


class ProgramGenerator:
    def __init__(self, rng: random.Random, max_procs: int = 3, max_instrs: int = 12):
        self.rng = rng
        self.max_procs = max_procs
        self.max_instrs = max_instrs

    def expr(self, depth: int = 0):
        r = self.rng.random()
        if depth >= 2 or r < 0.35:
            return Var(self.rng.choice(VARS))
        if r < 0.55:
            return Const(self.rng.choice([0, 1, 2, 3, True, False]))
        fn = self.rng.choice(sorted(BUILTINS))
        return FunCall(fn, tuple(self.expr(depth + 1) for _ in range(BUILTINS[fn])))

    def chor(self, procs: tuple[str, ...], sigs: dict[str, int], budget: _Budget,
             in_body: bool, depth: int = 0) -> tuple:
        out = []
        for _ in range(self.rng.randint(0, 4)):
            if not budget.take():
                break
            kinds = ["assign", "assign", "cond"]
            if len(procs) > 1:
                kinds += ["com", "com", "sel"]
            if sigs and any(n <= len(procs) for n in sigs.values()):
                kinds += ["call"]
            kind = self.rng.choice(kinds)
            p = self.rng.choice(procs)
            match kind:
                case "assign":
                    out.append(Assign(p, self.rng.choice(VARS), self.expr()))
                case "com":
                    q = self.rng.choice([x for x in procs if x != p])
                    out.append(Com(p, self.expr(), q, self.rng.choice(VARS)))
                case "sel":
                    q = self.rng.choice([x for x in procs if x != p])
                    out.append(Sel(p, q, self.rng.choice(["L", "R"])))
                case "cond" if depth < 2:
                    out.append(Cond(p, self.expr(),
                                    self.chor(procs, sigs, budget, in_body, depth + 1),
                                    self.chor(procs, sigs, budget, in_body, depth + 1)))
                case "cond":
                    out.append(Assign(p, self.rng.choice(VARS), self.expr()))
                case "call":
                    name = self.rng.choice(sorted(x for x, n in sigs.items() if n <= len(procs)))
                    args = tuple(self.rng.sample(procs, sigs[name]))
                    call = Call(name, args)
                    if in_body and budget.take(2):
                        g = args[0]
                        out.append(Cond(g, FunCall("lt", (Var(FUEL), Const(3))),
                                        (Assign(g, FUEL, FunCall("add", (Var(FUEL), Const(1)))),
                                         call), ()))
                    elif not in_body:
                        out.append(call)
        return tuple(out)

    def program(self) -> Program:
        n = self.rng.randint(0, self.max_procs)
        sigs = {f"P{i}": self.rng.randint(1, 3) for i in range(n)}
        budget = _Budget(self.max_instrs)
        procs = {}
        for name, arity in sigs.items():
            formals = FORMALS[:arity]
            procs[name] = ProcDef(name, formals, self.chor(formals, sigs, budget, True))
        main = self.chor(PROCESSES, sigs, budget, False)
        if not main and sigs and budget.take():
            name = sorted(sigs)[0]
            main = (Call(name, PROCESSES[:sigs[name]]),)
        return Program((), procs, main)


def random_program(seed: int, max_procs: int = 3, max_instrs: int = 12) -> Program:
    return ProgramGenerator(random.Random(seed), max_procs, max_instrs).program()


def instr_count(prog: Program) -> int:
    return sum(1 for _ in walk(prog.main)) + sum(
        sum(1 for _ in walk(d.body)) for d in prog.procs.values())


def random_policy(prog: Program, lat: Lattice, rng: random.Random, low: str | None = None,
                  bias: float = 0.6) -> Policy:
    """Label every located variable; ``bias`` is the chance of drawing bottom."""
    labels = {}
    for loc in sorted(located_vars(prog)):
        labels[loc] = lat.bottom if rng.random() < bias else rng.choice(lat.elements)
    return Policy(lat, low or lat.bottom, labels)


def formal_universe(prog: Program, name: str) -> list[tuple[str, str]]:
    """Every (formal, variable) pair a labelling for ``name``'s body may need."""
    names = {FUEL, *VARS}
    for d in prog.procs.values():
        names.update(x for _, x in chor_located_vars(d.body))
    return sorted((p, x) for p in prog.procs[name].formals for x in names)
