"""Reconstruction of the procedure context from constraint sets.

Each procedure gets a set of flow constraints ``bound <= p.x`` over its
formal processes, where a bound is the join of located variables and the
placeholder ``ETA`` for the caller's program counter.  The context is the
least fixed point of regenerating every body's constraints.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Union

from chorsec.errors import InferError
from chorsec.lattice import Label, Policy
from chorsec.syntax import (
    Assign, Call, Chor, Com, Cond, Expr, Program, RtCall, Sel, chor_located_vars, expr_vars,
    walk,
)


@dataclass(frozen=True)
class Loc:
    proc: str
    var: str

    def __str__(self) -> str:
        return f"{self.proc}.{self.var}"


class _Eta:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "ETA"

    def __str__(self) -> str:
        return "η"

    def __reduce__(self):
        return (_Eta, ())


ETA = _Eta()
Atom = Union[Loc, _Eta]
Bound = frozenset


def atom_key(a: Atom) -> tuple:
    return (1, "", "") if a is ETA else (0, a.proc, a.var)


def sorted_atoms(b: Iterable[Atom]) -> list[Atom]:
    return sorted(b, key=atom_key)


@dataclass(frozen=True)
class Constraint:
    bound: frozenset
    target: Loc

    def __str__(self) -> str:
        return "{" + " ⊔ ".join(map(str, sorted_atoms(self.bound))) + f"}} ⊑ {self.target}"

    def ascii(self) -> str:
        atoms = [("pc" if a is ETA else str(a)) for a in sorted_atoms(self.bound)]
        return f"{' | '.join(atoms) or 'bot'} <= {self.target}"

    def sort_key(self) -> tuple:
        return (self.target.proc, self.target.var, [atom_key(a) for a in sorted_atoms(self.bound)])

    def rename(self, m: Mapping[str, str]) -> Constraint:
        r = lambda loc: Loc(m.get(loc.proc, loc.proc), loc.var)  # noqa: E731
        return Constraint(frozenset(a if a is ETA else r(a) for a in self.bound), r(self.target))

    def subst_eta(self, pcb: frozenset) -> Constraint:
        if ETA not in self.bound:
            return self
        return Constraint((self.bound - {ETA}) | pcb, self.target)


def sorted_constraints(cs: Iterable[Constraint]) -> list[Constraint]:
    return sorted(cs, key=Constraint.sort_key)


@dataclass(frozen=True)
class DeltaContext:
    constraints: Mapping[str, frozenset]
    formals: Mapping[str, tuple[str, ...]]
    iterations: int = field(default=0, compare=False)

    @classmethod
    def empty(cls, prog: Program) -> DeltaContext:
        return cls({x: frozenset() for x in prog.procs},
                   {x: d.formals for x, d in prog.procs.items()})

    def __getitem__(self, name: str) -> frozenset:
        return self.constraints[name]

    def replace(self, constraints: Mapping[str, frozenset], iterations: int = 0) -> DeltaContext:
        return DeltaContext(dict(constraints), self.formals, iterations)

    def issubset(self, other: DeltaContext) -> bool:
        return all(cs <= other.constraints.get(x, frozenset())
                   for x, cs in self.constraints.items())

    def format(self) -> list[str]:
        return [f"{x}: {c.ascii()}" for x in sorted(self.constraints)
                for c in sorted_constraints(self.constraints[x])]


# -- bounds ------------------------------------------------------------------

def bound_of_expr(p: str, e: Expr) -> frozenset:
    return frozenset(Loc(p, v) for v in expr_vars(e))


def eval_bound(b: Iterable[Atom], pol: Policy, pc: Label) -> Label:
    lat = pol.lattice
    return lat.join_all(pc if a is ETA else pol.label_of(a.proc, a.var) for a in b)


# -- generation --------------------------------------------------------------

def gen_constraints(c: Chor, pcb: Iterable[Atom], delta: DeltaContext) -> frozenset:
    out: set[Constraint] = set()
    _gen(c, frozenset(pcb), delta, out)
    return frozenset(out)


def _gen(c: Chor, pcb: frozenset, delta: DeltaContext, out: set[Constraint]) -> None:
    for i in c:
        match i:
            case Assign(p, x, e):
                out.add(Constraint(bound_of_expr(p, e) | pcb, Loc(p, x)))
            case Com(p, e, q, x):
                out.add(Constraint(bound_of_expr(p, e) | pcb, Loc(q, x)))
            case Sel():
                pass
            case Cond(p, e, c1, c2):
                inner = pcb | bound_of_expr(p, e)
                _gen(c1, inner, delta, out)
                _gen(c2, inner, delta, out)
            case Call(name, args):
                if name not in delta.constraints:
                    raise InferError(f"call to {name}, which has no constraint set")
                # rename before substituting: the caller's bound may mention
                # processes that share a name with the callee's formals
                m = dict(zip(delta.formals[name], args))
                out.update(k.rename(m).subst_eta(pcb) for k in delta[name])
            case RtCall():
                raise InferError("runtime call term in source choreography")


def phi(prog: Program, delta: DeltaContext) -> DeltaContext:
    return delta.replace({x: gen_constraints(d.body, {ETA}, delta)
                          for x, d in prog.procs.items()})


def universe_size(prog: Program) -> int:
    """Number of distinct constraints any procedure could ever hold."""
    var_names = {x for d in prog.procs.values() for (_, x) in chor_located_vars(d.body)}
    total = 0
    for d in prog.procs.values():
        n = len(d.formals) * len(var_names)
        total += n * 2 ** (n + 1)
    return total


def lfp(prog: Program) -> DeltaContext:
    """Least fixed point of ``phi`` from the empty context.

    Rounds recompute only procedures whose callees changed in the previous
    round, so ``iterations`` counts rounds that had work to do: a program
    without procedure calls converges in one.
    """
    callers: dict[str, set[str]] = {x: set() for x in prog.procs}
    for x, d in prog.procs.items():
        for i in walk(d.body):
            if isinstance(i, Call) and i.name in callers:
                callers[i.name].add(x)

    delta = DeltaContext.empty(prog)
    dirty = set(prog.procs)
    rounds, limit = 0, universe_size(prog) + 1
    while dirty:
        rounds += 1
        assert rounds <= limit, "fixed-point iteration exceeded the constraint universe"
        new = dict(delta.constraints)
        changed = set()
        for x in sorted(dirty):
            cs = gen_constraints(prog.procs[x].body, {ETA}, delta)
            if cs != delta[x]:
                new[x] = cs
                changed.add(x)
        delta = delta.replace(new)
        dirty = {y for x in changed for y in callers[x]}
    # an empty program still takes one (trivial) application of phi
    return delta.replace(delta.constraints, max(rounds, 1))


# -- membership --------------------------------------------------------------

def failing_constraints(delta: DeltaContext, name: str, pc: Label, pol: Policy,
                        renaming: Mapping[str, str] | None = None
                        ) -> list[tuple[Constraint, Label, Label]]:
    """Renamed constraints of ``name`` that ``pol`` violates at ``pc``, with both sides."""
    out = []
    for k in sorted_constraints(delta[name]):
        if renaming:
            k = k.rename(renaming)
        lhs = eval_bound(k.bound, pol, pc)
        rhs = pol.label_of(k.target.proc, k.target.var)
        if not pol.lattice.leq(lhs, rhs):
            out.append((k, lhs, rhs))
    return out


def delta_member(delta: DeltaContext, name: str, pc: Label, pol: Policy,
                 renaming: Mapping[str, str] | None = None) -> bool:
    return not failing_constraints(delta, name, pc, pol, renaming)
