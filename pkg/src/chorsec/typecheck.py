"""The security typing judgement for choreographies."""

from __future__ import annotations

from dataclasses import dataclass, field

from chorsec.errors import ChorError, Span
from chorsec.infer import DeltaContext, ETA, failing_constraints, gen_constraints
from chorsec.lattice import Label, Policy
from chorsec.syntax import (
    Assign, Call, Chor, Com, Cond, Const, Expr, FunCall, Program, RtCall, Sel, Var,
)


@dataclass(frozen=True)
class FlowError:
    span: Span | None
    rule: str  # t-local | t-com | t-proc
    lhs: Label
    rhs: Label
    target: tuple[str, str]
    pc: Label
    message: str = ""

    def render(self, filename: str = "<input>", severity: str = "error") -> str:
        where = f"{filename}:{self.span}" if self.span else filename
        p, x = self.target
        return f"{severity} {where} {self.rule}: {self.lhs} ⋢ {self.rhs} writing {p}.{x}"


def type_expr(pol: Policy, p: str, e: Expr) -> Label:
    match e:
        case Const():
            return pol.lattice.bottom
        case Var(x):
            return pol.label_of(p, x)
        case FunCall(_, args):
            return pol.lattice.join_all(type_expr(pol, p, a) for a in args)
    raise TypeError(e)


@dataclass
class Checker:
    """Collects flow errors; ``visits`` logs (rule, pc, pc given to sub-derivations)."""

    pol: Policy
    delta: DeltaContext
    errors: list[FlowError] = field(default_factory=list)
    visits: list[tuple[str, Label, Label]] = field(default_factory=list)

    def write(self, rule: str, span, level: Label, pc: Label, target: tuple[str, str]) -> None:
        lat = self.pol.lattice
        lhs = lat.join(level, pc)
        rhs = self.pol.label_of(*target)
        if not lat.leq(lhs, rhs):
            self.errors.append(FlowError(
                span, rule, lhs, rhs, target, pc,
                f"{lhs} data flows into {target[0]}.{target[1]} labelled {rhs}"))

    def chor(self, c: Chor, pc: Label) -> None:
        if not c:
            self.visits.append(("t-nil", pc, pc))
        for i in c:
            self.visits.append(("t-seq", pc, pc))
            self.instr(i, pc)

    def instr(self, i, pc: Label) -> None:
        lat = self.pol.lattice
        match i:
            case Assign(p, x, e):
                self.visits.append(("t-local", pc, pc))
                self.write("t-local", i.span, type_expr(self.pol, p, e), pc, (p, x))
            case Com(p, e, q, x):
                self.visits.append(("t-com", pc, pc))
                self.write("t-com", i.span, type_expr(self.pol, p, e), pc, (q, x))
            case Sel():
                self.visits.append(("t-sel", pc, pc))
            case Cond(p, e, c1, c2):
                inner = lat.join(type_expr(self.pol, p, e), pc)
                self.visits.append(("t-cond", pc, inner))
                self.chor(c1, inner)
                self.chor(c2, inner)
            case Call(name, args):
                self.visits.append(("t-proc", pc, pc))
                if name not in self.delta.constraints:
                    raise ChorError(f"no procedure context entry for {name}")
                renaming = dict(zip(self.delta.formals[name], args))
                for k, lhs, rhs in failing_constraints(self.delta, name, pc, self.pol, renaming):
                    t = k.target
                    self.errors.append(FlowError(
                        i.span, "t-proc", lhs, rhs, (t.proc, t.var), pc,
                        f"call {name}({', '.join(args)}) at pc {pc} violates {k}"))
            case RtCall():
                raise ChorError("runtime call terms cannot be typed")
            case _:
                raise TypeError(i)


def check_chor(pol: Policy, delta: DeltaContext, pc: Label, c: Chor) -> list[FlowError]:
    checker = Checker(pol, delta)
    checker.chor(c, pc)
    return checker.errors


def verify_delta(prog: Program, delta: DeltaContext) -> bool:
    """True iff ``delta`` is a pre-fixed point of constraint regeneration."""
    try:
        return all(gen_constraints(d.body, {ETA}, delta) <= delta[x]
                   for x, d in prog.procs.items())
    except (KeyError, ChorError):
        return False


@dataclass(frozen=True)
class CheckReport:
    errors: list[FlowError]
    delta_ok: bool

    @property
    def accepted(self) -> bool:
        return self.delta_ok and not self.errors

    def render(self, filename: str = "<input>") -> list[str]:
        lines = [e.render(filename) for e in self.errors]
        if not self.delta_ok:
            lines.append(f"error {filename} t-proc: procedure context is not closed "
                         f"under constraint generation")
        return lines


def check_program(prog: Program, pol: Policy, delta: DeltaContext) -> CheckReport:
    errors = check_chor(pol, delta, pol.lattice.bottom, prog.main)
    return CheckReport(errors, verify_delta(prog, delta))

