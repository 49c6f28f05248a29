"""AST of recursive choreographies and structural operations on it.

A choreography is a flat tuple of instructions; the empty tuple is the
terminated choreography.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Union

from chorsec.errors import ChorError, Span

Value = Union[int, bool, str]

BUILTINS: dict[str, int] = {
    "add": 2, "sub": 2, "mul": 2, "div": 2,
    "eq": 2, "lt": 2, "le": 2,
    "and": 2, "or": 2, "not": 1,
    "concat": 2,
}


# -- expressions -------------------------------------------------------------

@dataclass(frozen=True)
class Const:
    value: Value

    def __eq__(self, other):
        # 1 and True must stay distinct constants
        return (isinstance(other, Const) and type(self.value) is type(other.value)
                and self.value == other.value)

    def __hash__(self):
        return hash((type(self.value), self.value))


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class FunCall:
    fn: str
    args: tuple[Expr, ...]


Expr = Union[Const, Var, FunCall]


def expr_vars(e: Expr) -> Iterator[str]:
    match e:
        case Var(name):
            yield name
        case FunCall(_, args):
            for a in args:
                yield from expr_vars(a)


def expr_funs(e: Expr) -> Iterator[tuple[str, int]]:
    if isinstance(e, FunCall):
        yield e.fn, len(e.args)
        for a in e.args:
            yield from expr_funs(a)


# -- instructions ------------------------------------------------------------

def _span() -> Span | None:
    return field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Com:
    sender: str
    expr: Expr
    receiver: str
    var: str
    span: Span | None = _span()


@dataclass(frozen=True)
class Sel:
    sender: str
    receiver: str
    label: str
    span: Span | None = _span()


@dataclass(frozen=True)
class Assign:
    proc: str
    var: str
    expr: Expr
    span: Span | None = _span()


@dataclass(frozen=True)
class Cond:
    proc: str
    guard: Expr
    then: Chor
    else_: Chor
    span: Span | None = _span()


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple[str, ...]
    span: Span | None = _span()


@dataclass(frozen=True)
class RtCall:
    """Runtime marker: ``proc`` has not entered the call yet."""

    proc: str
    name: str
    args: tuple[str, ...]
    cont: Chor


Instr = Union[Com, Sel, Assign, Cond, Call, RtCall]
Chor = tuple  # tuple[Instr, ...]

NIL: Chor = ()


@dataclass(frozen=True)
class ProcDef:
    name: str
    formals: tuple[str, ...]
    body: Chor
    span: Span | None = _span()


@dataclass(frozen=True)
class Program:
    externs: tuple = ()  # tuple[ExternDecl, ...]
    procs: Mapping[str, ProcDef] = field(default_factory=dict)
    main: Chor = NIL

    def __eq__(self, other):
        if not isinstance(other, Program):
            return NotImplemented
        return (self.externs == other.externs and dict(self.procs) == dict(other.procs)
                and self.main == other.main)

    __hash__ = None


# -- process names -----------------------------------------------------------

def pn_instr(i: Instr) -> frozenset[str]:
    match i:
        case Com(p, _, q, _) | Sel(p, q, _):
            return frozenset((p, q))
        case Assign(p, _, _):
            return frozenset((p,))
        case Cond(p, _, c1, c2):
            return frozenset((p,)) | pn(c1) | pn(c2)
        case Call(_, args):
            return frozenset(args)
        case RtCall(r, _, _, _):
            return frozenset((r,))
    raise TypeError(f"not an instruction: {i!r}")


def pn(c: Chor) -> frozenset[str]:
    out: frozenset[str] = frozenset()
    for i in c:
        out |= pn_instr(i)
    return out


def graft(c: Chor, k: Chor) -> Chor:
    return tuple(c) + tuple(k)


# -- renaming ----------------------------------------------------------------

def rename_processes(c: Chor, mapping: Mapping[str, str]) -> Chor:
    """Simultaneously rename process names; names outside ``mapping`` are kept."""
    if len(set(mapping.values())) != len(mapping):
        raise ChorError(f"non-injective renaming {dict(mapping)}")
    return _rename(c, mapping)


def _rename(c: Chor, m: Mapping[str, str]) -> Chor:
    r = lambda p: m.get(p, p)  # noqa: E731
    out = []
    for i in c:
        match i:
            case Com(p, e, q, x, span):
                out.append(Com(r(p), e, r(q), x, span))
            case Sel(p, q, lab, span):
                out.append(Sel(r(p), r(q), lab, span))
            case Assign(p, x, e, span):
                out.append(Assign(r(p), x, e, span))
            case Cond(p, e, c1, c2, span):
                out.append(Cond(r(p), e, _rename(c1, m), _rename(c2, m), span))
            case Call(name, args, span):
                out.append(Call(name, tuple(map(r, args)), span))
            case RtCall(p, name, args, cont):
                out.append(RtCall(r(p), name, tuple(map(r, args)), _rename(cont, m)))
    return tuple(out)


# -- traversal helpers -------------------------------------------------------

def walk(c: Chor) -> Iterator[Instr]:
    """All instructions of ``c``, descending into conditional branches."""
    for i in c:
        yield i
        if isinstance(i, Cond):
            yield from walk(i.then)
            yield from walk(i.else_)


def chor_located_vars(c: Chor) -> set[tuple[str, str]]:
    out: set[tuple[str, str]] = set()
    for i in walk(c):
        match i:
            case Assign(p, x, e):
                out.add((p, x))
                out.update((p, v) for v in expr_vars(e))
            case Com(p, e, q, x):
                out.add((q, x))
                out.update((p, v) for v in expr_vars(e))
            case Cond(p, e, _, _):
                out.update((p, v) for v in expr_vars(e))
    return out


def located_vars(prog: Program) -> set[tuple[str, str]]:
    """Located variables touched by ``main`` and every procedure instance it reaches."""
    out = chor_located_vars(prog.main)
    seen: set[tuple[str, tuple[str, ...]]] = set()
    todo = [(i.name, i.args) for i in walk(prog.main) if isinstance(i, Call)]
    while todo:
        name, args = todo.pop()
        if (name, args) in seen or name not in prog.procs:
            continue
        seen.add((name, args))
        d = prog.procs[name]
        if len(d.formals) != len(args):
            continue
        body = _rename(d.body, dict(zip(d.formals, args)))
        out |= chor_located_vars(body)
        todo.extend((i.name, i.args) for i in walk(body) if isinstance(i, Call))
    return out


# -- validation --------------------------------------------------------------

def _where(x) -> str:
    span = getattr(x, "span", None)
    return f"{span}: " if span is not None else ""


def _check_chor(c: Chor, prog: Program, funs: Mapping[str, int], ctx: str,
                allowed: frozenset[str] | None, diags: list[str]) -> None:
    for i in walk(c):
        loc = _where(i)
        if isinstance(i, RtCall):
            diags.append(f"{ctx}: runtime call term in source")
            continue
        if isinstance(i, (Com, Sel)) and i.sender == i.receiver:
            diags.append(f"{loc}{ctx}: {i.sender} communicates with itself")
        exprs = {Com: lambda: [i.expr], Assign: lambda: [i.expr],
                 Cond: lambda: [i.guard]}.get(type(i), lambda: [])()
        for e in exprs:
            for fn, n in expr_funs(e):
                if fn not in funs:
                    diags.append(f"{loc}{ctx}: unknown function {fn}")
                elif funs[fn] != n:
                    diags.append(f"{loc}{ctx}: {fn} expects {funs[fn]} argument(s), got {n}")
        if isinstance(i, Call):
            if len(set(i.args)) != len(i.args):
                diags.append(f"{loc}{ctx}: repeated actual in call {i.name}")
            d = prog.procs.get(i.name)
            if d is None:
                diags.append(f"{loc}{ctx}: undefined procedure {i.name}")
            elif len(d.formals) != len(i.args):
                diags.append(f"{loc}{ctx}: {i.name} expects {len(d.formals)} process(es), "
                             f"got {len(i.args)}")
        if allowed is not None and not isinstance(i, Cond):
            extra = pn_instr(i) - allowed
            if extra:
                diags.append(f"{loc}{ctx}: process(es) {', '.join(sorted(extra))} "
                             f"not among the formals")


def validate_program(prog: Program, extra_externs: Iterable = ()) -> list[str]:
    """Return diagnostics for well-formedness violations; empty means ok."""
    funs = dict(BUILTINS)
    for ext in (*prog.externs, *extra_externs):
        funs[ext.name] = ext.arity
    diags: list[str] = []
    for name, d in prog.procs.items():
        ctx = f"proc {name}"
        if len(set(d.formals)) != len(d.formals):
            diags.append(f"{_where(d)}{ctx}: repeated formal parameter")
        _check_chor(d.body, prog, funs, ctx, frozenset(d.formals), diags)
    _check_chor(prog.main, prog, funs, "main", None, diags)
    return diags
