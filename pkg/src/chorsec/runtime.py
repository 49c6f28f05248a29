"""Expression evaluation, the labelled transition system and trace semantics."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Protocol, Union

from chorsec.errors import ChorError, EvalError, StuckError
from chorsec.lattice import ExternDecl
from chorsec.parser import format_value
from chorsec.prng import SplitMix64, hash64
from chorsec.syntax import (
    BUILTINS, Assign, Call, Chor, Com, Cond, Const, Expr, FunCall, ProcDef, Program,
    RtCall, Sel, Value, Var, pn_instr, rename_processes,
)

Store = dict  # dict[str, dict[str, Value]]; never mutated in place


# -- values and stores -------------------------------------------------------

def same_value(a: Value, b: Value) -> bool:
    return type(a) is type(b) and a == b


def value_key(v: Value) -> tuple[int, Value]:
    return ({bool: 0, int: 1, str: 2}[type(v)], v)


def located_items(store: Store) -> Iterator[tuple[tuple[str, str], Value]]:
    for p in sorted(store):
        for x in sorted(store[p]):
            yield (p, x), store[p][x]


def store_key(store: Store) -> tuple:
    return tuple((k, value_key(v)) for k, v in located_items(store))


def stores_equal(s1: Store, s2: Store) -> bool:
    return store_key(s1) == store_key(s2)


def store_set(store: Store, p: str, x: str, v: Value) -> Store:
    out = dict(store)
    out[p] = {**store.get(p, {}), x: v}
    return out


def store_from_items(items: Iterable[tuple[tuple[str, str], Value]]) -> Store:
    out: Store = {}
    for (p, x), v in items:
        out.setdefault(p, {})[x] = v
    return out


_STORE_LINE = re.compile(r"^\s*([A-Za-z_]\w*)\.([A-Za-z_]\w*)\s*=\s*(.+?)\s*$")


def parse_store(text: str) -> Store:
    from chorsec.parser import parse_expr

    items = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        m = _STORE_LINE.match(line)
        if not m:
            raise ChorError(f"store line {lineno}: expected PROC.VAR = VALUE")
        try:
            e = parse_expr(m.group(3))
        except ChorError as exc:
            raise ChorError(f"store line {lineno}: {exc}") from None
        if not isinstance(e, Const):
            raise ChorError(f"store line {lineno}: not a literal value")
        items.append(((m.group(1), m.group(2)), e.value))
    return store_from_items(items)


def format_store(store: Store) -> str:
    return "".join(f"{p}.{x} = {format_value(v)}\n" for (p, x), v in located_items(store))


# -- functions ---------------------------------------------------------------

def _wrap64(n: int) -> int:
    return ((n + (1 << 63)) % (1 << 64)) - (1 << 63)


def _is_int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def _div(a: int, b: int) -> int:
    if b == 0:
        return 0
    q = abs(a) // abs(b)
    return _wrap64(q if (a < 0) == (b < 0) else -q)


# name -> (argument predicate, implementation, neutral result)
_BUILTIN_IMPL = {
    "add": (_is_int, lambda a, b: _wrap64(a + b), 0),
    "sub": (_is_int, lambda a, b: _wrap64(a - b), 0),
    "mul": (_is_int, lambda a, b: _wrap64(a * b), 0),
    "div": (_is_int, _div, 0),
    "and": (lambda v: isinstance(v, bool), lambda a, b: a and b, False),
    "or": (lambda v: isinstance(v, bool), lambda a, b: a or b, False),
    "not": (lambda v: isinstance(v, bool), lambda a: not a, False),
    "concat": (lambda v: isinstance(v, str), lambda a, b: a + b, ""),
}


@dataclass(frozen=True)
class FunEnv:
    """Builtins plus uninterpreted externs, all total and deterministic."""

    externs: Mapping[str, ExternDecl] = field(default_factory=dict)
    seed: int = 0
    strict: bool = False

    @classmethod
    def for_program(cls, prog: Program, extra: Iterable[ExternDecl] = (), seed: int = 0,
                    strict: bool = False) -> FunEnv:
        return cls({x.name: x for x in (*extra, *prog.externs)}, seed, strict)

    def apply(self, fn: str, args: list[Value]) -> Value:
        if fn in BUILTINS:
            if len(args) != BUILTINS[fn]:
                raise EvalError(f"{fn} expects {BUILTINS[fn]} argument(s), got {len(args)}")
            return self._builtin(fn, args)
        ext = self.externs.get(fn)
        if ext is None:
            raise EvalError(f"unknown function {fn}")
        if len(args) != ext.arity:
            raise EvalError(f"{fn} expects {ext.arity} argument(s), got {len(args)}")
        key = f"{fn}({','.join(format_value(a) for a in args)})".encode()
        h = hash64(key, self.seed)
        match ext.result:
            case "bool":
                return bool(h & 1)
            case "int":
                return h & 0xFF
            case _:
                return f"{h & 0xFFFFFFFF:08x}"

    def _builtin(self, fn: str, args: list[Value]) -> Value:
        if fn == "eq":
            return same_value(args[0], args[1])
        if fn in ("lt", "le"):
            a, b = args
            if (_is_int(a) and _is_int(b)) or (isinstance(a, str) and isinstance(b, str)):
                return a < b if fn == "lt" else a <= b
            return self._mismatch(fn, args, False)
        ok, impl, neutral = _BUILTIN_IMPL[fn]
        if not all(ok(a) for a in args):
            return self._mismatch(fn, args, neutral)
        if fn == "div" and args[1] == 0 and self.strict:
            raise EvalError("division by zero")
        return impl(*args)

    def _mismatch(self, fn: str, args: list[Value], neutral: Value) -> Value:
        if self.strict:
            raise EvalError(f"{fn}: ill-typed arguments {', '.join(map(format_value, args))}")
        return neutral


def eval_expr(sigma: Mapping[str, Value], e: Expr, fe: FunEnv) -> Value:
    match e:
        case Const(v):
            return v
        case Var(x):
            try:
                return sigma[x]
            except KeyError:
                raise EvalError(f"unbound variable {x}") from None
        case FunCall(fn, args):
            return fe.apply(fn, [eval_expr(sigma, a, fe) for a in args])
    raise TypeError(e)


def _eval_at(store: Store, p: str, e: Expr, fe: FunEnv) -> Value:
    try:
        return eval_expr(store.get(p, {}), e, fe)
    except EvalError as exc:
        raise EvalError(f"at {p}: {exc}") from None


# -- transition labels -------------------------------------------------------

@dataclass(frozen=True)
class Tau:
    proc: str

    def __str__(self):
        return f"tau@{self.proc}"


@dataclass(frozen=True)
class ComLabel:
    sender: str
    value: Value
    receiver: str

    def __str__(self):
        return f"com@{self.sender}->{self.receiver}:{format_value(self.value)}"


@dataclass(frozen=True)
class SelLabel:
    sender: str
    receiver: str
    label: str

    def __str__(self):
        return f"sel@{self.sender}->{self.receiver}:{self.label}"


@dataclass(frozen=True)
class Then:
    proc: str

    def __str__(self):
        return f"then@{self.proc}"


@dataclass(frozen=True)
class Else:
    proc: str

    def __str__(self):
        return f"else@{self.proc}"


TransitionLabel = Union[Tau, ComLabel, SelLabel, Then, Else]


def pn_label(mu: TransitionLabel) -> frozenset[str]:
    match mu:
        case Tau(p) | Then(p) | Else(p):
            return frozenset((p,))
        case ComLabel(p, _, q) | SelLabel(p, q, _):
            return frozenset((p, q))
    raise TypeError(mu)


# -- small-step semantics ----------------------------------------------------

@dataclass(frozen=True)
class Configuration:
    chor: Chor
    store: Store = field(default_factory=dict)
    procs: Mapping[str, ProcDef] = field(default_factory=dict)


@dataclass(frozen=True)
class _Move:
    path: tuple[int, ...]
    label: TransitionLabel
    pos: int
    replacement: Chor
    store: Store

    def apply(self, chor: Chor) -> Chor:
        return chor[:self.pos] + self.replacement + chor[self.pos + 1:]


def _moves(chor: Chor, store: Store, procs: Mapping[str, ProcDef], fe: FunEnv,
           blocked: frozenset[str] = frozenset()) -> list[_Move]:
    """All transitions of ``chor`` whose label avoids ``blocked``.

    Walking the sequence left to right, the processes of every skipped
    instruction join ``blocked``; that is the delay rule's side condition.
    """
    out: list[_Move] = []
    blocked = set(blocked)
    for j, instr in enumerate(chor):
        here: list[_Move] = []
        match instr:
            case Assign(p, x, e) if p not in blocked:
                v = _eval_at(store, p, e, fe)
                here.append(_Move((j,), Tau(p), j, (), store_set(store, p, x, v)))
            case Com(p, e, q, x) if p not in blocked and q not in blocked:
                v = _eval_at(store, p, e, fe)
                here.append(_Move((j,), ComLabel(p, v, q), j, (), store_set(store, q, x, v)))
            case Sel(p, q, lab) if p not in blocked and q not in blocked:
                here.append(_Move((j,), SelLabel(p, q, lab), j, (), store))
            case Cond(p, e, c1, c2):
                if p not in blocked:
                    v = _eval_at(store, p, e, fe)
                    if v is True:
                        here.append(_Move((j,), Then(p), j, c1, store))
                    else:
                        here.append(_Move((j,), Else(p), j, c2, store))
                inner = frozenset(blocked | {p})
                left = _moves(c1, store, procs, fe, inner)
                right = _moves(c2, store, procs, fe, inner) if left else []
                for a in left:
                    for b in right:
                        if str(a.label) == str(b.label) and stores_equal(a.store, b.store):
                            cond = Cond(p, e, a.apply(c1), b.apply(c2), instr.span)
                            here.append(_Move((j, *a.path, *b.path), a.label, j, (cond,),
                                              a.store))
            case Call(name, args) if name in procs:
                d = procs[name]
                body = rename_processes(d.body, dict(zip(d.formals, args)))
                cont = chor[j + 1:]
                for k, r0 in enumerate(args):
                    if r0 in blocked:
                        continue
                    markers = tuple(RtCall(r, name, args, cont) for r in args if r != r0)
                    here.append(_Move((j, k), Tau(r0), j, markers + body, store))
            case RtCall(r) if r not in blocked:
                here.append(_Move((j,), Tau(r), j, (), store))
        here.sort(key=lambda m: (m.path, str(m.label)))
        out.extend(here)
        blocked |= pn_instr(instr)
    return out


def enabled(cfg: Configuration, fe: FunEnv) -> list[tuple[TransitionLabel, Configuration]]:
    return [(m.label, Configuration(m.apply(cfg.chor), m.store, cfg.procs))
            for m in _moves(cfg.chor, cfg.store, cfg.procs, fe)]


def step(cfg: Configuration, fe: FunEnv,
         choice: int = 0) -> tuple[TransitionLabel, Configuration]:
    if not cfg.chor:
        raise StuckError("terminated")
    succ = enabled(cfg, fe)
    if not succ:
        raise StuckError(f"stuck: no rule applies to {_describe(cfg.chor[0])}")
    if not 0 <= choice < len(succ):
        raise ChorError(f"choice {choice} out of range (0..{len(succ) - 1})")
    return succ[choice]


def _describe(i) -> str:
    if isinstance(i, RtCall):
        return f"{i.proc} : {i.name}({', '.join(i.args)})"
    from chorsec.parser import format_instr
    return format_instr(i)


# -- schedulers --------------------------------------------------------------

class Scheduler(Protocol):
    def choose(self, n: int) -> int: ...


class DeterministicScheduler:
    def choose(self, n: int) -> int:
        return 0


class RandomScheduler:
    def __init__(self, seed: int):
        self.rng = SplitMix64(seed)

    def choose(self, n: int) -> int:
        return self.rng.below(n)


def make_scheduler(kind: str, seed: int = 0) -> Scheduler:
    if kind in ("deterministic", "det"):
        return DeterministicScheduler()
    if kind in ("random", "rand"):
        return RandomScheduler(seed)
    raise ValueError(f"unknown scheduler {kind!r}")


# -- execution ---------------------------------------------------------------

@dataclass(frozen=True)
class Terminated:
    store: Store
    trace: list[TransitionLabel]


@dataclass(frozen=True)
class Cutoff:
    store: Store
    trace: list[TransitionLabel]


@dataclass(frozen=True)
class Stuck:
    store: Store
    trace: list[TransitionLabel]
    diagnostic: str


Outcome = Union[Terminated, Cutoff, Stuck]


def run(cfg: Configuration, fe: FunEnv, scheduler: Scheduler | None = None,
        max_steps: int = 10_000) -> Outcome:
    scheduler = scheduler or DeterministicScheduler()
    chor, store, trace = cfg.chor, cfg.store, []
    while chor:
        if len(trace) >= max_steps:
            return Cutoff(store, trace)
        try:
            moves = _moves(chor, store, cfg.procs, fe)
        except EvalError as exc:
            return Stuck(store, trace, str(exc))
        if not moves:
            return Stuck(store, trace, f"no rule applies to {_describe(chor[0])}")
        m = moves[scheduler.choose(len(moves))]
        chor, store = m.apply(chor), m.store
        trace.append(m.label)
    return Terminated(store, trace)


def derives(cfg: Configuration, fe: FunEnv, trace: list[TransitionLabel],
            final: Store) -> bool:
    """Decide ``cfg`` evaluates to ``final`` along exactly ``trace`` (big-step)."""
    stack = [(cfg, 0)]
    while stack:
        c, i = stack.pop()
        if i == len(trace):
            if not c.chor and stores_equal(c.store, final):
                return True
            continue
        want = str(trace[i])
        stack.extend((nxt, i + 1) for mu, nxt in reversed(enabled(c, fe)) if str(mu) == want)
    return False


def program_config(prog: Program, store: Store | None = None) -> Configuration:
    return Configuration(prog.main, store or {}, prog.procs)
