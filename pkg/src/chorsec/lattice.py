"""Finite security lattices, flow policies and low-equivalence of stores."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Iterable, Mapping

from chorsec.errors import PolicyError

Label = str


@dataclass(frozen=True)
class Lattice:
    """A finite join-semilattice with bottom.

    ``order`` holds the reflexive-transitive closure as (lower, upper) pairs.
    """

    elements: tuple[Label, ...]
    bottom: Label
    order: frozenset[tuple[Label, Label]]
    join_table: Mapping[tuple[Label, Label], Label] = field(compare=False, repr=False)

    @classmethod
    def build(cls, elements: Iterable[Label], bottom: Label,
              edges: Iterable[tuple[Label, Label]]) -> Lattice:
        elems: list[Label] = []
        for e in elements:
            if e in elems:
                raise PolicyError(f"duplicate element {e}")
            elems.append(e)
        known = set(elems)
        if bottom not in known:
            raise PolicyError(f"unknown label {bottom} in bottom")
        closure = {(e, e) for e in elems}
        for a, b in edges:
            for x in (a, b):
                if x not in known:
                    raise PolicyError(f"unknown label {x} in leq")
            closure.add((a, b))
        # Warshall
        for k in elems:
            for i in elems:
                if (i, k) not in closure:
                    continue
                for j in elems:
                    if (k, j) in closure:
                        closure.add((i, j))
        for a, b in closure:
            if a != b and (b, a) in closure:
                raise PolicyError(f"cycle between {a} and {b}")
        for e in elems:
            if (bottom, e) not in closure:
                raise PolicyError(f"bottom not below {e}")
        table: dict[tuple[Label, Label], Label] = {}
        for a, b in product(elems, repeat=2):
            ups = [u for u in elems if (a, u) in closure and (b, u) in closure]
            minimal = [u for u in ups
                       if not any(v != u and (v, u) in closure for v in ups)]
            if len(minimal) != 1:
                raise PolicyError(f"no unique join for {a} and {b}")
            table[a, b] = minimal[0]
        return cls(tuple(elems), bottom, frozenset(closure), table)

    @classmethod
    def chain(cls, *names: Label) -> Lattice:
        return cls.build(names, names[0], zip(names, names[1:]))

    def _check(self, *labels: Label) -> None:
        for x in labels:
            if x not in self.elements:
                raise PolicyError(f"unknown label {x}")

    def leq(self, a: Label, b: Label) -> bool:
        self._check(a, b)
        return (a, b) in self.order

    def join(self, a: Label, b: Label) -> Label:
        self._check(a, b)
        return self.join_table[a, b]

    def join_all(self, labels: Iterable[Label]) -> Label:
        out = self.bottom
        for x in labels:
            out = self.join(out, x)
        return out


def leq(lat: Lattice, a: Label, b: Label) -> bool:
    return lat.leq(a, b)


def join(lat: Lattice, a: Label, b: Label) -> Label:
    return lat.join(a, b)


@dataclass(frozen=True)
class ExternDecl:
    name: str
    arity: int
    result: str  # bool | int | string


@dataclass(frozen=True)
class Policy:
    lattice: Lattice
    low: Label
    labels: Mapping[tuple[str, str], Label]
    default_label: Label | None = None
    externs: tuple[ExternDecl, ...] = ()

    def __post_init__(self) -> None:
        self.lattice._check(self.low, *self.labels.values())
        if self.default_label is not None:
            self.lattice._check(self.default_label)

    def label_of(self, proc: str, var: str) -> Label:
        try:
            return self.labels[proc, var]
        except KeyError:
            if self.default_label is None:
                raise PolicyError(f"unlabelled variable {proc}.{var}") from None
            return self.default_label

    def observable(self, proc: str, var: str) -> bool:
        return self.lattice.leq(self.label_of(proc, var), self.low)

    def with_labels(self, labels: Mapping[tuple[str, str], Label]) -> Policy:
        return Policy(self.lattice, self.low, dict(labels), self.default_label, self.externs)


def label_of(pol: Policy, proc: str, var: str) -> Label:
    return pol.label_of(proc, var)


def parse_policy(text: str) -> Policy:
    """Parse the line-oriented policy format (``element``, ``leq``, ``label`` ...)."""
    elements: list[str] = []
    edges: list[tuple[str, str]] = []
    bottom = low = default = None
    labels: dict[tuple[str, str], str] = {}
    externs: list[ExternDecl] = []

    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].split()
        if not line:
            continue
        kw, args = line[0], line[1:]

        def want(n: int) -> None:
            if len(args) != n:
                raise PolicyError(f"line {lineno}: '{kw}' expects {n} argument(s)")

        match kw:
            case "element":
                want(1)
                if args[0] in elements:
                    raise PolicyError(f"line {lineno}: duplicate element {args[0]}")
                elements.append(args[0])
            case "bottom":
                want(1)
                bottom = args[0]
            case "leq":
                want(2)
                edges.append((args[0], args[1]))
            case "low":
                want(1)
                low = args[0]
            case "default":
                want(1)
                default = args[0]
            case "label":
                want(2)
                proc, dot, var = args[0].partition(".")
                if not dot or not proc or not var:
                    raise PolicyError(f"line {lineno}: expected PROC.VAR, got {args[0]}")
                labels[proc, var] = args[1]
            case "extern":
                want(3)
                if args[2] not in ("bool", "int", "string") or not args[1].isdigit():
                    raise PolicyError(f"line {lineno}: malformed extern")
                externs.append(ExternDecl(args[0], int(args[1]), args[2]))
            case _:
                raise PolicyError(f"line {lineno}: unknown directive {kw}")

    if bottom is None:
        raise PolicyError("missing bottom")
    if low is None:
        raise PolicyError("missing low")
    lat = Lattice.build(elements, bottom, edges)
    for what, lab in [("low", low), ("default", default), *(
            (f"label {p}.{x}", l) for (p, x), l in labels.items())]:
        if lab is not None and lab not in lat.elements:
            raise PolicyError(f"unknown label {lab} in {what}")
    return Policy(lat, low, labels, default, tuple(externs))


def low_equiv(pol: Policy, s1, s2) -> bool:
    """True iff the two stores agree on every variable visible at ``pol.low``."""
    from chorsec.runtime import located_items, same_value

    d1, d2 = dict(located_items(s1)), dict(located_items(s2))
    if d1.keys() != d2.keys():
        raise PolicyError("stores have different domains")
    return all(same_value(v, d2[k]) for k, v in d1.items() if pol.observable(*k))
