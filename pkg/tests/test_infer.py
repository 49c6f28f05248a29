import random
import time

import pytest

from chorsec.errors import InferError
from chorsec.infer import (
    ETA, Constraint, DeltaContext, Loc, bound_of_expr, delta_member, eval_bound,
    gen_constraints, lfp, phi, universe_size,
)
from chorsec.lattice import Policy
from chorsec.parser import parse_expr, parse_program
from chorsec.randgen import random_program, two_point

REC = "proc X(p, q) { if p.c then { q.z := 1; X(p, q) } else { skip } } main { X(a, b) }"


def k(*atoms, target):
    bound = frozenset(ETA if a == "eta" else Loc(*a.split(".")) for a in atoms)
    return Constraint(bound, Loc(*target.split(".")))


def body(src, name="X"):
    return parse_program(src).procs[name].body


def test_bound_of_expr():
    assert bound_of_expr("p", parse_expr("5")) == frozenset()
    assert bound_of_expr("s", parse_expr("email")) == {Loc("s", "email")}
    assert bound_of_expr("p", parse_expr("f(x, g(y, 1))")) == {Loc("p", "x"), Loc("p", "y")}


def test_eval_bound(pw_policy):
    assert eval_bound(frozenset(), pw_policy, "Low") == "Low"
    assert eval_bound({ETA}, pw_policy, "High") == "High"
    assert eval_bound({Loc("s", "email"), ETA}, pw_policy, "Low") == "High"


def test_constraint_text():
    c = k("p.c", "eta", target="q.z")
    assert str(c) == "{p.c ⊔ η} ⊑ q.z"
    assert c.ascii() == "p.c | pc <= q.z"
    assert k(target="q.z").ascii() == "bot <= q.z"


def test_gen_com_and_cond():
    d = DeltaContext({}, {})
    assert gen_constraints(body("proc X(p, q) { p.x -> q.y } main { }"), {ETA}, d) == {
        k("p.x", "eta", target="q.y")}
    src = "proc X(p, q) { if p.c then { q.z := 1 } else { skip } } main { }"
    assert gen_constraints(body(src), {ETA}, d) == {k("eta", "p.c", target="q.z")}
    assert gen_constraints(body("proc X(p, q) { p -> q[L] } main { }"), {ETA}, d) == set()


def test_gen_forwards_call_constraints():
    delta = DeltaContext({"X": frozenset({k("p.x", "eta", target="q.y")})}, {"X": ("p", "q")})
    pcb = {ETA, Loc("a", "c")}
    out = gen_constraints(parse_program("main { X(a, b) }").main, pcb, delta)
    assert out == {k("a.x", "eta", "a.c", target="b.y")}


def test_gen_unknown_callee():
    with pytest.raises(InferError):
        gen_constraints(parse_program("main { Z(a) }").main, {ETA}, DeltaContext({}, {}))


def test_renaming_precedes_eta_substitution():
    prog = parse_program("proc Y(p, q) { p.x -> q.y } "
                         "proc X(p, q) { if p.c then { Y(q, p) } else { skip } } main { }")
    assert lfp(prog)["X"] == {k("p.c", "q.x", "eta", target="p.y")}


def test_recursive_example():
    prog = parse_program(REC)
    d = lfp(prog)
    assert d["X"] == {k("eta", "p.c", target="q.z")}
    assert d.iterations == 2
    assert d.format() == ["X: p.c | pc <= q.z"]
    assert phi(prog, DeltaContext.empty(prog))["X"] == {k("eta", "p.c", target="q.z")}


def test_mutual_recursion():
    prog = parse_program("proc X(p, q) { p.a -> q.b; Y(q, p) } "
                         "proc Y(p, q) { p.c -> q.d; X(q, p) } main { }")
    d = lfp(prog)
    assert d["X"] == {k("p.a", "eta", target="q.b"), k("q.c", "eta", target="p.d")}
    assert d["Y"] == {k("p.c", "eta", target="q.d"), k("q.a", "eta", target="p.b")}
    assert d.iterations == 3


def test_call_free_and_empty():
    assert lfp(parse_program("proc A(p) { p.x := 1 } main { }")).iterations == 1
    assert lfp(parse_program("main { }")).iterations == 1


def test_delta_member():
    prog = parse_program(REC)
    d = lfp(prog)
    lat = two_point()
    hi = Policy(lat, "Low", {("p", "c"): "High", ("q", "z"): "High"})
    lo = Policy(lat, "Low", {("p", "c"): "High", ("q", "z"): "Low"})
    assert delta_member(d, "X", "Low", hi)
    assert not delta_member(d, "X", "Low", lo)
    assert delta_member(d, "X", "High", Policy(lat, "Low", {("a", "c"): "High", ("b", "z"): "High"}),
                        {"p": "a", "q": "b"})
    empty = DeltaContext({"E": frozenset()}, {"E": ("p",)})
    assert delta_member(empty, "E", "High", lo)


@pytest.mark.parametrize("seed", range(60))
def test_lfp_is_a_fixed_point(seed):
    prog = random_program(seed)
    start = time.perf_counter()
    d = lfp(prog)
    assert time.perf_counter() - start < 1.0
    assert phi(prog, d) == d
    assert d.iterations <= universe_size(prog) + 1
    for name, cs in d.constraints.items():
        formals = set(prog.procs[name].formals)
        assert all(c.target.proc in formals for c in cs)
        assert all(a is ETA or a.proc in formals for c in cs for a in c.bound)


def test_phi_monotone_sample():
    rng = random.Random(1)
    for seed in range(50):
        prog = random_program(seed)
        top = lfp(prog)
        small = top.replace({x: frozenset(c for c in cs if rng.random() < 0.5)
                             for x, cs in top.constraints.items()})
        assert small.issubset(top)
        assert phi(prog, small).issubset(phi(prog, top))
