import pytest

from chorsec.errors import ChorError
from chorsec.lattice import ExternDecl
from chorsec.parser import parse_program
from chorsec.syntax import (
    Assign, Call, Com, Cond, Const, FunCall, Program, RtCall, Sel, Var, graft, located_vars,
    pn, pn_instr, rename_processes, validate_program,
)


def test_const_equality_is_type_sensitive():
    assert Const(1) != Const(True)
    assert Const(0) != Const(False)
    assert len({Const(1), Const(True)}) == 2
    assert Const("a") == Const("a")


def test_spans_do_not_affect_equality():
    a = parse_program("main { p.x := 1 }")
    b = parse_program("\n\n   main {\n p.x   :=  1 }")
    assert a == b
    assert a.main[0].span != b.main[0].span


def test_pn():
    c = (Com("s", Var("email"), "m", "email"), Sel("p", "q", "L"),
         Cond("r", Var("g"), (Assign("t", "x", Const(1)),), ()), Call("X", ("u", "v")))
    assert pn(c) == {"s", "m", "p", "q", "r", "t", "u", "v"}
    assert pn_instr(RtCall("a", "X", ("a", "b"), ())) == {"a"}
    assert pn(()) == frozenset()


def test_graft():
    a, b = (Assign("p", "x", Const(1)),), (Assign("q", "y", Const(2)),)
    assert graft(a, b) == a + b
    assert graft((), b) == b
    assert graft(a, ()) == a


def test_rename_processes():
    body = parse_program("proc X(p, q) { p.v -> q.w; if p.c then { q -> p[L] } else { skip };"
                         " X(q, p) } main { }").procs["X"].body
    out = rename_processes(body, {"p": "a", "q": "b"})
    assert pn(out) == {"a", "b"}
    assert out[0] == Com("a", Var("v"), "b", "w")
    assert out[2] == Call("X", ("b", "a"))
    # simultaneous swap
    assert rename_processes(body, {"p": "q", "q": "p"})[0] == Com("q", Var("v"), "p", "w")
    with pytest.raises(ChorError, match="non-injective"):
        rename_processes(body, {"p": "a", "q": "a"})


def test_located_vars_follow_calls():
    prog = parse_program("proc X(p, q) { p.v -> q.w; Y(q) } proc Y(r) { r.k := add(k, 1) }"
                         " main { X(a, b) }")
    assert located_vars(prog) == {("a", "v"), ("b", "w"), ("b", "k")}


@pytest.mark.parametrize("src, msg", [
    ("proc X(p) { q.x := 1 } main { }", "q not among the formals"),
    ("main { Y(a) }", "undefined procedure Y"),
    ("proc X(p, q) { skip } main { X(a) }", "expects 2 process(es), got 1"),
    ("proc X(p, q) { skip } main { X(a, a) }", "repeated actual"),
    ("proc X(p, p) { skip } main { }", "repeated formal"),
    ("main { p.x -> p.y }", "communicates with itself"),
    ("main { p -> p[L] }", "communicates with itself"),
    ("main { p.x := frob(1) }", "unknown function frob"),
    ("main { p.x := add(1) }", "add expects 2 argument(s), got 1"),
    ("proc X(p) { if p.c then { q.x := 1 } else { skip } } main { }", "q not among"),
])
def test_validation_diagnostics(src, msg):
    diags = validate_program(parse_program(src))
    assert any(msg in d for d in diags), diags


def test_validation_accepts_well_formed(secure, insecure):
    assert validate_program(secure) == []
    assert validate_program(insecure) == []
    prog = parse_program("main { p.x := exists(y) }")
    assert validate_program(prog)
    assert validate_program(prog, [ExternDecl("exists", 1, "bool")]) == []


def test_validation_rejects_runtime_terms():
    prog = Program((), {}, (RtCall("a", "X", ("a",), ()),))
    assert any("runtime call" in d for d in validate_program(prog))


def test_diagnostics_carry_positions():
    diags = validate_program(parse_program("main {\n  p.x := 1;\n  Q(a)\n}"))
    assert diags == ["3:3: main: undefined procedure Q"]


def test_nested_funcall_vars():
    prog = parse_program("main { p.x := f(x, g(y, 1)) }")
    assert prog.main[0].expr == FunCall("f", (Var("x"), FunCall("g", (Var("y"), Const(1)))))
