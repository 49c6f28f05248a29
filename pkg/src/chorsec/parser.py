"""Concrete syntax for ``.chor`` files and a pretty-printer that round-trips."""

from __future__ import annotations

import re
from dataclasses import dataclass

from chorsec.errors import ChorError, ParseError, Span
from chorsec.lattice import ExternDecl
from chorsec.syntax import (
    Assign, Call, Chor, Com, Cond, Const, Expr, FunCall, ProcDef, Program, RtCall,
    Sel, Var,
)

KEYWORDS = {"main", "proc", "extern", "if", "then", "else", "skip", "true", "false"}

_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r\n]+|//[^\n]*|\#[^\n]*)
  | (?P<string>"(?:[^"\\\n]|\\.)*")
  | (?P<int>-?[0-9]+)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>->|:=|[.\[\](),;{}])
""", re.VERBOSE)

_ESCAPES = {"\\": "\\", '"': '"', "n": "\n", "t": "\t"}


@dataclass(frozen=True)
class Token:
    kind: str  # name | kw | int | string | op | eof
    text: str
    span: Span


def tokenize(text: str) -> list[Token]:
    toks: list[Token] = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        span = Span(line, pos - line_start + 1)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", span)
        kind = m.lastgroup
        lexeme = m.group()
        if kind == "name" and lexeme in KEYWORDS:
            kind = "kw"
        if kind != "ws":
            toks.append(Token(kind, lexeme, span))
        nl = lexeme.count("\n")
        if nl:
            line += nl
            line_start = pos + lexeme.rindex("\n") + 1
        pos = m.end()
    toks.append(Token("eof", "", Span(line, pos - line_start + 1)))
    return toks


def _unescape(lexeme: str, span: Span) -> str:
    out, i, body = [], 0, lexeme[1:-1]
    while i < len(body):
        ch = body[i]
        if ch == "\\":
            nxt = body[i + 1]
            if nxt not in _ESCAPES:
                raise ParseError(f"bad escape \\{nxt}", span)
            out.append(_ESCAPES[nxt])
            i += 2
        else:
            out.append(ch)
            i += 1
    return "".join(out)


class _Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.pos = 0

    @property
    def tok(self) -> Token:
        return self.toks[self.pos]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.pos + k, len(self.toks) - 1)]

    def at(self, text: str, k: int = 0) -> bool:
        t = self.peek(k)
        return t.kind in ("op", "kw") and t.text == text

    def error(self, what: str) -> ParseError:
        t = self.tok
        found = "end of input" if t.kind == "eof" else repr(t.text)
        return ParseError(f"expected {what}, found {found}", t.span)

    def expect(self, text: str) -> Token:
        if not self.at(text):
            raise self.error(repr(text))
        t = self.tok
        self.pos += 1
        return t

    def name(self) -> str:
        if self.tok.kind != "name":
            raise self.error("a name")
        t = self.tok
        self.pos += 1
        return t.text

    def program(self) -> Program:
        externs, procs = [], {}
        while self.at("extern"):
            self.expect("extern")
            name = self.name()
            if self.tok.kind != "int" or self.tok.text.startswith("-"):
                raise self.error("an arity")
            arity = int(self.tok.text)
            self.pos += 1
            if self.tok.kind != "name" or self.tok.text not in ("bool", "int", "string"):
                raise self.error("bool, int or string")
            externs.append(ExternDecl(name, arity, self.tok.text))
            self.pos += 1
        while self.at("proc"):
            span = self.expect("proc").span
            name = self.name()
            if name in procs:
                raise ParseError(f"duplicate procedure {name}", span)
            self.expect("(")
            formals = [self.name()]
            while self.at(","):
                self.pos += 1
                formals.append(self.name())
            self.expect(")")
            procs[name] = ProcDef(name, tuple(formals), self.block(), span)
        self.expect("main")
        main = self.block()
        if self.tok.kind != "eof":
            raise ParseError(f"trailing input {self.tok.text!r}", self.tok.span)
        return Program(tuple(externs), procs, main)

    def block(self) -> Chor:
        self.expect("{")
        if self.at("skip"):
            self.pos += 1
            self.expect("}")
            return ()
        out = []
        if not self.at("}"):
            out.append(self.instr())
            while self.at(";"):
                self.pos += 1
                if self.at("}"):
                    break
                out.append(self.instr())
        self.expect("}")
        return tuple(out)

    def instr(self):
        span = self.tok.span
        if self.at("if"):
            self.pos += 1
            p = self.name()
            self.expect(".")
            guard = self.expr()
            self.expect("then")
            c1 = self.block()
            self.expect("else")
            c2 = self.block()
            return Cond(p, guard, c1, c2, span)
        p = self.name()
        if self.at("("):
            self.pos += 1
            args = [self.name()]
            while self.at(","):
                self.pos += 1
                args.append(self.name())
            self.expect(")")
            return Call(p, tuple(args), span)
        if self.at("->"):
            self.pos += 1
            q = self.name()
            self.expect("[")
            lab = self.name()
            self.expect("]")
            return Sel(p, q, lab, span)
        if not self.at("."):
            raise self.error("'.', '->' or '('")
        self.pos += 1
        if self.tok.kind == "name" and self.at(":=", 1):
            x = self.name()
            self.pos += 1
            return Assign(p, x, self.expr(), span)
        e = self.expr()
        self.expect("->")
        q = self.name()
        self.expect(".")
        return Com(p, e, q, self.name(), span)

    def expr(self) -> Expr:
        t = self.tok
        match t.kind:
            case "int":
                n = int(t.text)
                if not -(1 << 63) <= n < (1 << 63):
                    raise ParseError(f"integer {t.text} out of 64-bit range", t.span)
                self.pos += 1
                return Const(n)
            case "string":
                self.pos += 1
                return Const(_unescape(t.text, t.span))
            case "kw" if t.text in ("true", "false"):
                self.pos += 1
                return Const(t.text == "true")
            case "name":
                self.pos += 1
                if not self.at("("):
                    return Var(t.text)
                self.pos += 1
                args = []
                if not self.at(")"):
                    args.append(self.expr())
                    while self.at(","):
                        self.pos += 1
                        args.append(self.expr())
                self.expect(")")
                return FunCall(t.text, tuple(args))
        raise self.error("an expression")


def parse_program(text: str) -> Program:
    return _Parser(text).program()


def parse_expr(text: str) -> Expr:
    p = _Parser(text)
    e = p.expr()
    if p.tok.kind != "eof":
        raise ParseError(f"trailing input {p.tok.text!r}", p.tok.span)
    return e


# -- printing ----------------------------------------------------------------

def format_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    body = v.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n").replace("\t", "\\t")
    return f'"{body}"'


def format_expr(e: Expr) -> str:
    match e:
        case Const(v):
            return format_value(v)
        case Var(x):
            return x
        case FunCall(fn, args):
            return f"{fn}({', '.join(map(format_expr, args))})"
    raise TypeError(e)


def format_instr(i, indent: int = 0) -> str:
    match i:
        case Com(p, e, q, x):
            return f"{p}.{format_expr(e)} -> {q}.{x}"
        case Sel(p, q, lab):
            return f"{p} -> {q}[{lab}]"
        case Assign(p, x, e):
            return f"{p}.{x} := {format_expr(e)}"
        case Cond(p, e, c1, c2):
            return (f"if {p}.{format_expr(e)} then {format_block(c1, indent, True)}"
                    f" else {format_block(c2, indent, True)}")
        case Call(name, args):
            return f"{name}({', '.join(args)})"
        case RtCall():
            raise ChorError("runtime call terms have no concrete syntax")
    raise TypeError(i)


def format_block(c: Chor, indent: int = 0, skip: bool = False) -> str:
    if not c:
        return "{ skip }" if skip else "{ }"
    pad = "  " * (indent + 1)
    body = ";\n".join(pad + format_instr(i, indent + 1) for i in c)
    return "{\n" + body + "\n" + "  " * indent + "}"


def pretty_print(prog: Program) -> str:
    lines = [f"extern {x.name} {x.arity} {x.result}" for x in prog.externs]
    for d in prog.procs.values():
        lines.append(f"proc {d.name}({', '.join(d.formals)}) {format_block(d.body, 0, True)}")
    lines.append(f"main {format_block(prog.main)}")
    return "\n".join(lines) + "\n"
