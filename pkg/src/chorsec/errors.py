from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Span:
    line: int
    col: int

    def __str__(self) -> str:
        return f"{self.line}:{self.col}"


class ChorError(Exception):
    """Base class for every error raised by chorsec."""


class PolicyError(ChorError):
    pass


class ParseError(ChorError):
    def __init__(self, message: str, span: Span):
        super().__init__(f"{span}: {message}")
        self.message = message
        self.span = span


class ValidationError(ChorError):
    def __init__(self, diagnostics: list[str]):
        super().__init__("\n".join(diagnostics))
        self.diagnostics = diagnostics


class EvalError(ChorError):
    pass


class StuckError(ChorError):
    pass


class InferError(ChorError):
    pass
