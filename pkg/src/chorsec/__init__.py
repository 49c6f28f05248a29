"""Information-flow type checking, inference and execution for choreographies."""

from chorsec.errors import ChorError, ParseError, PolicyError
from chorsec.harness import nitest
from chorsec.infer import DeltaContext, lfp
from chorsec.lattice import Lattice, Policy, parse_policy
from chorsec.parser import parse_program, pretty_print
from chorsec.runtime import FunEnv, enabled, run, step
from chorsec.typecheck import check_chor, check_program

__all__ = [
    "ChorError", "DeltaContext", "FunEnv", "Lattice", "ParseError", "Policy", "PolicyError",
    "check_chor", "check_program", "enabled", "lfp", "nitest", "parse_policy",
    "parse_program", "pretty_print", "run", "step",
]
