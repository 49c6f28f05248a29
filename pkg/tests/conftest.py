from __future__ import annotations

from pathlib import Path

import pytest

from chorsec.lattice import Lattice, Policy, parse_policy
from chorsec.parser import parse_program

SAMPLES = Path(__file__).resolve().parent.parent / "samples"

ACCEPTANCE_LINES: list[str] = []


def sample(name: str) -> Path:
    return SAMPLES / name


@pytest.fixture
def pw_policy() -> Policy:
    return parse_policy(sample("password.policy").read_text())


@pytest.fixture
def insecure():
    return parse_program(sample("password_insecure.chor").read_text())


@pytest.fixture
def secure():
    return parse_program(sample("password_secure.chor").read_text())


@pytest.fixture
def chain() -> Lattice:
    return Lattice.chain("Low", "High")


@pytest.fixture
def diamond_lat() -> Lattice:
    return Lattice.build(["Low", "A", "B", "Top"], "Low",
                         [("Low", "A"), ("Low", "B"), ("A", "Top"), ("B", "Top")])


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
