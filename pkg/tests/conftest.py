from pathlib import Path

import pytest

from socert.problem import build_problem, load_problem

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


@pytest.fixture(scope="session")
def ex1():
    return load_problem(FIXTURES / "ex1.json")


@pytest.fixture(scope="session")
def lvp():
    return load_problem(FIXTURES / "lvp.json")


@pytest.fixture(scope="session")
def counterexample():
    return load_problem(FIXTURES / "counterexample.json")


@pytest.fixture(scope="session")
def fixtures_dir():
    return FIXTURES


def piecewise_square():
    """x^2 for x >= 0 and -x^2 otherwise."""
    return build_problem(1, ["if x1 >= 0 then x1^2 else -(x1^2)"], [], [[-2, 2]])


ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])
