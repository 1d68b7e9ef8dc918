import numpy as np
import pytest

from cutforge.circuit import circuit


@pytest.fixture
def bell():
    return circuit(2, [("h", (0,)), ("cx", (0, 1))], "bell")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def product_inputs():
    """16 two-qubit product states built from Z, X and Y eigenstates (tomographically complete)."""
    st = [np.array([1, 0]), np.array([0, 1]), np.array([1, 1]) / 2**0.5, np.array([1, 1j]) / 2**0.5]
    dms = [np.outer(v, v.conj()) for v in st]
    return [np.kron(a, b) for a in dms for b in dms], dms


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def criterion():
    """Record one PASS/FAIL line per criterion; lines are echoed in the terminal summary."""

    def record(num, title, ok, detail=""):
        line = f"criterion {num}: {'PASS' if ok else 'FAIL'}  {title}" + (f"  [{detail}]" if detail else "")
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
