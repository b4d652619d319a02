import numpy as np
import pytest

from matprod_anytime.streams import FiniteSupport

A1 = np.array([[2.0, 1.0], [1.0, 1.0]])
A2 = np.array([[0.5, 0.0], [0.0, 1.5]])


def random_psd(rng, d, rank=None):
    G = rng.normal(size=(d, rank or d))
    return G @ G.T / (rank or d)


@pytest.fixture
def scalar_02():
    """X in {0, 2} equiprobable, Sigma = 1."""
    return FiniteSupport([[[0.0]], [[2.0]]], [0.5, 0.5])


@pytest.fixture
def noncommuting_pair():
    return FiniteSupport([A1, A2], [0.5, 0.5])


_VERDICTS: list[str] = []


@pytest.fixture(scope="session")
def verdict():
    """Record one PASS/FAIL line for an acceptance check, then assert it."""

    def record(label: str, ok: bool, detail: str) -> None:
        line = f"{'PASS' if ok else 'FAIL'}  {label}: {detail}"
        _VERDICTS.append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if _VERDICTS:
        terminalreporter.section("acceptance")
        for line in _VERDICTS:
            terminalreporter.write_line(line)
