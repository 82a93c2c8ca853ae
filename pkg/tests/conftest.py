import itertools

import pytest


def all_vectors(p, n, low=0):
    return list(itertools.product(range(low, p), repeat=n))


@pytest.fixture
def vectors():
    return all_vectors


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def criterion():
    """Record one PASS/FAIL line for the acceptance summary, then assert."""

    def record(label: str, ok: bool, detail: str = ""):
        ACCEPTANCE_LINES.append(f"{'PASS' if ok else 'FAIL'}  {label}" + (f"  [{detail}]" if detail else ""))
        assert ok, f"{label}: {detail}"

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
