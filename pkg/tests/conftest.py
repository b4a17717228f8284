import pytest

from polyharm.builder import construct
from polyharm.classifier import ProblemParams
from polyharm.kernels import RieszPower

ACCEPTANCE_LINES: list[str] = []

_cache: dict = {}


def build(N, m, alpha, p, q):
    key = (N, m, alpha, p, q)
    if key not in _cache:
        _cache[key] = construct(ProblemParams(N, m, "plus", RieszPower(alpha), p, q))
    return _cache[key]


@pytest.fixture(scope="session")
def cons5():
    return build(5, 1, 2.0, 2.0, 2.0)


@pytest.fixture(scope="session")
def cons9():
    return build(9, 2, 3.0, 3.0, 3.0)


@pytest.fixture
def acceptance():
    """Record one pass/fail line per criterion; returns the verdict for asserting."""
    def record(number: int, passed: bool, detail: str) -> bool:
        line = f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return passed
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
