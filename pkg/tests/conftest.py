import random
import time
from contextlib import contextmanager

import pytest

from matchlab.cli import main
from matchlab.constructions import motivating_example
from matchlab.market import Market, Matching, Preferences


@pytest.fixture(scope="session")
def motivating():
    return motivating_example()


@pytest.fixture
def rng():
    return random.Random(20240601)


@pytest.fixture
def cli(capsys):
    """Run the CLI in-process; returns (exit code, stdout, stderr)."""

    def run(*argv):
        try:
            code = main([str(a) for a in argv])
        except SystemExit as exc:
            code = exc.code
        out = capsys.readouterr()
        return code, out.out, out.err

    return run


def pairs(matching: Matching) -> set:
    return set(matching.pairs())


def random_prefs(rng: random.Random, m: int, n: int, p_drop: float = 0.0) -> Preferences:
    """Random strict lists; each partner is dropped with probability p_drop."""
    fl = [[w for w in rng.sample(range(n), n) if rng.random() >= p_drop] for _ in range(m)]
    wl = [[f for f in rng.sample(range(m), m) if rng.random() >= p_drop] for _ in range(n)]
    return Preferences(fl, wl)


def random_market(rng: random.Random, m: int, n: int) -> Market:
    fu = [rng.sample(range(-m - n, 3 * n + 1), n) for _ in range(m)]
    fu = [[v if v != 0 else 3 * n + 5 + i for i, v in enumerate(row)] for row in fu]
    cols = [rng.sample(range(-m - n, 3 * m + 1), m) for _ in range(n)]
    wu = [[cols[j][i] if cols[j][i] != 0 else 3 * m + 5 + j for j in range(n)] for i in range(m)]
    return Market(fu, wu)


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def criterion():
    """Time a block, record one PASS/FAIL line, and fail if it runs over its limit."""

    @contextmanager
    def run(number: int, title: str, limit_s: float):
        start = time.perf_counter()
        status, note = "FAIL", ""
        try:
            yield
            elapsed = time.perf_counter() - start
            if elapsed < limit_s:
                status = "PASS"
            else:
                note = " (over time limit)"
        finally:
            elapsed = time.perf_counter() - start
            line = f"criterion {number:2d} {status}  {title}  [{elapsed:.2f}s / limit {limit_s:g}s]{note}"
            ACCEPTANCE_LINES.append(line)
            print(line)
        assert status == "PASS", line

    return run


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
