import pytest

from fup2d.cantor import Alphabet2D


@pytest.fixture
def diag3():
    return Alphabet2D(3, tuple((t, t) for t in range(3)))


@pytest.fixture
def antidiag3():
    return Alphabet2D(3, tuple((t, 2 - t) for t in range(3)))


@pytest.fixture
def column3():
    return Alphabet2D(3, tuple((0, t) for t in range(3)))


@pytest.fixture
def row3():
    return Alphabet2D(3, tuple((t, 0) for t in range(3)))


@pytest.fixture
def carpet():
    return Alphabet2D(3, tuple((a, b) for a in range(3) for b in range(3) if (a, b) != (1, 1)))


@pytest.fixture
def slope_two():
    # the six cells crossed by the slope-2 line through the origin
    return Alphabet2D(3, ((0, 0), (0, 1), (1, 2), (1, 0), (2, 1), (2, 2)))


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    if mod and mod.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(mod.RESULTS, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
