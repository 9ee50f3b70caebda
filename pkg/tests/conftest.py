import sys
from fractions import Fraction

import pytest

from ghostwalk.ghostdet import FinalState
from ghostwalk.spacetime import lattice_instance


def lat(*positions, t):
    """Lattice final-time vertices for the given positions."""
    return tuple((p, t) for p in positions)


def state(survivors=(), ghosts=(), t=0):
    return FinalState(lat(*survivors, t=t), tuple(((a, t), (b, t)) for a, b in ghosts))


@pytest.fixture
def pair_t2():
    return lattice_instance((0, 2), 2)


@pytest.fixture
def half():
    return Fraction(1, 2)


def pytest_terminal_summary(terminalreporter):
    acceptance = sys.modules.get("test_acceptance")
    if acceptance and acceptance.LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(acceptance.LINES.items()):
            terminalreporter.write_line(line)
