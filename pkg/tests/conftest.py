from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings

from normsched.instances import make_jp
from normsched.timeline import BlockPartition, Instance

settings.register_profile(
    "default", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

F = Fraction


def part(events, xi):
    """Partition from plain numbers/strings: ``part([0, "3/2"], [{0: 1}])``."""
    return BlockPartition(tuple(F(e) for e in events), tuple({j: F(v) for j, v in b.items()} for b in xi))


def independent(*releases):
    return Instance.from_lists(list(releases), [None] * len(releases))


@pytest.fixture
def j0():
    return make_jp(0)


@pytest.fixture
def p0_partition():
    """Three unit jobs in [0, 3/2], then a_4 in [3/2, 5/2]."""
    return part([0, "3/2", "5/2"], [{0: 1, 1: 1, 2: 1}, {3: 1}])


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import ACCEPTANCE_LINES

    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
