import numpy as np
import pytest
from hypothesis import settings

from vilenkin_lab.group import GroupSpec

settings.register_profile("lab", max_examples=40, deadline=None)
settings.load_profile("lab")

SMALL_SPECS = [(2, 2), (3, 2), (2, 2, 2), (3, 2, 3), (2, 3, 4), (4, 4), (2, 2, 2, 2, 2)]


@pytest.fixture(params=SMALL_SPECS, ids=lambda m: "m" + "".join(map(str, m)))
def spec(request):
    return GroupSpec(request.param)


@pytest.fixture
def rng():
    return np.random.default_rng(20261016)


def random_signal(rng, spec, batch=()):
    shape = tuple(batch) + (spec.size,)
    return rng.normal(size=shape) + 1j * rng.normal(size=shape)


# one verdict line per acceptance criterion, echoed in the terminal summary
CRITERIA_LINES: list[str] = []


def report_line(line: str) -> None:
    print(line)
    CRITERIA_LINES.append(line)


def pytest_terminal_summary(terminalreporter):
    if CRITERIA_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(CRITERIA_LINES):
            terminalreporter.write_line(line)
