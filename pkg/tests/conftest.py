import pytest

from aedes_competition.criterion import homogeneous_spec, patch_spec
from aedes_competition.model import SHARED, SPECIES1, SPECIES2, Habitat

# filled by tests/test_acceptance.py, printed at the end of the session
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def homogeneous():
    return Habitat.constant(2000.0, 500.0)


@pytest.fixture(scope="session")
def two_patch():
    return Habitat.two_patch(2000.0, 300.0, 500.0, 2200.0)


@pytest.fixture(scope="session")
def spec1(homogeneous):
    return homogeneous_spec(SPECIES1, SPECIES2, SHARED, homogeneous.K1, homogeneous.K2, invader=1)


@pytest.fixture(scope="session")
def spec_urban(two_patch):
    return patch_spec(SPECIES1, SPECIES2, SHARED, two_patch, "U")


@pytest.fixture(scope="session")
def spec_forest(two_patch):
    return patch_spec(SPECIES1, SPECIES2, SHARED, two_patch, "F")
