import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from reference import LATTICE  # noqa: E402
from rosdist.dist import get_spectrum  # noqa: E402


@pytest.fixture(scope="session")
def spec50():
    """Converged 50-term spectra keyed by D."""
    cache = {}

    def get(D):
        if D not in cache:
            cache[D] = get_spectrum(D, 50)
        return cache[D]

    return get


@pytest.fixture(scope="session")
def lattice():
    return LATTICE


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])
