import warnings

import numpy as np
import pytest

warnings.filterwarnings("ignore", message=".*TBB.*")

from uweno.mesh import generate_mesh  # noqa: E402

KINDS = ("regular-quad", "perturbed-quad", "regular-tri", "perturbed-tri")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def small_meshes():
    """One small non-periodic mesh of each kind on the unit square."""
    return {k: generate_mesh(k, 8, 8, (0.0, 1.0, 0.0, 1.0), seed=3) for k in KINDS}


@pytest.fixture(scope="session")
def periodic_meshes():
    return {k: generate_mesh(k, 8, 8, (0.0, 2.0, 0.0, 2.0), seed=5, periodic=(True, True))
            for k in KINDS}


def pytest_terminal_summary(terminalreporter):
    import sys
    for name, mod in list(sys.modules.items()):
        if name.endswith("test_acceptance") and getattr(mod, "RESULTS", None):
            terminalreporter.section("acceptance criteria")
            for n in sorted(mod.RESULTS):
                terminalreporter.write_line(mod.RESULTS[n])
