import numpy as np
import pytest

from oddform.heisenberg import delta_max
from oddform.ring import make_ctx, preset
from oddform.subgroup_engine import closure, full_eu_generators


@pytest.fixture(scope="session")
def f2():
    return preset("F2")


@pytest.fixture(scope="session")
def z4():
    return preset("Z4")


@pytest.fixture(scope="session")
def g3():
    return preset("G3")


@pytest.fixture(scope="session")
def z4_lam3():
    """Z/4 with lambda = 3 and mu = 0."""
    return preset("Z4", lam="3", mu="0")


@pytest.fixture(scope="session")
def f2_full_eu(f2):
    """EU_7(F_2, Delta_max) enumerated once per session."""
    D = delta_max(f2)
    return closure(f2, full_eu_generators(f2, D))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def corrupted_ctx():
    """Z/4 with lambda = 3 and mu = 1: mu != bar(mu) lambda, built without validation."""
    return make_ctx({"ring": {"kind": "modular", "m": 4}, "involution": "identity",
                     "lambda": "3", "mu": "1", "n": 3}, validate=False)


def pytest_terminal_summary(terminalreporter):
    """Repeat the acceptance verdicts, one line per criterion, after the run."""
    import sys
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
