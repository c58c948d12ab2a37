import numpy as np
import pytest
from hypothesis import assume, strategies as st

from ablkit.cycles import kcbs_projectors
from ablkit.hilbert import Projector, StateVector, rank1_projector

# Frozen with mpmath at 30 digits (see test_abl.py::test_oracle_values).
BORN_KCBS = 0.447213595499957939  # cos(pi/5) / (1 + cos(pi/5)) = 1/sqrt(5)
ZETA_KCBS = 0.395590894999985496  # p^2 / (p^2 + (1 - p)^2), p = 1/sqrt(5)


def random_state(rng, dim, real=False):
    v = rng.normal(size=dim)
    if not real:
        v = v + 1j * rng.normal(size=dim)
    return StateVector(v)


def random_projector(rng, dim, rank=None):
    rank = rank if rank is not None else int(rng.integers(1, dim))
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, _ = np.linalg.qr(z)
    m = q[:, :rank] @ q[:, :rank].conj().T
    return Projector((m + m.conj().T) / 2)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture(scope="session")
def kcbs():
    return kcbs_projectors()


@pytest.fixture
def north():
    return StateVector([0, 0, 1])


@st.composite
def states(draw, dim=3):
    re = draw(st.lists(st.floats(-1, 1), min_size=dim, max_size=dim))
    im = draw(st.lists(st.floats(-1, 1), min_size=dim, max_size=dim))
    v = np.array(re) + 1j * np.array(im)
    assume(np.linalg.norm(v) > 1e-3)
    return StateVector(v)


@st.composite
def rank1_projectors(draw, dim=3):
    return rank1_projector(draw(states(dim)))


# One pass/fail line per acceptance criterion, printed after the run.
_acceptance = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    if report.when == "call" or report.outcome != "passed":
        _acceptance[report.nodeid.split("::")[-1]] = report.outcome


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in sorted(_acceptance.items()):
        mark = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"{mark}  {name}")
