import functools
import itertools

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

import zonokernel
import zonokernel.kernel as _kernel

settings.register_profile("ci", derandomize=True, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("ci")

#: Every optimal kernel result produced anywhere in the session.
OPTIMAL_RESULTS = []
#: Lines emitted by the acceptance suite, echoed in the terminal summary.
ACCEPTANCE_LINES = []

_solve = _kernel.solve_kernel


@functools.wraps(_solve)
def _recording_solve(*args, **kwargs):
    res = _solve(*args, **kwargs)
    if res.optimal:
        OPTIMAL_RESULTS.append(res)
    return res


_kernel.solve_kernel = _recording_solve
zonokernel.solve_kernel = _recording_solve


def pytest_collection_modifyitems(config, items):
    # acceptance last, so its suite-wide certification check sees every result
    items.sort(key=lambda it: it.nodeid.startswith("tests/test_acceptance.py")
               or "test_acceptance.py" in it.nodeid)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def sign_vertices(Z):
    """All 2^n points c + G s with s in {-1, 1}^n (a superset of the vertices)."""
    n = Z.n_generators
    if n == 0:
        return Z.center[None, :]
    S = np.array(list(itertools.product([-1.0, 1.0], repeat=n)))
    return Z.center[None, :] + S @ Z.generators.T


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
