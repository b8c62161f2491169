import sys

import numpy as np
import pytest
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays


def raw_vectors(min_d=2, max_d=8):
    """Finite float vectors with norm comfortably above the projection cutoff."""
    return st.integers(min_d, max_d).flatmap(
        lambda d: arrays(np.float64, d, elements=st.floats(-10, 10, allow_subnormal=False))
    ).filter(lambda x: np.linalg.norm(x) > 1e-3)


def unit_vectors(min_d=2, max_d=8):
    return raw_vectors(min_d, max_d).map(lambda x: x / np.linalg.norm(x))


def unit_pairs(min_d=2, max_d=8):
    elems = st.floats(-10, 10, allow_subnormal=False)

    def pair(d):
        vec = arrays(np.float64, d, elements=elems).filter(lambda x: np.linalg.norm(x) > 1e-3)
        return st.tuples(vec, vec).map(lambda p: tuple(x / np.linalg.norm(x) for x in p))

    return st.integers(min_d, max_d).flatmap(pair)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    if module is not None and module.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(module.RESULTS):
            terminalreporter.write_line(line)
