import numpy as np
import pytest
from hypothesis import settings

from gcdlab.gcdcore import IndexSet
from gcdlab.multiindex import MultiIndex
from gcdlab.weights import explicit

settings.register_profile("lab", deadline=None, max_examples=60, derandomize=True)
settings.load_profile("lab")


def make_index_set(rng, N, dims, max_exp):
    seen = set()
    while len(seen) < N:
        e = rng.integers(0, max_exp + 1, size=dims)
        seen.add(MultiIndex.from_dict({j + 1: int(x) for j, x in enumerate(e)}))
    members = sorted(seen)
    rng.shuffle(members)
    return IndexSet(tuple(members))


def make_weights(rng, n, low=0.05, high=0.95):
    return explicit(np.sort(rng.uniform(low, high, size=n))[::-1].tolist())


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[number])
