import numpy as np
import pytest
from hypothesis import given, strategies as st

from gcdlab.gcdcore import IndexSet, s_form
from gcdlab.poisson import (
    TorusSample, kernel_1d, piden_partial, poisson_kernel, quadratic_form, verify_identity,
)
from gcdlab.weights import explicit

from conftest import make_index_set, make_weights
from oracles import brute_quadratic_form


def S(*maps):
    return IndexSet.from_json([{str(k): v for k, v in m.items()} for m in maps])


def test_kernel_examples():
    assert poisson_kernel([0.0, 0.0], TorusSample((0.3, 0.9))) == 1.0
    assert poisson_kernel([0.5], TorusSample((0.0,))) == pytest.approx(3.0, rel=1e-15)
    assert poisson_kernel([0.5], TorusSample((0.5,))) == pytest.approx(1 / 3, rel=1e-15)
    with pytest.raises(ValueError):
        TorusSample((1.0,))
    with pytest.raises(ValueError):
        poisson_kernel([1.0], TorusSample((0.1,)))


@pytest.mark.parametrize("t", [[0.3], [0.9, 0.5], [0.9, 0.8, 0.7]])
def test_kernel_mass(t):
    n = 512
    grids = np.meshgrid(*[np.arange(n) / n] * len(t), indexing="ij") if len(t) < 3 else None
    if grids is None:
        theta = np.arange(n) / n
        mass = np.prod([kernel_1d(x, theta).mean() for x in t])
    else:
        pts = np.stack(grids, axis=-1)
        mass = poisson_kernel(t, pts).mean()
    assert mass == pytest.approx(1.0, abs=1e-10)


def test_identity_examples():
    chk = verify_identity(S({}), [1.0], explicit([0.5]))
    assert chk.exact_form == 1.0 and chk.estimate == 1.0
    chk = verify_identity(S({}, {1: 1}), [1.0, 1.0], explicit([0.5]))
    assert chk.exact_form == pytest.approx(3.0, rel=1e-15)
    assert abs(chk.estimate - 3.0) <= 1e-8
    chk = verify_identity(S({1: 1}, {2: 1}), [1.0, -1.0], explicit([0.5, 0.3]))
    assert chk.exact_form == pytest.approx(1.7, rel=1e-15)
    assert abs(chk.estimate - 1.7) <= 1e-8
    chk = verify_identity(S({1: 1}, {2: 1}), [1.0, -1.0], explicit([0.5, 0.3]), n_per_dim=256)
    assert abs(chk.estimate - 1.7) <= max(chk.error_bound, 1e-12)
    assert chk.abs_error <= chk.details["aliasing_bound"] + 1e-14


def test_grid_guards():
    with pytest.raises(ValueError):
        verify_identity(S({5: 1}), [1.0], explicit([0.5] * 5))
    with pytest.raises(ValueError):
        verify_identity(S({1: 1}), [1.0], explicit([0.97]))
    with pytest.raises(ValueError):
        verify_identity(S({1: 1}), [1.0], explicit([0.5]), "mc", samples=0)
    with pytest.raises(ValueError):
        verify_identity(S({1: 1}), [1.0, 2.0], explicit([0.5]))


def test_mc_is_reproducible_and_close():
    B = S({}, {1: 1}, {2: 2}, {1: 1, 3: 1})
    t = explicit([0.7, 0.6, 0.5])
    a = verify_identity(B, [1, -1, 0.5, 2], t, "mc", samples=200_000, seed=3)
    b = verify_identity(B, [1, -1, 0.5, 2], t, "mc", samples=200_000, seed=3)
    assert a.estimate == b.estimate
    assert a.abs_error <= 4 * a.error_bound
    u = verify_identity(B, [1, -1, 0.5, 2], t, "mc", samples=200_000, seed=3, sampler="uniform")
    assert u.abs_error <= 4 * u.error_bound


def test_piden_examples():
    assert piden_partial(explicit([0.5]), S({}), 200) == pytest.approx(1.0, abs=1e-12)
    assert piden_partial(explicit([0.5]), S({}, {1: 1}), 20) == pytest.approx(1.5, abs=1e-10)
    assert piden_partial(explicit([0.5]), S({}), 0) == pytest.approx(0.75, rel=1e-15)
    with pytest.raises(ValueError):
        piden_partial(explicit([0.5] * 4), S({}, {4: 1}), 40, budget=1000)


@given(st.integers(0, 2**32 - 1))
def test_piden_monotone_and_bounded(seed):
    rng = np.random.default_rng(seed)
    B = make_index_set(rng, int(rng.integers(1, 5)), 2, 2)
    t = make_weights(rng, 2, high=0.8)
    target = s_form(t, B)
    prev = 0.0
    for cap in (0, 2, 5, 10):
        cur = piden_partial(t, B, cap)
        assert cur >= prev - 1e-15
        assert cur <= target + 1e-12
        prev = cur


@given(st.integers(0, 2**32 - 1))
def test_form_is_positive_and_matches_loops(seed):
    rng = np.random.default_rng(seed)
    B = make_index_set(rng, int(rng.integers(1, 8)), 3, 3)
    t = make_weights(rng, 3, high=0.9)
    c = rng.standard_normal(len(B))
    q = quadratic_form(B, c, t)
    E, _ = B.exponent_matrix(range(1, 4))
    assert q == pytest.approx(brute_quadratic_form(E, c, [t.weight(j) for j in (1, 2, 3)]), rel=1e-12)
    assert q > 0
