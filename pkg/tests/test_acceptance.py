"""Acceptance suite: one test per criterion, each at its stated tolerance.

Every test records a PASS/FAIL line in ``RESULTS``; the terminal summary
hook in conftest.py prints them after the run.  Run this file directly
(``python tests/test_acceptance.py``) to get the same lines from pytest.
"""

from __future__ import annotations

import math
import sys
import time

import numpy as np
import pytest

from gcdlab import bounds, canonical, dilated, gcdcore, poisson, spectral
from gcdlab.gcdcore import IndexSet, IntegerSequence
from gcdlab.multiindex import PrimeTable, default_table
from gcdlab.weights import explicit, kappa, power_law

from conftest import make_index_set, make_weights
from oracles import (brute_gcd_sum, brute_quadratic_form, charpoly_extremes,
                     exact_sawtooth_integral, grid_maximal, power_method_extremes,
                     resonance_truncation_bound)

RESULTS: dict[int, str] = {}


def record(number: int, ok: bool, detail: str) -> None:
    RESULTS[number] = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}"
    print(RESULTS[number])
    assert ok, RESULTS[number]


def rng_for(number: int) -> np.random.Generator:
    return np.random.default_rng([20240611, number])


def rel(x: float, y: float) -> float:
    return abs(x - y) / abs(y)


def test_criterion_01_squarefree_closed_form():
    start = time.perf_counter()
    worst = 0.0
    for r in range(1, 11):
        seq = gcdcore.extremal_squarefree(r)
        for alpha in (0.6, 0.75, 0.9, 1.0):
            got = gcdcore.gcd_sum(seq, alpha, normalized=False)
            worst = max(worst, rel(got, gcdcore.squarefree_closed_form(r, alpha)))
    elapsed = time.perf_counter() - start
    record(1, worst <= 1e-10 and elapsed < 60.0,
           f"max rel err {worst:.2e} (tol 1e-10), {elapsed:.1f} s (limit 60 s)")


def test_criterion_02_gcd_sum_matches_s_form():
    rng = rng_for(2)
    table = PrimeTable.up_to(10**6)
    laws = {a: power_law(a, table) for a in (0.25, 0.5, 0.75, 1.0)}
    worst = 0.0
    brute_worst = 0.0
    for trial in range(500):
        N = int(rng.integers(1, 65))
        vals = rng.choice(np.arange(1, 10**6 + 1), N, replace=False).tolist()
        seq = IntegerSequence.of(vals)
        B = IndexSet.from_integers(seq.values, table)
        for a, t in laws.items():
            direct = gcdcore.gcd_sum(seq, a)
            worst = max(worst, rel(direct, gcdcore.s_form(t, B)))
            if trial < 50:
                brute_worst = max(brute_worst, rel(direct, brute_gcd_sum(vals, a)))
    record(2, worst <= 1e-12 and brute_worst <= 1e-12,
           f"max rel err {worst:.2e} over 2000 pairs (tol 1e-12); "
           f"gcd_sum vs loop oracle {brute_worst:.2e}")


def test_criterion_03_canonical_reduction():
    rng = rng_for(3)
    failures = []
    tried = 0
    while tried < 1000:
        N = int(rng.integers(1, 11))
        B = make_index_set(rng, N, 6, 3)
        t = make_weights(rng, 12, 0.02, 0.98)
        k = kappa(t)
        if k >= N:
            continue
        tried += 1
        out, t2 = canonical.canonical_reduce(B, t)
        checks = {
            "canonical": canonical.is_kappa_canonical(out, k),
            "size": len(out) == N,
            "support": len(out.support()) <= N - 1,
            "s_form": gcdcore.s_form(t2, out) >= gcdcore.s_form(t, B) - 1e-12,
        }
        if not all(checks.values()):
            failures.append((tried, [name for name, ok in checks.items() if not ok]))
    record(3, not failures, f"{len(failures)} failures in 1000 sets"
           + (f", first {failures[0]}" if failures else ""))


def test_criterion_04_kernel_identity():
    rng = rng_for(4)
    grid_worst = 0.0
    for _ in range(50):
        K = int(rng.integers(1, 4))
        N = int(rng.integers(1, min(4**K, 6) + 1))
        B = make_index_set(rng, N, K, 3)
        t = make_weights(rng, K, 0.05, 0.8)
        c = rng.standard_normal(N)
        chk = poisson.verify_identity(B, c, t, "grid")
        E, _ = B.exponent_matrix(list(range(1, K + 1)))
        exact = brute_quadratic_form(E, c, [t.weight(j) for j in range(1, K + 1)])
        grid_worst = max(grid_worst, abs(chk.estimate - exact) / abs(exact))
    mc_worst = 0.0
    for i in range(10):
        N = int(rng.integers(2, 7))
        B = make_index_set(rng, N, 4, 3)
        while len(B.support()) < 4:
            B = make_index_set(rng, N, 4, 3)
        t = make_weights(rng, 4, 0.05, 0.8)
        c = rng.standard_normal(N)
        chk = poisson.verify_identity(B, c, t, "mc", samples=10**6, seed=i)
        E, _ = B.exponent_matrix([1, 2, 3, 4])
        exact = brute_quadratic_form(E, c, [t.weight(j) for j in range(1, 5)])
        mc_worst = max(mc_worst, abs(chk.estimate - exact) / chk.error_bound)
    record(4, grid_worst <= 1e-8 and mc_worst <= 4.0,
           f"grid max rel err {grid_worst:.2e} (tol 1e-8); "
           f"MC max |err|/SE {mc_worst:.2f} (limit 4)")


def min_dims(N: int) -> int:
    """Fewest coordinates with exponents <= 3 that hold N distinct members."""
    return max(1, math.ceil(math.log(N, 4)))


def random_gcd_matrices(rng, count):
    """Half abstract index sets with explicit t <= 0.9, half integer
    sequences under the power law with 2^-alpha <= 0.9."""
    out = []
    for i in range(count):
        N = int(rng.integers(1, 65))
        if i % 2 == 0:
            dims = int(rng.integers(min_dims(N), 7))
            B = make_index_set(rng, N, dims, 3)
            t = make_weights(rng, max(N, 7), 0.02, 0.9)
            out.append((spectral.build_matrix(B, t), t, N))
        else:
            alpha = float(rng.uniform(0.16, 1.0))
            vals = rng.choice(np.arange(1, 10**4 + 1), N, replace=False).tolist()
            out.append((spectral.build_gcd_matrix(vals, alpha), power_law(alpha), N))
    return out


def test_criterion_05_sandwich():
    rng = rng_for(5)
    problems = []
    for i, (M, t, N) in enumerate(random_gcd_matrices(rng, 200)):
        assert t.weight(1) <= 0.9
        res = spectral.eig_extremes(M)
        lo, hi = spectral.sandwich_bounds(t, N)
        ray = spectral.rayleigh_all_ones(M)
        ok = (lo - 1e-8 <= res.lambda_min <= hi + 1e-8
              and lo - 1e-8 <= res.lambda_max <= hi + 1e-8
              and res.lambda_min > 0
              and res.lambda_max >= ray >= 1.0)
        if not ok:
            problems.append(i)
    record(5, not problems, f"{len(problems)} violations in 200 matrices"
           + (f", first at #{problems[0]}" if problems else ""))


def test_criterion_06_eigensolver():
    rng = rng_for(6)
    small = 0.0
    for i in range(40):
        N = int(rng.integers(1, 5))
        if i % 2 == 0:
            B = make_index_set(rng, N, 3, 3)
            M = spectral.build_matrix(B, make_weights(rng, 4, 0.05, 0.9))
        else:
            vals = rng.choice(np.arange(1, 1000), N, replace=False).tolist()
            M = spectral.build_gcd_matrix(vals, float(rng.uniform(0.2, 1.0)))
        res = spectral.eig_extremes(M)
        lo, hi = charpoly_extremes(M.entries)
        small = max(small, abs(res.lambda_min - lo), abs(res.lambda_max - hi))
    large = 0.0
    for i in range(30):
        N = int(rng.integers(5, 65))
        if i % 2 == 0:
            B = make_index_set(rng, N, 4, 3)
            M = spectral.build_matrix(B, make_weights(rng, N, 0.05, 0.9))
        else:
            vals = rng.choice(np.arange(1, 10**4), N, replace=False).tolist()
            M = spectral.build_gcd_matrix(vals, float(rng.uniform(0.2, 1.0)))
        res = spectral.eig_extremes(M)
        lo, hi = power_method_extremes(M.entries)
        large = max(large, abs(res.lambda_min - lo), abs(res.lambda_max - hi))
    record(6, small <= 1e-9 and large <= 1e-9,
           f"char-poly N<=4 max err {small:.2e}; power method N<=64 max err {large:.2e} (tol 1e-9)")


def test_criterion_07_franel_landau():
    worst = 0.0
    for m in range(1, 101):
        for n in range(m, 101):
            worst = max(worst, abs(dilated.franel_landau(m, n) - float(exact_sawtooth_integral(m, n))))
    record(7, worst <= 1e-12, f"max abs err {worst:.2e} over 5050 pairs (tol 1e-12)")


LIMIT = 100_000


def scan_solutions(v: int, w: int, s: float):
    """All (j1, j2) with 1 <= j1, j2 <= LIMIT and j1 v = j2 w, by scanning j1;
    returns j2 and the terms (j1 j2)^-s."""
    j1 = np.arange(1, LIMIT + 1, dtype=np.int64)
    prod = j1 * v
    hit = prod % w == 0
    j1, j2 = j1[hit], prod[hit] // w
    keep = j2 <= LIMIT
    j1, j2 = j1[keep], j2[keep]
    return j1, j2, (j1.astype(float) * j2.astype(float)) ** -s


def check_resonance(v, w, J, s, scan) -> bool:
    j1, j2, terms = scan
    inside = (j1 >= J + 1) & (j2 >= J + 1)
    brute = math.fsum(terms[inside].tolist())
    value, err = dilated.resonance_sum_certified(v, w, J, s)
    miss = resonance_truncation_bound(v, w, s, LIMIT)
    slack = 1e-13 * value
    return brute <= value + err + slack and value - err <= brute + miss + slack


def test_criterion_08_resonance():
    fails = []
    for v in range(1, 51):
        for w in range(v, 51):
            scan = scan_solutions(v, w, 1.0)
            for J in range(21):
                if not check_resonance(v, w, J, 1.0, scan):
                    fails.append((v, w, J, 1.0))
    rng = rng_for(8)
    for _ in range(20):
        v, w = sorted(int(x) for x in rng.integers(1, 51, size=2))
        J = int(rng.integers(0, 21))
        s = float(rng.choice([0.8, 0.9]))
        if not check_resonance(v, w, J, s, scan_solutions(v, w, s)):
            fails.append((v, w, J, s))
    record(8, not fails, f"{len(fails)} failures in 26775 + 20 cases"
           + (f", first {fails[0]}" if fails else ""))


def test_criterion_09_maximal_function():
    rng = rng_for(9)
    worst = 0.0
    order_fail = 0
    for _ in range(50):
        N = int(rng.integers(1, 17))
        seq = np.sort(rng.choice(np.arange(1, 51), N, replace=False)).tolist()
        coeffs = rng.uniform(-1, 1, N).tolist()
        sys_ = dilated.DilatedSystem.of(seq, coeffs)
        exact = dilated.maximal_l2_sq(sys_)
        worst = max(worst, abs(exact - grid_maximal(seq, coeffs, 10**6)))
        order_fail += dilated.sawtooth_l2_sq(sys_) > exact
    record(9, worst <= 1e-4 and order_fail == 0,
           f"max |exact - grid| {worst:.2e} (tol 1e-4); {order_fail} cases with sawtooth > maximal")


def test_criterion_10_desk_scale_lower_bounds():
    sq_fail = []
    lines = []
    for alpha in (0.6, 0.75, 0.9):
        for r in range(4, 11):
            N = 2**r
            observed = gcdcore.gcd_sum(gcdcore.extremal_squarefree(r), alpha)
            shape = bounds.squarefree_lower_shape(alpha, N, 0.1)
            if shape > observed:
                sq_fail.append((alpha, N))
        lines.append(f"a={alpha} N=1024 ratio {observed / shape:.3g}")
    # prime family: the normalized sum is 1 + (A^2 - Q) / N with A = sum p^-alpha
    # and Q = sum p^-2alpha over the first N primes
    pr_fail = []
    p = default_table().primes[:10**4].astype(float)
    for alpha in (0.25, 0.4):
        A = np.cumsum(p**-alpha)
        Q = np.cumsum(p ** (-2 * alpha))
        Ns = np.arange(100, 10**4 + 1)
        observed = 1.0 + (A[Ns - 1] ** 2 - Q[Ns - 1]) / Ns
        for N in (100, 1000, 5000):
            direct = gcdcore.gcd_sum(gcdcore.extremal_primes(N), alpha)
            assert rel(observed[N - 100], direct) <= 1e-10
        for N, obs in zip(Ns.tolist(), observed.tolist()):
            if obs < bounds.primes_lower_shape(alpha, N, 0.1):
                pr_fail.append((alpha, N))
        lines.append(f"a={alpha} N=10^4 ratio {observed[-1] / bounds.primes_lower_shape(alpha, 10**4):.3g}")
    record(10, not sq_fail and not pr_fail,
           f"square-free {len(sq_fail)} and primes {len(pr_fail)} violations; " + ", ".join(lines))


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-s"]))
