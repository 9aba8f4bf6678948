"""Quick invariant suite behind ``gcdlab selftest``.

Each check draws from its own counter-based stream so that adding or
reordering checks never changes the others.  References here are
deliberately cheap ones from numpy/scipy or exact rational arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
import scipy.special

from . import bounds, canonical, dilated, gcdcore, poisson, spectral
from .gcdcore import IndexSet
from .multiindex import MultiIndex, compose, factorize
from .weights import explicit, kappa, power_law


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str
    tolerance: float

    def as_row(self) -> dict:
        return {"check": self.name, "passed": bool(self.passed), "detail": self.detail,
                "tolerance": self.tolerance}


def stream(seed: int, index: int) -> np.random.Generator:
    """Generator for shard ``index`` under ``seed``: Philox keyed by the seed."""
    return np.random.Generator(np.random.Philox(key=seed, counter=[0, 0, 0, index]))


def random_index_set(rng: np.random.Generator, N: int, dims: int, max_exp: int) -> IndexSet:
    seen: set[MultiIndex] = set()
    while len(seen) < N:
        e = rng.integers(0, max_exp + 1, size=dims)
        seen.add(MultiIndex.from_dict({j + 1: int(x) for j, x in enumerate(e)}))
    return IndexSet(tuple(sorted(seen)))


def random_weights(rng: np.random.Generator, n: int, top: float = 0.95):
    vals = np.sort(rng.uniform(0.05, top, size=n))[::-1]
    return explicit(vals.tolist())


def exact_sawtooth_product(m: int, n: int) -> Fraction:
    """int_0^1 phi(mx) phi(nx) dx by Simpson's rule per cell, exact for quadratics."""
    pts = sorted({Fraction(j, m) for j in range(m + 1)} | {Fraction(j, n) for j in range(n + 1)})

    def phi(x: Fraction, k: int, cell_floor: int) -> Fraction:
        return k * x - cell_floor - Fraction(1, 2)

    total = Fraction(0)
    for a, b in zip(pts, pts[1:]):
        mid = (a + b) / 2
        fm, fn = math.floor(m * mid), math.floor(n * mid)
        f = [phi(x, m, fm) * phi(x, n, fn) for x in (a, mid, b)]
        total += (b - a) / 6 * (f[0] + 4 * f[1] + f[2])
    return total


def check_factorize(seed: int) -> CheckResult:
    bad = [n for n in range(1, 3001) if compose(factorize(n)) != n]
    return CheckResult("factorize_roundtrip", not bad, f"{len(bad)} failures in 1..3000", 0.0)


def check_gcdsum_sform(seed: int) -> CheckResult:
    rng = stream(seed, 1)
    worst = 0.0
    for _ in range(20):
        N = int(rng.integers(1, 33))
        seq = gcdcore.IntegerSequence.of(rng.choice(np.arange(1, 5001), N, replace=False).tolist())
        B = IndexSet.from_integers(seq.values)
        for a in (0.25, 0.5, 1.0):
            x, y = gcdcore.gcd_sum(seq, a), gcdcore.s_form(power_law(a), B)
            worst = max(worst, abs(x - y) / abs(x))
    return CheckResult("gcdsum_vs_sform", worst <= 1e-12, f"max rel err {worst:.2e}", 1e-12)


def check_squarefree(seed: int) -> CheckResult:
    worst = 0.0
    for r in range(1, 7):
        for a in (0.6, 1.0):
            seq = gcdcore.extremal_squarefree(r)
            x = gcdcore.gcd_sum(seq, a, normalized=False)
            y = gcdcore.squarefree_closed_form(r, a)
            worst = max(worst, abs(x - y) / y)
    return CheckResult("squarefree_closed_form", worst <= 1e-10, f"max rel err {worst:.2e}", 1e-10)


def check_canonical(seed: int) -> CheckResult:
    rng = stream(seed, 3)
    fails = 0
    tried = 0
    while tried < 100:
        N = int(rng.integers(2, 9))
        B = random_index_set(rng, N, 4, 3)
        t = random_weights(rng, 12)
        k = kappa(t)
        if k >= N:
            continue
        tried += 1
        out, t2 = canonical.canonical_reduce(B, t)
        ok = (canonical.is_kappa_canonical(out, k) and len(out) == N
              and len(out.support()) <= N - 1
              and gcdcore.s_form(t2, out) >= gcdcore.s_form(t, B) - 1e-12)
        fails += not ok
    return CheckResult("canonical_reduce", fails == 0, f"{fails} failures in 100", 1e-12)


def check_poisson(seed: int) -> CheckResult:
    rng = stream(seed, 4)
    worst = 0.0
    for _ in range(5):
        B = random_index_set(rng, int(rng.integers(1, 5)), 2, 3)
        t = random_weights(rng, 2, top=0.7)
        c = rng.standard_normal(len(B))
        chk = poisson.verify_identity(B, c, t, "grid")
        worst = max(worst, chk.abs_error / max(abs(chk.exact_form), 1e-300))
    return CheckResult("poisson_grid_identity", worst <= 1e-8, f"max rel err {worst:.2e}", 1e-8)


def check_spectral(seed: int) -> CheckResult:
    rng = stream(seed, 5)
    worst = 0.0
    outside = 0
    for _ in range(10):
        N = int(rng.integers(2, 25))
        B = random_index_set(rng, N, 3, 3)
        t = random_weights(rng, max(N, 3), top=0.9)
        M = spectral.build_matrix(B, t)
        res = spectral.eig_extremes(M)
        ref = np.linalg.eigvalsh(M.entries)
        worst = max(worst, abs(res.lambda_min - ref[0]), abs(res.lambda_max - ref[-1]))
        lo, hi = spectral.sandwich_bounds(t, N)
        outside += not (lo - 1e-8 <= res.lambda_min and res.lambda_max <= hi + 1e-8)
    ok = worst <= 1e-9 and outside == 0
    return CheckResult("eigen_extremes", ok, f"max abs err {worst:.2e}, {outside} sandwich failures", 1e-9)


def check_franel(seed: int) -> CheckResult:
    worst = 0.0
    for m in range(1, 16):
        for n in range(m, 16):
            worst = max(worst, abs(dilated.franel_landau(m, n) - float(exact_sawtooth_product(m, n))))
    return CheckResult("franel_landau", worst <= 1e-12, f"max abs err {worst:.2e}", 1e-12)


def check_resonance(seed: int) -> CheckResult:
    worst = 0.0
    for v in range(1, 9):
        for w in range(v, 9):
            for J in (0, 3):
                for s in (0.8, 1.0):
                    g = math.gcd(v, w)
                    start = -(-(J + 1) * g // v)
                    ref = ((g * g) / (v * w)) ** s * float(scipy.special.zeta(2 * s, start))
                    worst = max(worst, abs(dilated.resonance_sum(v, w, J, s) - ref) / ref)
    return CheckResult("resonance_sum", worst <= 1e-12, f"max rel err {worst:.2e}", 1e-12)


def check_maximal(seed: int) -> CheckResult:
    rng = stream(seed, 9)
    worst = 0.0
    order_fail = 0
    for _ in range(3):
        N = int(rng.integers(1, 7))
        seq = np.sort(rng.choice(np.arange(1, 25), N, replace=False)).tolist()
        sys = dilated.DilatedSystem.of(seq, rng.uniform(-1, 1, N).tolist())
        exact = dilated.maximal_l2_sq(sys)
        worst = max(worst, abs(exact - dilated.maximal_l2_sq_grid(sys, 200_000)))
        order_fail += dilated.sawtooth_l2_sq(sys) > exact + 1e-12
    ok = worst <= 1e-3 and order_fail == 0
    return CheckResult("maximal_envelope", ok, f"max grid gap {worst:.2e}", 1e-3)


def check_bounds(seed: int) -> CheckResult:
    # the alpha > 1/2 branch dips before log log N exceeds alpha / (1 - alpha),
    # so monotonicity on 10..10^6 is only checked on the other branch
    mono = True
    for a in (0.25, 0.5):
        gs = [bounds.g_bound(a, 10.0**k) for k in range(1, 7)]
        mono &= all(y > x for x, y in zip(gs, gs[1:]))
    t = power_law(0.75)
    v = bounds.default_v(0.75, 10**4, t)
    rhs = bounds.th4_rhs(t, v, 2.0, 1.0, 10**4)
    ok = mono and rhs > 1.0
    return CheckResult("bounds_sanity", ok, f"g increasing: {mono}, th4 rhs {rhs:.4g}", 0.0)


CHECKS = [check_factorize, check_gcdsum_sform, check_squarefree, check_canonical,
          check_poisson, check_spectral, check_franel, check_resonance, check_maximal,
          check_bounds]


def run_checks(seed: int = 0) -> list[CheckResult]:
    return [chk(seed) for chk in CHECKS]
