"""Dilated sawtooth sums: covariances, resonance sums and maximal partial sums.

Throughout, phi(x) = {x} - 1/2 and S_M(x) = sum_{k <= M} c_k phi(n_k x).
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .gcdcore import IntegerSequence, gcd_ratio_block

MAX_EXACT_TERMS = 64
MAX_EXACT_CELLS = 4_000_000
DIRECT_TERMS = 2000


@dataclass(frozen=True)
class DilatedSystem:
    """Frequencies n_1 < ... < n_N with real coefficients c_1, ..., c_N."""

    seq: IntegerSequence
    coeffs: tuple[float, ...]

    def __post_init__(self):
        seq = self.seq if isinstance(self.seq, IntegerSequence) else IntegerSequence(tuple(self.seq))
        object.__setattr__(self, "seq", seq)
        coeffs = tuple(float(c) for c in self.coeffs)
        object.__setattr__(self, "coeffs", coeffs)
        if len(coeffs) != len(seq):
            raise ValueError(f"{len(seq)} frequencies but {len(coeffs)} coefficients")
        if not all(math.isfinite(c) for c in coeffs):
            raise ValueError("coefficients must be finite")

    @classmethod
    def of(cls, seq: Sequence[int], coeffs: Sequence[float]) -> "DilatedSystem":
        return cls(IntegerSequence(tuple(seq)), tuple(coeffs))

    def __len__(self) -> int:
        return len(self.coeffs)

    def prefix(self, M: int) -> "DilatedSystem":
        return DilatedSystem(IntegerSequence(self.seq.values[:M]), self.coeffs[:M])

    def sum_sq(self) -> float:
        return math.fsum(c * c for c in self.coeffs)


def sawtooth(x) -> np.ndarray:
    """phi(x) = {x} - 1/2."""
    x = np.asarray(x, dtype=float)
    return x - np.floor(x) - 0.5


def franel_landau(m: int, n: int) -> float:
    """int_0^1 phi(m x) phi(n x) dx = gcd(m, n)^2 / (12 m n)."""
    if m < 1 or n < 1:
        raise ValueError("frequencies must be positive")
    g = math.gcd(m, n)
    return (g / m) * (g / n) / 12.0


def sawtooth_l2_sq(sys: DilatedSystem) -> float:
    """||sum_k c_k phi(n_k x)||_2^2, exactly (1/12) sum c_k c_l gcd^2 / (n_k n_l)."""
    c = np.asarray(sys.coeffs)
    G = gcd_ratio_block(sys.seq.values, sys.seq.values, 1.0)
    return math.fsum((G * np.outer(c, c)).ravel().tolist()) / 12.0


def power_tail(a: int, sigma: float, direct: int = DIRECT_TERMS) -> tuple[float, float]:
    """sum_{j >= a} j^-sigma for sigma > 1, with a certified error bound.

    The first ``direct`` terms are summed exactly rounded; the rest uses
    Euler-Maclaurin with two Bernoulli corrections.  The returned bound is the
    size of the next correction term, which dominates the remainder because
    the derivatives of x^-sigma alternate in sign and decrease in size.
    """
    if sigma <= 1:
        raise ValueError("the series needs exponent > 1")
    if a < 1:
        raise ValueError("start index must be positive")
    j = np.arange(a, a + direct, dtype=float)
    head = math.fsum((j**-sigma).tolist())
    b = float(a + direct)
    tail = (b ** (1.0 - sigma) / (sigma - 1.0) + 0.5 * b**-sigma
            + sigma * b ** (-sigma - 1.0) / 12.0
            - sigma * (sigma + 1) * (sigma + 2) * b ** (-sigma - 3.0) / 720.0)
    bound = sigma * (sigma + 1) * (sigma + 2) * (sigma + 3) * (sigma + 4) * b ** (-sigma - 5.0) / 30240.0
    return head + tail, bound + 4e-16 * (head + tail)


def resonance_start(v: int, w: int, J: int) -> int:
    """Smallest j with j w / g >= J + 1 and j v / g >= J + 1 (v <= w), i.e. ceil((J+1) g / v)."""
    g = math.gcd(v, w)
    return -(-(J + 1) * g // v)


def resonance_sum(v: int, w: int, J: int, s: float = 1.0) -> float:
    """sum over j1, j2 >= J+1 with j1 v = j2 w of (j1 j2)^-s.

    The solutions are j1 = j w/g, j2 = j v/g (g = gcd(v, w)), which gives
    (g^2 / (v w))^s sum_{j >= ceil((J+1) g / v)} j^(-2s).
    """
    value, _ = resonance_sum_certified(v, w, J, s)
    return value


def resonance_sum_certified(v: int, w: int, J: int, s: float = 1.0) -> tuple[float, float]:
    """:func:`resonance_sum` together with its error bound."""
    if v < 1 or w < 1:
        raise ValueError("v and w must be positive")
    if v > w:
        raise ValueError("need v <= w")
    if J < 0:
        raise ValueError("J must be nonnegative")
    if s <= 0.5:
        raise ValueError("need s > 1/2 for convergence")
    g = math.gcd(v, w)
    scale = ((g / v) * (g / w)) ** s
    tail, err = power_tail(resonance_start(v, w, J), 2.0 * s)
    return scale * tail, scale * err


def _prefix_lines(sys: DilatedSystem, mid: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Slopes and intercepts of S_1..S_N on the cells with midpoints ``mid``.

    Returns two (cells, N) arrays.
    """
    n = np.asarray(sys.seq.values, dtype=float)
    c = np.asarray(sys.coeffs)
    fl = np.floor(mid[:, None] * n[None, :])
    slope = np.cumsum(np.broadcast_to(c * n, fl.shape), axis=1)
    icpt = np.cumsum(-c[None, :] * (fl + 0.5), axis=1)
    return slope, icpt


def _upper_envelope(m: np.ndarray, b: np.ndarray, lo: float, hi: float) -> list[float]:
    """Breakpoints in (lo, hi) of max_i (m_i x + b_i), via the monotone hull."""
    order = np.lexsort((b, m))
    hull_m: list[float] = []
    hull_b: list[float] = []
    for i in order:
        mi, bi = float(m[i]), float(b[i])
        if hull_m and hull_m[-1] == mi:
            # same slope, larger intercept sorts later
            hull_m.pop()
            hull_b.pop()
        while len(hull_m) >= 2:
            m1, b1, m2, b2 = hull_m[-2], hull_b[-2], hull_m[-1], hull_b[-1]
            # line 2 is useless if line 3 overtakes line 1 no later than line 2 does
            if (bi - b1) * (m2 - m1) >= (b2 - b1) * (mi - m1):
                hull_m.pop()
                hull_b.pop()
            else:
                break
        hull_m.append(mi)
        hull_b.append(bi)
    pts = []
    for k in range(len(hull_m) - 1):
        x = (hull_b[k] - hull_b[k + 1]) / (hull_m[k + 1] - hull_m[k])
        if lo < x < hi:
            pts.append(x)
    return pts


def _cells_integral(slope: np.ndarray, icpt: np.ndarray, edges: np.ndarray) -> float:
    lines_m = np.concatenate([slope, -slope], axis=1)
    lines_b = np.concatenate([icpt, -icpt], axis=1)
    parts = []
    for i in range(len(edges) - 1):
        lo, hi = float(edges[i]), float(edges[i + 1])
        xs = np.array([lo] + _upper_envelope(lines_m[i], lines_b[i], lo, hi) + [hi])
        ys = np.max(lines_m[i][None, :] * xs[:, None] + lines_b[i][None, :], axis=1)
        h = np.diff(xs)
        y0, y1 = ys[:-1], ys[1:]
        parts.append(math.fsum((h / 3.0 * (y0 * y0 + y0 * y1 + y1 * y1)).tolist()))
    return math.fsum(parts)


def breakpoints(seq: IntegerSequence) -> np.ndarray:
    """Sorted distinct points j / n_k in [0, 1]."""
    pts = np.concatenate([np.arange(n + 1) / n for n in seq.values])
    return np.unique(pts)


def maximal_l2_sq(sys: DilatedSystem, workers: int = 1, chunk: int = 4096) -> float:
    """int_0^1 max_{1 <= M <= N} |S_M(x)|^2 dx, exactly up to rounding.

    On every cell between consecutive breakpoints j / n_k all S_M are linear,
    so the maximal function is the upper envelope of the 2N lines +-S_M.  The
    square of a linear piece integrates to (h/3)(y0^2 + y0 y1 + y1^2).  Cells
    are processed in chunks (optionally on a thread pool) and reduced in order.
    """
    if len(sys) > MAX_EXACT_TERMS:
        raise ValueError(f"exact path is limited to N <= {MAX_EXACT_TERMS}; "
                         "use maximal_l2_sq_grid")
    cells = sum(sys.seq.values)
    if cells > MAX_EXACT_CELLS:
        raise ValueError(f"{cells} cells exceed the exact budget; use maximal_l2_sq_grid")
    edges = breakpoints(sys.seq)
    mid = 0.5 * (edges[:-1] + edges[1:])
    slope, icpt = _prefix_lines(sys, mid)
    starts = range(0, len(mid), chunk)

    def job(a: int) -> float:
        sl = slice(a, a + chunk)
        return _cells_integral(slope[sl], icpt[sl], edges[a:a + chunk + 1])

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(job, starts))
    else:
        parts = [job(a) for a in starts]
    return math.fsum(parts)


def maximal_l2_sq_grid(sys: DilatedSystem, points: int = 1_000_000, chunk: int = 1 << 16) -> float:
    """Midpoint-rule estimate of :func:`maximal_l2_sq`; works for any N."""
    n = np.asarray(sys.seq.values, dtype=float)
    c = np.asarray(sys.coeffs)
    parts = []
    for a in range(0, points, chunk):
        x = (np.arange(a, min(a + chunk, points)) + 0.5) / points
        S = np.cumsum(c[None, :] * sawtooth(x[:, None] * n[None, :]), axis=1)
        parts.append(math.fsum((np.max(np.abs(S), axis=1) ** 2).tolist()))
    return math.fsum(parts) / points


def ch_ratio(sys: DilatedSystem, grid_points: int = 1_000_000) -> dict:
    """Report row comparing the maximal norm with sum c^2 (log log N)^4.

    ``lower_witness`` is ||S_N||^2 / sum c^2, which is at most 1/12 of the
    largest eigenvalue of the gcd^2/(mn) matrix.
    """
    N = len(sys)
    if N < 3:
        raise ValueError("need N >= 3 so that log log N > 0")
    ss = sys.sum_sq()
    if ss == 0:
        raise ValueError("coefficients are all zero")
    if N <= MAX_EXACT_TERMS:
        mx, method = maximal_l2_sq(sys), "exact"
    else:
        mx, method = maximal_l2_sq_grid(sys, grid_points), "grid"
    return {
        "N": N,
        "maximal_l2_sq": mx,
        "sum_c2": ss,
        "ratio_to_cloglog4": mx / (ss * math.log(math.log(N)) ** 4),
        "lower_witness": sawtooth_l2_sq(sys) / ss,
        "method": method,
    }


def trig_part(a: Sequence[float], x) -> np.ndarray:
    """p(x) = sum_{j=1}^J a_j cos(2 pi j x)."""
    x = np.asarray(x, dtype=float)
    j = np.arange(1, len(a) + 1)
    return np.cos(2 * np.pi * np.multiply.outer(x, j)) @ np.asarray(a, dtype=float)


def remainder(f: Callable[[np.ndarray], np.ndarray], a: Sequence[float], x) -> np.ndarray:
    """r(x) = f(x) - p(x).  No accuracy claim; a helper for experiments."""
    return np.asarray(f(np.asarray(x, dtype=float))) - trig_part(a, x)


def load_system(path: str | Path) -> DilatedSystem:
    """Two whitespace-separated columns per line: n_k c_k."""
    ns, cs = [], []
    for line in Path(path).read_text().splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        n, c = line.split()
        ns.append(int(n))
        cs.append(float(c))
    return DilatedSystem.of(ns, cs)
