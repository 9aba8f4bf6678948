"""Closed-form upper and lower bounds for normalized GCD sums.

Conventions: log is the natural logarithm and [x] is floor(x).  Every
constant the bounds leave unspecified is a caller parameter; see
:class:`BoundParams` for the defaults.

The maximal-inequality argument for dilated sums truncates the Fourier
series at J with J^(eps/2) = (log N)^(1/2) exp((2 c_hat / eps) (log N)^(eps/2))
and eps = 1 / log log N, so that log J = (1/eps) log log N + (4 c_hat / eps^2) (log N)^(eps/2).
These enter only the constants behind the (log log N)^4 factor reported by
``gcdlab.dilated.ch_ratio``; nothing here evaluates them at runtime.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .weights import WeightSequence, eta, kappa


@dataclass(frozen=True)
class BoundParams:
    """Knobs the bounds do not pin down.

    ``xi`` must exceed 1/log 2.  ``C``, ``C_eps``, ``c`` and ``c_hat`` are the
    unnamed constants (``c_hat >= 4`` by convention); ``tau0`` is the flat
    fallback for the v-selector when N is too small for the main choice;
    ``j0`` is the small-index cutoff of the product estimates.
    """

    alpha: float = 0.75
    N: int = 3
    xi: float = 2.0
    eps: float = 0.1
    C: float = 1.0
    C_eps: float = 1.0
    c: float = 1.0
    c_hat: float = 4.0
    tau0: float = 0.9
    j0: int = 3

    def __post_init__(self):
        if self.xi * math.log(2) <= 1:
            raise ValueError(f"xi = {self.xi} must exceed 1/log 2")
        if self.N < 3:
            raise ValueError("N must be >= 3 so that log log N > 0")
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError("alpha must lie in (0, 1]")
        if self.eps <= 0:
            raise ValueError("eps must be positive")
        if min(self.C, self.C_eps, self.c, self.c_hat) <= 0:
            raise ValueError("constants must be positive")


def _logs(N: float) -> tuple[float, float]:
    if N < 3:
        raise ValueError("N must be >= 3 so that log log N > 0")
    L = math.log(N)
    return L, math.log(L)


def g_bound(alpha: float, N: float) -> float:
    """Exponent of the upper bound C_eps exp((1+eps) g) for the normalized sum.

    Two branches: 1/2 < alpha < 1 and 0 < alpha <= 1/2 (alpha = 1/2 goes to
    the second one).
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    L, LL = _logs(N)
    if alpha > 0.5:
        lead = 8.0 / (1.0 - alpha) + 16.0 * 2.0**-alpha / math.sqrt(2.0 * alpha - 1.0)
        return lead * L ** (1.0 - alpha) * LL**-alpha + L ** ((1.0 - alpha) / 2.0) / (1.0 - alpha)
    return 50.0 * alpha * math.sqrt(L * LL) + (1.0 - 2.0 * alpha) * L


def upper_bound(alpha: float, N: float, C_eps: float = 1.0, eps: float = 0.1) -> float:
    return C_eps * math.exp((1.0 + eps) * g_bound(alpha, N))


def tau_prefix(t: WeightSequence, n: int) -> np.ndarray:
    """eta(t)_1 .. eta(t)_n, rearranged into decreasing order."""
    vals, _ = eta(t).rearranged(n)
    return vals


def r_index(t: WeightSequence, N: int, xi: float) -> int:
    """[xi log N] + kappa(t)."""
    if xi * math.log(2) <= 1:
        raise ValueError("xi must exceed 1/log 2")
    return math.floor(xi * math.log(N)) + kappa(t)


def _check_v(v: np.ndarray, tau: np.ndarray, r: int) -> None:
    if len(v) < r:
        raise ValueError(f"need {r} values of v, got {len(v)}")
    for j in range(r):
        if not v[j] < 1.0:
            raise ValueError(f"v_{j + 1} = {v[j]} must be < 1")
        if j and v[j] > v[j - 1]:
            raise ValueError(f"v must be nonincreasing: v_{j} < v_{j + 1}")
        if not v[j] > tau[j] ** 2:
            raise ValueError(f"v_{j + 1} = {v[j]} must exceed tau_{j + 1}^2 = {tau[j] ** 2}")


def th4_rhs(t: WeightSequence, v, xi: float, C: float, N: int) -> float:
    """Upper bound for the supremum of s_form(t, .) over sets of size N:

        prod_{j <= r} (1 - v_j)^-1 (1 - tau_j^2 / v_j)^-1
          * prod_{r < k <= N-1} (1 - tau_k^2 / v_r)^-1  +  exp(C sum_{l <= N-1} t_l^2)

    with tau = eta(t) in decreasing order and r = [xi log N] + kappa(t).  The
    second product uses the last selector value v_r.
    """
    if N < 3:
        raise ValueError("N must be >= 3")
    r = r_index(t, N, xi)
    tau = tau_prefix(t, max(r, N - 1))
    v = np.asarray(v, dtype=float)
    _check_v(v, tau, r)
    first = 1.0
    for j in range(r):
        first *= 1.0 / ((1.0 - v[j]) * (1.0 - tau[j] ** 2 / v[j]))
    second = 1.0
    for k in range(r, N - 1):
        second *= 1.0 / (1.0 - tau[k] ** 2 / v[r - 1])
    tail = math.exp(C * math.fsum(t.weight(j) ** 2 for j in range(1, N)))
    return first * second + tail


def default_v(alpha: float, N: int, t: WeightSequence, params: BoundParams | None = None) -> np.ndarray:
    """Selector v_1 >= ... >= v_r for :func:`th4_rhs`.

    alpha > 1/2:  v_j = max(tau_j, (2 alpha - 1)^-1/2 tau_r)
    alpha = 1/2:  v_j = max(tau_j, (log log N / log N)^1/2)

    If that choice violates v_j < 1 or v_j > tau_j^2 (small N), every entry
    falls back to ``params.tau0``.
    """
    params = params or BoundParams(alpha=alpha, N=N)
    if not 0.5 <= alpha < 1.0:
        raise ValueError("the selector is defined for 1/2 <= alpha < 1")
    r = r_index(t, N, params.xi)
    tau = tau_prefix(t, max(r, N - 1))
    if alpha > 0.5:
        floor_ = tau[r - 1] / math.sqrt(2.0 * alpha - 1.0)
    else:
        L, LL = _logs(N)
        floor_ = math.sqrt(LL / L)
    v = np.maximum(tau[:r], floor_)
    try:
        _check_v(v, tau, r)
        return v
    except ValueError:
        pass
    v = np.full(r, params.tau0)
    try:
        _check_v(v, tau, r)
    except ValueError as exc:
        raise ValueError(f"fallback tau0 = {params.tau0} is infeasible: {exc}") from None
    return v


def gal_bound(N: float, c: float = 1.0) -> float:
    """c (log log N)^2: the alpha = 1 bound."""
    _, LL = _logs(N)
    return c * LL**2


def dyer_harman_bound(N: float, C: float = 1.0, c: float = 1.0) -> float:
    """C exp(c log N / log log N): the older alpha = 1/2 bound."""
    L, LL = _logs(N)
    return C * math.exp(c * L / LL)


def dh_intermediate(alpha: float, N: float, c_of_alpha: float = 1.0) -> float:
    """c(alpha) exp((log N)^((4 - 4 alpha)/(3 - 2 alpha))) for 1/2 < alpha < 1."""
    L, _ = _logs(N)
    return c_of_alpha * math.exp(L ** ((4.0 - 4.0 * alpha) / (3.0 - 2.0 * alpha)))


def dh_intermediate_exponent(alpha: float) -> float:
    return (4.0 - 4.0 * alpha) / (3.0 - 2.0 * alpha)


def harman_floor(N: float) -> float:
    """exp(2 sqrt(log N / log log N)): no admissible alpha = 1/2 bound can be smaller."""
    L, LL = _logs(N)
    return math.exp(2.0 * math.sqrt(L / LL))


def squarefree_lower_shape(alpha: float, N: float, c: float = 0.1) -> float:
    """exp((c / (1 - alpha)) (log N)^(1 - alpha) (log log N)^-alpha)."""
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    L, LL = _logs(N)
    return math.exp(c / (1.0 - alpha) * L ** (1.0 - alpha) * LL**-alpha)


def primes_lower_shape(alpha: float, N: float, c: float = 0.1) -> float:
    """c (log N)^(-2 alpha) N^(1 - 2 alpha)."""
    L, _ = _logs(N)
    return c * L ** (-2.0 * alpha) * N ** (1.0 - 2.0 * alpha)


def extremal_value(alpha: float, N: float, c: float = 0.1) -> float:
    """Lower-bound shape matching the alpha range: primes below 1/2, square-free otherwise."""
    if alpha < 0.5:
        return primes_lower_shape(alpha, N, c)
    return squarefree_lower_shape(alpha, N, c)


def bounds_row(alpha: float, N: float, params: BoundParams | None = None) -> dict:
    """One row of the bounds table (columns match the CLI CSV)."""
    p = params or BoundParams()
    g = g_bound(alpha, N)
    return {
        "alpha": alpha,
        "N": N,
        "g": g,
        "exp_g": math.exp(g) if g < 700 else math.inf,
        "gal": gal_bound(N, p.c),
        "dh": dyer_harman_bound(N, p.C, p.c),
        "harman_floor": harman_floor(N),
        "extremal_value": extremal_value(alpha, N, 0.1),
    }
