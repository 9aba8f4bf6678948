"""Poisson kernel of the polydisc and numerical checks of the quadratic-form identity

    sum_{k,l} t^|beta_k - beta_l| c_k c_l = int_{T^K} |sum_j c_j z^beta_j|^2 P_K(t, z) dsigma_K(z).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .gcdcore import IndexSet, pair_weights
from .weights import WeightSequence

GRID_MAX_DIM = 4
GRID_MAX_POINTS = 1024
GRID_MAX_WEIGHT = 0.95
SHARD_SIZE = 1 << 16
PIDEN_BUDGET = 2_000_000


@dataclass(frozen=True)
class TorusSample:
    """A point of T^K given by angle fractions in [0, 1)."""

    angles: tuple[float, ...]

    def __post_init__(self):
        if any(not 0.0 <= a < 1.0 for a in self.angles):
            raise ValueError("angles must lie in [0, 1)")

    @property
    def K(self) -> int:
        return len(self.angles)


def kernel_1d(zeta: float, theta: np.ndarray) -> np.ndarray:
    """(1 - zeta^2) / |1 - zeta e^{2 pi i theta}|^2 for real zeta in [0, 1)."""
    return (1.0 - zeta * zeta) / (1.0 - 2.0 * zeta * np.cos(2.0 * np.pi * theta) + zeta * zeta)


def poisson_kernel(zeta: Sequence[float], z) -> float | np.ndarray:
    """P_K(zeta, z) = prod_k (1 - zeta_k^2) / |1 - zeta_k z_k|^2.

    ``z`` is a TorusSample or an array of angle fractions whose last axis has
    length K; zeta_k = 0 is allowed and gives the constant 1.
    """
    zeta = np.asarray(zeta, dtype=float)
    if np.any(zeta < 0) or np.any(zeta >= 1):
        raise ValueError("kernel needs 0 <= zeta_k < 1")
    theta = np.asarray(z.angles if isinstance(z, TorusSample) else z, dtype=float)
    if theta.shape[-1] != zeta.shape[0]:
        raise ValueError("dimension mismatch between zeta and z")
    out = np.ones(theta.shape[:-1])
    for k, zk in enumerate(zeta):
        out = out * kernel_1d(zk, theta[..., k])
    return float(out) if out.ndim == 0 else out


@dataclass
class IdentityCheck:
    estimate: float
    error_bound: float
    exact_form: float
    method: str
    details: dict = field(default_factory=dict)

    @property
    def abs_error(self) -> float:
        return abs(self.estimate - self.exact_form)


def quadratic_form(B: IndexSet, c: Sequence[float], t: WeightSequence) -> float:
    """sum_{k,l} t^|beta_k - beta_l| c_k c_l."""
    c = np.asarray(c, dtype=float)
    M = pair_weights(B, t)
    return math.fsum((M * np.outer(c, c)).ravel().tolist())


def _dims(B: IndexSet) -> int:
    return max(m.max_position() for m in B)


def _exponents(B: IndexSet, K: int) -> np.ndarray:
    E, _ = B.exponent_matrix(range(1, K + 1))
    return E


def _grid_estimate(E: np.ndarray, c: np.ndarray, t: np.ndarray, n: int) -> float:
    K = E.shape[1]
    theta = np.arange(n) / n
    # per-dimension powers z^e for every exponent that occurs, and 1-D kernels
    zpow = [np.exp(2j * np.pi * np.outer(np.arange(E[:, k].max() + 1), theta)) for k in range(K)]
    ker = [kernel_1d(t[k], theta) for k in range(K)]
    tail_shape = (n,) * (K - 1)
    tail_ker = np.ones(tail_shape)
    for k in range(1, K):
        tail_ker = tail_ker[..., None] * ker[k] if k > 1 else ker[k].copy()
    total = []
    chunk = max(1, (1 << 20) // max(1, n ** (K - 1)))
    for a in range(0, n, chunk):
        rows = slice(a, min(a + chunk, n))
        F = np.zeros((rows.stop - rows.start,) + tail_shape, dtype=complex)
        for j in range(E.shape[0]):
            term = c[j] * zpow[0][E[j, 0], rows]
            for k in range(1, K):
                term = np.multiply.outer(term, zpow[k][E[j, k]])
            F += term
        w = ker[0][rows]
        if K > 1:
            w = np.multiply.outer(w, tail_ker)
        total.append(math.fsum(((F.real**2 + F.imag**2) * w).ravel().tolist()))
    return math.fsum(total) / n**K


def aliasing_bound(E: np.ndarray, c: np.ndarray, t: np.ndarray, n: int) -> float:
    """Certified bound on the trapezoid error with n points per dimension.

    The integrand's Fourier coefficient at m is at most
    (sum |c|)^2 prod_k t_k^max(|m_k| - D_k, 0), D_k the exponent spread, and the
    rule picks up every nonzero m in (n Z)^K.
    """
    D = E.max(axis=0) - E.min(axis=0)
    if np.any(n <= D):
        return math.inf
    excess = 2.0 * t ** (n - D) / (1.0 - t**n)
    return float(np.abs(c).sum() ** 2 * math.expm1(float(np.log1p(excess).sum())))


def _mc_estimate(E: np.ndarray, c: np.ndarray, t: np.ndarray, samples: int, seed: int,
                 sampler: str) -> tuple[float, float]:
    K = E.shape[1]
    s1, s2 = [], []
    for shard, start in enumerate(range(0, samples, SHARD_SIZE)):
        m = min(SHARD_SIZE, samples - start)
        # counter-based stream: key = seed, shard index in the high counter word
        gen = np.random.Generator(np.random.Philox(key=seed, counter=[0, 0, 0, shard]))
        u = gen.random((m, K))
        if sampler == "poisson":
            # Mobius image of uniform points has density P(t, .)
            w0 = np.exp(2j * np.pi * u)
            z = (w0 + t) / (1.0 + t * w0)
            weight = np.ones(m)
        elif sampler == "uniform":
            z = np.exp(2j * np.pi * u)
            weight = poisson_kernel(t, u)
        else:
            raise ValueError(f"unknown sampler {sampler!r}")
        F = np.zeros(m, dtype=complex)
        for j in range(E.shape[0]):
            F += c[j] * np.prod(z ** E[j][None, :], axis=1)
        vals = (F.real**2 + F.imag**2) * weight
        s1.append(math.fsum(vals.tolist()))
        s2.append(math.fsum((vals * vals).tolist()))
    mean = math.fsum(s1) / samples
    var = max(math.fsum(s2) / samples - mean * mean, 0.0) * samples / max(samples - 1, 1)
    return mean, math.sqrt(var / samples)


def verify_identity(B: IndexSet, c: Sequence[float], t: WeightSequence, method: str = "grid",
                    *, n_per_dim: int | None = None, budget: float = 1e-10,
                    samples: int = 1_000_000, seed: int = 0,
                    sampler: str = "poisson") -> IdentityCheck:
    """Compare the quadratic form with its integral representation.

    ``grid``: equispaced tensor trapezoid rule.  With ``n_per_dim`` fixed, the
    bound is the gap to the half-resolution rule; otherwise the resolution
    doubles from 16 until successive estimates agree to ``budget`` (relative),
    at most 1024 points per dimension.

    ``mc``: seeded Monte Carlo in shards of 65536, either importance sampled
    from the kernel (``sampler='poisson'``) or uniform on the torus with the
    kernel as weight.  The bound is one standard error.
    """
    c = np.asarray(c, dtype=float)
    if c.shape != (len(B),):
        raise ValueError("need one coefficient per member")
    exact = quadratic_form(B, c, t)
    K = _dims(B)
    if K == 0:
        # every member is the empty index; the integrand is the constant |sum c|^2
        val = float(c.sum() ** 2)
        return IdentityCheck(val, 0.0, exact, method, {"K": 0})
    tv = np.array([t.weight(j) for j in range(1, K + 1)])
    E = _exponents(B, K)
    if method == "grid":
        if K > GRID_MAX_DIM:
            raise ValueError(f"grid quadrature is capped at K = {GRID_MAX_DIM}; use mc")
        if tv.max() > GRID_MAX_WEIGHT:
            raise ValueError(f"weights above {GRID_MAX_WEIGHT} make the kernel too peaked "
                             "for the grid; use mc (importance sampling)")
        if n_per_dim is not None:
            est = _grid_estimate(E, c, tv, n_per_dim)
            half = _grid_estimate(E, c, tv, max(n_per_dim // 2, 1))
            return IdentityCheck(est, abs(est - half), exact, "grid",
                                 {"K": K, "n": n_per_dim,
                                  "aliasing_bound": aliasing_bound(E, c, tv, n_per_dim)})
        n = 16
        prev = _grid_estimate(E, c, tv, n)
        while True:
            n *= 2
            if n > GRID_MAX_POINTS:
                raise RuntimeError(f"grid did not settle to {budget} by {GRID_MAX_POINTS} points")
            est = _grid_estimate(E, c, tv, n)
            gap = abs(est - prev)
            if gap <= budget * max(abs(est), 1e-300):
                return IdentityCheck(est, gap, exact, "grid",
                                     {"K": K, "n": n, "aliasing_bound": aliasing_bound(E, c, tv, n)})
            prev = est
    if method == "mc":
        if samples <= 0:
            raise ValueError("need a positive number of samples")
        est, se = _mc_estimate(E, c, tv, samples, seed, sampler)
        return IdentityCheck(est, se, exact, "mc",
                             {"K": K, "samples": samples, "seed": seed, "sampler": sampler})
    raise ValueError(f"unknown method {method!r}")


def piden_partial(tau: WeightSequence, B: IndexSet, degree_cap: int, dims: int | None = None,
                  budget: int = PIDEN_BUDGET) -> float:
    """Truncated orthogonal expansion of the normalized sum:

        (1/N) prod_{k<=K} (1 - tau_k^2) sum_{beta <= cap} (sum_{j: beta_j <= beta} tau^(beta - beta_j))^2

    over the box of multi-indices with every coordinate <= degree_cap.  K
    defaults to max(1, largest support position); any larger K gives the same
    limit.  Nondecreasing in the cap and tends to s_form(tau, B).
    """
    K = dims if dims is not None else max(1, _dims(B))
    if K < _dims(B):
        raise ValueError("dims must cover every support position")
    if degree_cap < 0:
        raise ValueError("degree_cap must be nonnegative")
    states = (degree_cap + 1) ** K
    if states > budget:
        raise ValueError(f"{states} box states exceed the budget of {budget}")
    tv = np.array([tau.weight(j) for j in range(1, K + 1)])
    E = _exponents(B, K)
    shape = (degree_cap + 1,) * K
    inner = np.zeros(shape)
    grid = np.arange(degree_cap + 1)
    for row in E:
        if np.any(row > degree_cap):
            continue
        term = None
        for k in range(K):
            d = grid - row[k]
            f = np.where(d >= 0, tv[k] ** np.maximum(d, 0), 0.0)
            term = f if term is None else np.multiply.outer(term, f)
        inner += term
    pref = float(np.prod(1.0 - tv**2))
    return pref * math.fsum((inner**2).ravel().tolist()) / len(B)

