"""Generalized GCD matrices and their extreme eigenvalues."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.linalg

from .gcdcore import IndexSet, IntegerSequence, gcd_ratio_block, pair_weights
from .weights import WeightSequence

DEFAULT_TOL = 1e-10
SWEEP_CAP = 30
JACOBI_MAX_ORDER = 512


class ConvergenceError(RuntimeError):
    def __init__(self, msg: str, residual: float, iterations: int):
        super().__init__(f"{msg} (residual {residual:.3e} after {iterations} iterations)")
        self.residual = residual
        self.iterations = iterations


@dataclass
class GcdMatrix:
    """Symmetric, unit-diagonal, positive definite matrix with its origin recorded."""

    entries: np.ndarray
    provenance: dict = field(default_factory=dict)

    @property
    def order(self) -> int:
        return self.entries.shape[0]

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            for row in self.entries:
                w.writerow([repr(float(x)) for x in row])

    @classmethod
    def from_csv(cls, path: str | Path) -> "GcdMatrix":
        with open(path, newline="") as fh:
            rows = [[float(x) for x in row] for row in csv.reader(fh) if row]
        return cls(np.array(rows), {"source": str(path)})


@dataclass
class EigenResult:
    lambda_min: float
    lambda_max: float
    iterations: int
    residual: float
    method: str = "jacobi"


def build_matrix(B: IndexSet, t: WeightSequence) -> GcdMatrix:
    """(t ** |beta_k - beta_l|)_{k,l}."""
    M = pair_weights(B, t)
    np.fill_diagonal(M, 1.0)
    return GcdMatrix(M, {"index_set": B.to_json(), "weights": t.describe()})


def build_gcd_matrix(seq, alpha: float) -> GcdMatrix:
    """(gcd(n_k, n_l)**(2 alpha) / (n_k n_l)**alpha)_{k,l}."""
    seq = IntegerSequence.of(seq)
    M = gcd_ratio_block(seq.values, seq.values, alpha)
    np.fill_diagonal(M, 1.0)
    return GcdMatrix(M, {"sequence": list(seq.values), "alpha": alpha})


def _round_robin(n: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """Pairings of 0..n-1 (n even) so every pair meets once per sweep."""
    players = list(range(n))
    rounds = []
    for _ in range(n - 1):
        half = n // 2
        p = np.array(players[:half])
        q = np.array(players[half:][::-1])
        rounds.append((np.minimum(p, q), np.maximum(p, q)))
        players = [players[0]] + [players[-1]] + players[1:-1]
    return rounds


def off_norm(A: np.ndarray) -> float:
    off = A - np.diag(np.diag(A))
    return float(np.sqrt(np.sum(off * off)))


def jacobi_eigenvalues(A: np.ndarray, tol: float = DEFAULT_TOL,
                       sweep_cap: int = SWEEP_CAP) -> tuple[np.ndarray, int, float]:
    """All eigenvalues of a symmetric matrix by cyclic Jacobi.

    Each sweep visits every off-diagonal pair once, grouped into rounds of
    disjoint pairs (round-robin order) so a whole round is applied as one
    vectorized row and column update.  Stops once the off-diagonal Frobenius
    norm is <= tol.  Returns (eigenvalues ascending, sweeps, residual).
    """
    A = np.array(A, dtype=float)
    n = A.shape[0]
    if A.shape != (n, n):
        raise ValueError("matrix must be square")
    if not np.allclose(A, A.T, rtol=0, atol=1e-12):
        raise ValueError("matrix must be symmetric")
    A = 0.5 * (A + A.T)
    m = n + (n % 2)
    if m != n:
        # a decoupled padding row; its eigenvalue 0 is dropped at the end
        A = np.pad(A, ((0, 1), (0, 1)))
    rounds = _round_robin(m) if m > 1 else []
    res = off_norm(A)
    sweeps = 0
    while res > tol:
        if sweeps >= sweep_cap:
            raise ConvergenceError("Jacobi sweep cap reached", res, sweeps)
        for p, q in rounds:
            apq = A[p, q]
            live = apq != 0.0
            if not live.any():
                continue
            app, aqq = A[p, p], A[q, q]
            theta = np.where(live, (aqq - app) / (2.0 * np.where(live, apq, 1.0)), 0.0)
            sgn = np.where(theta >= 0.0, 1.0, -1.0)
            with np.errstate(over="ignore"):
                # huge theta: tan ~ 1/(2 theta), which the formula gives as 0
                tt = np.where(live, sgn / (np.abs(theta) + np.sqrt(1.0 + theta * theta)), 0.0)
            c = 1.0 / np.sqrt(1.0 + tt * tt)
            s = tt * c
            # A <- R A R^T as two row updates: rows of A, then rows of (RA)^T
            for _ in range(2):
                rp, rq = A[p, :], A[q, :]
                A[p, :], A[q, :] = (c[:, None] * rp - s[:, None] * rq,
                                    s[:, None] * rp + c[:, None] * rq)
                A = np.ascontiguousarray(A.T)
            A[p, q] = 0.0
            A[q, p] = 0.0
        sweeps += 1
        res = off_norm(A)
    ev = np.diag(A).copy()
    if m != n:
        ev = np.delete(ev, n)
    return np.sort(ev), sweeps, res


def _rayleigh_residual(M: np.ndarray, x: np.ndarray) -> tuple[float, float]:
    Mx = M @ x
    rho = float(x @ Mx)
    return rho, float(np.linalg.norm(Mx - rho * x))


def power_extremes(M: np.ndarray, tol: float = DEFAULT_TOL, max_iter: int = 20_000,
                   seed: int = 0) -> EigenResult:
    """Power iteration for the top eigenvalue and Cholesky-backed inverse
    iteration for the bottom one.  Residual is max ||M x - rho x|| of the two
    Rayleigh pairs.
    """
    n = M.shape[0]
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(n)
    x /= np.linalg.norm(x)
    top = res_top = None
    for it in range(1, max_iter + 1):
        y = M @ x
        x = y / np.linalg.norm(y)
        top, res_top = _rayleigh_residual(M, x)
        if res_top <= tol:
            break
    else:
        raise ConvergenceError("power iteration did not converge", res_top, max_iter)
    factor = scipy.linalg.cho_factor(M)
    x = rng.standard_normal(n)
    x /= np.linalg.norm(x)
    bottom = res_bot = None
    for it2 in range(1, max_iter + 1):
        y = scipy.linalg.cho_solve(factor, x)
        x = y / np.linalg.norm(y)
        bottom, res_bot = _rayleigh_residual(M, x)
        if res_bot <= tol:
            break
    else:
        raise ConvergenceError("inverse iteration did not converge", res_bot, max_iter)
    return EigenResult(bottom, top, it + it2, max(res_top, res_bot), "power")


def eig_extremes(M, tol: float = DEFAULT_TOL, method: str = "auto") -> EigenResult:
    """Smallest and largest eigenvalue.  Jacobi up to order 512, power and
    inverse iteration above that (or when ``method='power'``).

    lambda_max is at least every Rayleigh quotient, so the all-ones quotient
    is folded in; when the all-ones vector is itself the top eigenvector this
    keeps rounding in the sweeps from putting lambda_max below it.
    """
    A = M.entries if isinstance(M, GcdMatrix) else np.asarray(M, dtype=float)
    if tol <= 0:
        raise ValueError("tol must be positive")
    if method == "power" or (method == "auto" and A.shape[0] > JACOBI_MAX_ORDER):
        out = power_extremes(A, tol)
    else:
        ev, sweeps, res = jacobi_eigenvalues(A, tol)
        out = EigenResult(float(ev[0]), float(ev[-1]), sweeps, res, "jacobi")
    out.lambda_max = max(out.lambda_max, rayleigh_all_ones(A))
    return out


def sandwich_bounds(t: WeightSequence, N: int) -> tuple[float, float]:
    """(prod_{j<N} (1-t_j)/(1+t_j), prod_{j<N} (1+t_j)/(1-t_j))."""
    lo = hi = 1.0
    for j in range(1, N):
        x = t.weight(j)
        lo *= (1.0 - x) / (1.0 + x)
        hi *= (1.0 + x) / (1.0 - x)
    return lo, hi


def theorem41_rhs(N: int, gamma_max: float) -> float:
    """(e^2 + 1) (floor(log N) + 2) gamma_max."""
    if N < 1:
        raise ValueError("N must be positive")
    if gamma_max < 1:
        raise ValueError("gamma_max is a sup of normalized sums, so it is >= 1")
    return (math.e**2 + 1.0) * (math.floor(math.log(N)) + 2) * gamma_max


def rayleigh_all_ones(M) -> float:
    """1^T M 1 / N."""
    A = M.entries if isinstance(M, GcdMatrix) else np.asarray(M, dtype=float)
    return math.fsum(A.ravel().tolist()) / A.shape[0]
