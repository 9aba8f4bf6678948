"""Weight sequences t in (0,1)^infinity, the doubling map and the threshold index."""

from __future__ import annotations

import math
import threading
from pathlib import Path
from typing import Sequence

import numpy as np

from .multiindex import PrimeTable, default_table


def eta_scalar(x: float) -> float:
    """Double x below 1/2, leave it alone on [1/2, 1)."""
    return 2.0 * x if x < 0.5 else x


class WeightSequence:
    """A sequence t_1, t_2, ... with every t_j in (0, 1).

    Either an explicit finite list (which must be decreasing) or the power law
    t_j = p_j ** -alpha over the primes, materialized lazily.  ``doublings``
    counts how many times the doubling map has been applied on top of the
    base sequence; such derived sequences need not be decreasing.
    """

    def __init__(self, values: Sequence[float] | None = None, *, alpha: float | None = None,
                 doublings: int = 0, table: PrimeTable | None = None, _checked: bool = False):
        if (values is None) == (alpha is None):
            raise ValueError("give exactly one of an explicit list or alpha")
        self.alpha = None if alpha is None else float(alpha)
        self.doublings = int(doublings)
        self.table = table
        self._lock = threading.Lock()
        self._cache: dict[int, float] = {}
        if values is not None:
            vals = tuple(float(v) for v in values)
            if not _checked:
                for j, v in enumerate(vals, start=1):
                    if not 0.0 < v < 1.0:
                        raise ValueError(f"t_{j} = {v} is not in (0, 1)")
                for j in range(1, len(vals)):
                    if vals[j] > vals[j - 1]:
                        raise ValueError(
                            f"explicit weights must be decreasing: t_{j} = {vals[j - 1]} "
                            f"< t_{j + 1} = {vals[j]}")
            self.values: tuple[float, ...] | None = vals
        else:
            if not 0.0 < self.alpha <= 1.0:
                raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
            self.values = None

    @property
    def length(self) -> float:
        """Number of defined entries (inf for the power law)."""
        return math.inf if self.values is None else len(self.values)

    def base_weight(self, j: int) -> float:
        if j < 1:
            raise IndexError("weights are indexed from 1")
        if self.values is not None:
            if j > len(self.values):
                raise IndexError(f"t_{j} undefined: explicit list has {len(self.values)} entries")
            return self.values[j - 1]
        p = (self.table or default_table()).prime(j)
        return float(p) ** -self.alpha

    def weight(self, j: int) -> float:
        """t_j (1-based)."""
        if self.doublings == 0 and self.values is not None:
            return self.base_weight(j)
        with self._lock:
            hit = self._cache.get(j)
        if hit is not None:
            return hit
        x = self.base_weight(j)
        for _ in range(self.doublings):
            x = eta_scalar(x)
        with self._lock:
            self._cache[j] = x
        return x

    __getitem__ = weight

    def prefix(self, n: int) -> np.ndarray:
        """t_1 .. t_n as an array."""
        return np.array([self.weight(j) for j in range(1, n + 1)], dtype=float)

    def is_decreasing(self, n: int) -> bool:
        p = self.prefix(n)
        return bool(np.all(p[1:] <= p[:-1]))

    def rearranged(self, n: int) -> tuple[np.ndarray, list[int]]:
        """First n entries sorted descending, plus the 1-based source positions.

        Stable, so an already decreasing prefix comes back unchanged with the
        identity permutation.
        """
        p = self.prefix(n)
        order = np.argsort(-p, kind="stable")
        return p[order], [int(i) + 1 for i in order]

    def describe(self) -> dict:
        d: dict = {"doublings": self.doublings}
        if self.values is None:
            d["alpha"] = self.alpha
        else:
            d["values"] = list(self.values)
        return d

    def __repr__(self) -> str:
        src = f"alpha={self.alpha}" if self.values is None else f"values={list(self.values)}"
        return f"WeightSequence({src}, doublings={self.doublings})"


def power_law(alpha: float, table: PrimeTable | None = None) -> WeightSequence:
    """t_j = p_j ** -alpha."""
    return WeightSequence(alpha=alpha, table=table)


def explicit(values: Sequence[float]) -> WeightSequence:
    return WeightSequence(values)


def eta(t: WeightSequence) -> WeightSequence:
    """Apply the doubling map coordinatewise.  Values stay in (0, 1)."""
    return WeightSequence(t.values, alpha=t.alpha, doublings=t.doublings + 1,
                          table=t.table, _checked=True)


def kappa(t: WeightSequence) -> int:
    """0 if t_1 < 1/2, else the last index j with t_j >= 1/2."""
    if t.values is not None:
        last = 0
        for j in range(1, len(t.values) + 1):
            if t.weight(j) >= 0.5:
                last = j
        return last
    # power law: once the base weight drops below 2**-(d+1) the d-fold
    # doubled weight stays below 1/2 for good
    cutoff = 2.0 ** -(t.doublings + 1)
    last = 0
    j = 1
    while True:
        if t.weight(j) >= 0.5:
            last = j
        if t.base_weight(j) < cutoff:
            return last
        j += 1


def load_weights(path: str | Path) -> WeightSequence:
    """One decimal per line; blank lines and '#' comments are skipped."""
    vals = []
    for line in Path(path).read_text().splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            vals.append(float(line))
    if not vals:
        raise ValueError(f"no weights in {path}")
    return WeightSequence(vals)
