"""GCD sums over integer sequences and the abstract sums over index sets.

Two independent routes compute the same quantity:

* :func:`gcd_sum` works on the integers directly (integer gcd, float powers)
  and never touches a factorization.
* :func:`s_form` works on multi-indices and a weight sequence.

With power-law weights and ``B = factorize(seq)`` they must agree.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .multiindex import (
    UINT64_MAX, MultiIndex, PrimeTable, as_multiindex, compose, default_table,
    factorize, union_support,
)
from .weights import WeightSequence

DEFAULT_BLOCK = 256
INT64_MAX = 2**63 - 1


@dataclass(frozen=True)
class IntegerSequence:
    """Strictly increasing positive integers n_1 < ... < n_N."""

    values: tuple[int, ...]

    def __post_init__(self):
        vals = tuple(int(v) for v in self.values)
        object.__setattr__(self, "values", vals)
        if not vals:
            raise ValueError("a sequence needs at least one member")
        if vals[0] < 1:
            raise ValueError("members must be positive")
        if any(b <= a for a, b in zip(vals, vals[1:])):
            raise ValueError("members must be strictly increasing")
        if vals[-1] > UINT64_MAX:
            raise OverflowError("members exceed the 64-bit integer width")

    @classmethod
    def of(cls, values: Iterable[int]) -> "IntegerSequence":
        """Sort distinct values into a sequence; duplicates are an error."""
        if isinstance(values, IntegerSequence):
            return values
        vals = sorted(int(v) for v in values)
        if len(set(vals)) != len(vals):
            raise ValueError("members must be distinct")
        return cls(tuple(vals))

    def __len__(self) -> int:
        return len(self.values)

    def __iter__(self):
        return iter(self.values)

    def scaled(self, a: int) -> "IntegerSequence":
        return IntegerSequence(tuple(a * v for v in self.values))


@dataclass(frozen=True)
class IndexSet:
    """An ordered set of N >= 1 distinct multi-indices."""

    members: tuple[MultiIndex, ...]

    def __post_init__(self):
        mem = tuple(as_multiindex(m) for m in self.members)
        object.__setattr__(self, "members", mem)
        if not mem:
            raise ValueError("an index set needs at least one member")
        if len(set(mem)) != len(mem):
            raise ValueError("index set members must be distinct")

    @classmethod
    def from_integers(cls, seq: Iterable[int], table: PrimeTable | None = None) -> "IndexSet":
        return cls(tuple(factorize(n, table) for n in seq))

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def __contains__(self, beta) -> bool:
        return as_multiindex(beta) in set(self.members)

    def support(self) -> list[int]:
        """Sorted union of the members' supports."""
        return union_support(self.members)

    def max_position(self) -> int:
        return max(m.max_position() for m in self.members)

    def to_integers(self, table: PrimeTable | None = None) -> list[int]:
        return [compose(m, table) for m in self.members]

    def exponent_matrix(self, positions: Sequence[int] | None = None) -> tuple[np.ndarray, list[int]]:
        """Dense N x K exponent array over ``positions`` (default: the union support)."""
        pos = list(positions) if positions is not None else self.support()
        col = {j: i for i, j in enumerate(pos)}
        E = np.zeros((len(self.members), len(pos)), dtype=np.int64)
        for r, m in enumerate(self.members):
            for j, e in m.items:
                E[r, col[j]] = e
        return E, pos

    def as_set(self) -> frozenset[MultiIndex]:
        return frozenset(self.members)

    def to_json(self) -> list[dict[str, int]]:
        return [{str(j): e for j, e in m.items} for m in self.members]

    @classmethod
    def from_json(cls, data: Sequence[dict]) -> "IndexSet":
        return cls(tuple(MultiIndex.from_dict({int(k): int(v) for k, v in d.items()}) for d in data))


def _gcd_matrix_block(rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
    if rows.dtype == object or cols.dtype == object:
        g = np.frompyfunc(math.gcd, 2, 1)(rows[:, None], cols[None, :])
        return g.astype(float)
    return np.gcd(rows[:, None], cols[None, :]).astype(float)


def _as_int_array(values: Sequence[int]) -> np.ndarray:
    if max(values) > INT64_MAX:
        return np.array(values, dtype=object)
    return np.array(values, dtype=np.int64)


def gcd_ratio_block(rows: Sequence[int], cols: Sequence[int], alpha: float) -> np.ndarray:
    """(gcd(m, n)**2 / (m n)) ** alpha for m in rows, n in cols."""
    r = _as_int_array(rows)
    c = _as_int_array(cols)
    g = _gcd_matrix_block(r, c)
    ratio = (g / r.astype(float)[:, None]) * (g / c.astype(float)[None, :])
    return ratio if alpha == 1.0 else ratio ** alpha


def gcd_sum(seq, alpha: float, normalized: bool = True, block_size: int = DEFAULT_BLOCK) -> float:
    """sum_{k,l} gcd(n_k, n_l)**(2 alpha) / (n_k n_l)**alpha, over all ordered pairs.

    Rows are processed in blocks of ``block_size``; each block is summed with
    exact rounding and the block totals are combined in row order, so the
    result does not depend on anything but the block size.
    """
    seq = IntegerSequence.of(seq)
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
    vals = list(seq.values)
    partial = []
    for a in range(0, len(vals), block_size):
        block = gcd_ratio_block(vals[a:a + block_size], vals, alpha)
        partial.append(math.fsum(block.ravel().tolist()))
    total = math.fsum(partial)
    return total / len(vals) if normalized else total


def pair_weights(B: IndexSet, t: WeightSequence, rows: slice | None = None) -> np.ndarray:
    """The matrix t ** |beta_k - beta_l| (optionally a block of rows)."""
    E, pos = B.exponent_matrix()
    w = np.array([t.weight(j) for j in pos], dtype=float)
    Er = E if rows is None else E[rows]
    if not pos:
        return np.ones((Er.shape[0], E.shape[0]))
    D = np.abs(Er[:, None, :] - E[None, :, :])
    return np.prod(w[None, None, :] ** D, axis=2)


def s_form(t: WeightSequence, B: IndexSet, normalized: bool = True,
           block_size: int = DEFAULT_BLOCK) -> float:
    """(1/N) sum_{k,l} t ** |beta_k - beta_l| (total sum if not normalized)."""
    if not isinstance(B, IndexSet):
        B = IndexSet(tuple(B))
    N = len(B)
    partial = []
    for a in range(0, N, block_size):
        block = pair_weights(B, t, slice(a, a + block_size))
        partial.append(math.fsum(block.ravel().tolist()))
    total = math.fsum(partial)
    return total / N if normalized else total


def extremal_squarefree(r: int, table: PrimeTable | None = None) -> IntegerSequence:
    """All 2**r square-free products of the first r primes, increasing."""
    if r < 1:
        raise ValueError("r must be positive")
    table = table or default_table()
    primes = [table.prime(j) for j in range(1, r + 1)]
    if math.prod(primes) > UINT64_MAX:
        raise OverflowError(f"product of the first {r} primes exceeds 64 bits")
    vals = [1]
    for p in primes:
        vals = vals + [v * p for v in vals]
    return IntegerSequence(tuple(sorted(vals)))


def squarefree_closed_form(r: int, alpha: float, table: PrimeTable | None = None) -> float:
    """N * prod_{j <= r} (1 + p_j ** -alpha), N = 2**r: the total (unnormalized) sum."""
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
    table = table or default_table()
    out = float(2**r)
    for j in range(1, r + 1):
        out *= 1.0 + float(table.prime(j)) ** -alpha
    return out


def extremal_primes(N: int, table: PrimeTable | None = None) -> IntegerSequence:
    """The first N primes."""
    table = table or default_table()
    if N > table.count:
        raise ValueError(f"prime table holds only {table.count} primes")
    return IntegerSequence(tuple(int(p) for p in table.primes[:N]))


def first_integers(N: int) -> IntegerSequence:
    return IntegerSequence(tuple(range(1, N + 1)))


def load_sequence(path: str | Path) -> IntegerSequence:
    """One positive integer per line."""
    vals = []
    for line in Path(path).read_text().splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            vals.append(int(line))
    return IntegerSequence(tuple(vals))
