"""Sparse multi-indices over the primes.

Every positive integer n is written as p**beta, where p = (2, 3, 5, 7, ...)
and beta is a finitely supported vector of exponents.  Positions are
1-based: position 1 is the prime 2.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

UINT64_MAX = 2**64 - 1
DEFAULT_PRIME_COUNT = 10_000


class PrimeTableError(ValueError):
    """A prime position or prime factor lies outside the sieve table."""


class PrimeTable:
    """The first ``count`` primes, generated once by an Eratosthenes sieve."""

    def __init__(self, count: int = DEFAULT_PRIME_COUNT):
        if count < 1:
            raise ValueError("prime table needs at least one prime")
        self.count = count
        self.primes = _first_primes(count)
        self._list = self.primes.tolist()
        self._position = {int(p): i + 1 for i, p in enumerate(self.primes)}

    @classmethod
    def up_to(cls, limit: int) -> "PrimeTable":
        """Table holding every prime <= limit."""
        count = int(np.count_nonzero(_sieve(limit)))
        return cls(max(count, 1))

    @property
    def largest(self) -> int:
        return int(self.primes[-1])

    def prime(self, position: int) -> int:
        if not 1 <= position <= self.count:
            raise PrimeTableError(
                f"prime position {position} outside table of {self.count} primes")
        return self._list[position - 1]

    def position(self, p: int) -> int:
        try:
            return self._position[p]
        except KeyError:
            raise PrimeTableError(f"{p} is not a prime in the table") from None

    def __repr__(self) -> str:
        return f"PrimeTable(count={self.count}, largest={self.largest})"


def _sieve(limit: int) -> np.ndarray:
    flags = np.ones(limit + 1, dtype=bool)
    flags[:2] = False
    for p in range(2, int(limit**0.5) + 1):
        if flags[p]:
            flags[p * p::p] = False
    return flags


def _first_primes(count: int) -> np.ndarray:
    # p_n < n (log n + log log n) for n >= 6
    n = max(count, 6)
    limit = int(n * (np.log(n) + np.log(np.log(n)))) + 10
    return np.flatnonzero(_sieve(limit))[:count].astype(np.int64)


_default_table: PrimeTable | None = None
_default_lock = threading.Lock()


def default_table() -> PrimeTable:
    global _default_table
    with _default_lock:
        if _default_table is None:
            _default_table = PrimeTable()
        return _default_table


@dataclass(frozen=True, order=True)
class MultiIndex:
    """Finitely supported exponent vector, stored as sorted (position, exponent) pairs.

    Zero exponents are never stored; the empty index represents n = 1.
    """

    items: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        prev = 0
        for j, e in self.items:
            if j <= prev:
                raise ValueError("positions must be strictly increasing and >= 1")
            if e <= 0:
                raise ValueError("stored exponents must be positive")
            prev = j

    @classmethod
    def from_dict(cls, entries: Mapping[int, int]) -> "MultiIndex":
        return cls(tuple(sorted((int(j), int(e)) for j, e in entries.items() if e != 0)))

    @classmethod
    def unit(cls, j: int) -> "MultiIndex":
        return cls(((j, 1),))

    def as_dict(self) -> dict[int, int]:
        return dict(self.items)

    def __getitem__(self, j: int) -> int:
        for pos, e in self.items:
            if pos == j:
                return e
            if pos > j:
                break
        return 0

    def __len__(self) -> int:
        return len(self.items)

    def __bool__(self) -> bool:
        return bool(self.items)

    def support(self) -> frozenset[int]:
        return frozenset(j for j, _ in self.items)

    def max_position(self) -> int:
        """Largest position in the support; 0 for the empty index."""
        return self.items[-1][0] if self.items else 0

    def degree(self) -> int:
        return sum(e for _, e in self.items)

    def __add__(self, other: "MultiIndex") -> "MultiIndex":
        d = self.as_dict()
        for j, e in other.items:
            d[j] = d.get(j, 0) + e
        return MultiIndex.from_dict(d)

    def __sub__(self, other: "MultiIndex") -> "MultiIndex":
        d = self.as_dict()
        for j, e in other.items:
            d[j] = d.get(j, 0) - e
            if d[j] < 0:
                raise ValueError(f"{self} - {other} is negative at position {j}")
        return MultiIndex.from_dict(d)

    def with_exponent(self, j: int, e: int) -> "MultiIndex":
        d = self.as_dict()
        d[j] = e
        return MultiIndex.from_dict(d)

    def __repr__(self) -> str:
        return "{" + ", ".join(f"{j}:{e}" for j, e in self.items) + "}"


EMPTY = MultiIndex()


def as_multiindex(value) -> MultiIndex:
    """Coerce a MultiIndex, a {position: exponent} mapping or pair sequence."""
    if isinstance(value, MultiIndex):
        return value
    if isinstance(value, Mapping):
        return MultiIndex.from_dict({int(k): int(v) for k, v in value.items()})
    return MultiIndex.from_dict(dict(value))


def factorize(n: int, table: PrimeTable | None = None) -> MultiIndex:
    """Exponent vector of ``n`` by trial division against the prime table.

    >>> factorize(12)
    {1:2, 2:1}
    """
    n = int(n)
    if n < 1:
        raise ValueError(f"factorize needs n >= 1, got {n}")
    if n > UINT64_MAX:
        raise OverflowError(f"{n} exceeds the 64-bit integer width")
    table = table or default_table()
    out: dict[int, int] = {}
    rest = n
    for pos, p in enumerate(table._list, start=1):
        if p * p > rest:
            break
        if rest % p == 0:
            e = 0
            while rest % p == 0:
                rest //= p
                e += 1
            out[pos] = e
    if rest > 1:
        if rest > table.largest:
            # either rest is prime or it has a factor beyond the table
            raise PrimeTableError(
                f"{n} has a prime factor beyond the table "
                f"(cofactor {rest}, largest tabled prime {table.largest})")
        out[table.position(rest)] = out.get(table.position(rest), 0) + 1
    return MultiIndex.from_dict(out)


def compose(beta: MultiIndex, table: PrimeTable | None = None) -> int:
    """Inverse of :func:`factorize`; overflow past 64 bits raises."""
    table = table or default_table()
    n = 1
    for j, e in as_multiindex(beta).items:
        n *= table.prime(j) ** e
        if n > UINT64_MAX:
            raise OverflowError(f"p**{beta} exceeds the 64-bit integer width")
    return n


def abs_diff(beta: MultiIndex, mu: MultiIndex) -> MultiIndex:
    """Coordinatewise |beta - mu|."""
    d = beta.as_dict()
    for j, e in mu.items:
        d[j] = abs(d.get(j, 0) - e)
    return MultiIndex.from_dict(d)


def leq(beta: MultiIndex, mu: MultiIndex) -> bool:
    """Coordinatewise partial order beta <= mu."""
    return all(e <= mu[j] for j, e in beta.items)


def weight_power(t, beta: MultiIndex) -> float:
    """prod_j t_j ** beta_j; ``t`` is anything with 1-based ``weight(j)``."""
    out = 1.0
    for j, e in beta.items:
        out *= t.weight(j) ** e
    return out


def union_support(members: Iterable[MultiIndex]) -> list[int]:
    s: set[int] = set()
    for m in members:
        s.update(m.support())
    return sorted(s)
