"""Reduction of an index set to a canonical one with no smaller sum.

Two passes.  The first (closure) lowers j-maximal members until every
j-maximal member beta also has beta - e_j in the set; this forces the union
of the supports down to at most N - 1 positions.  The second (chain
compaction) groups members that differ only in coordinate j and slides each
group down to consecutive exponents 0, 1, ..., #group - 1.  Compaction can
lose mass at weight t, but never at the doubled weight, which is why the
result is compared at eta(t).

Coordinates are processed in ascending order.
"""

from __future__ import annotations

import logging
from collections import defaultdict

from .gcdcore import IndexSet
from .multiindex import MultiIndex
from .weights import WeightSequence, eta, kappa

log = logging.getLogger(__name__)


def is_kappa_canonical(B: IndexSet, k: int) -> bool:
    """beta in B with beta_j >= 1 for some k < j <= N forces beta - e_j in B."""
    members = set(B.members)
    N = len(members)
    for beta in members:
        for j, e in beta.items:
            if k < j <= N and beta.with_exponent(j, e - 1) not in members:
                return False
    return True


def has_closure_property(B: IndexSet) -> bool:
    """Every j-maximal member beta has beta - e_j in B, for every j."""
    members = set(B.members)
    for j in B.support():
        top = max(m[j] for m in members)
        for m in members:
            if m[j] == top and m.with_exponent(j, top - 1) not in members:
                return False
    return True


def _close_coordinate(members: list[MultiIndex], j: int) -> bool:
    """One coordinate of the closure pass.  Returns True if anything moved."""
    moved = False
    while True:
        level = max(m[j] for m in members)
        if level == 0:
            return moved
        present = set(members)
        hits = [i for i, m in enumerate(members)
                if m[j] == level and m.with_exponent(j, level - 1) not in present]
        if not hits:
            return moved
        # every such member is lowered in the same pass
        for i in hits:
            members[i] = members[i].with_exponent(j, level - 1)
        moved = True
        if len(set(members)) != len(members):
            raise AssertionError("closure step produced a repeated member")


def part1_reduce(B: IndexSet) -> IndexSet:
    """Closure pass.  Keeps N and member order; never decreases the sum.

    Lowering coordinate j can spoil the property for a coordinate handled
    earlier, so the sweep over coordinates repeats until nothing moves.  It
    terminates because every move lowers the total degree by one.
    """
    members = list(B.members)
    while True:
        moved = False
        for j in sorted({j for m in members for j in m.support()}):
            moved |= _close_coordinate(members, j)
        if not moved:
            return IndexSet(tuple(members))


def _compact_coordinate(members: list[MultiIndex], j: int) -> None:
    chains: dict[MultiIndex, list[int]] = defaultdict(list)
    for i, m in enumerate(members):
        chains[m.with_exponent(j, 0)].append(i)
    for base, idx in chains.items():
        idx.sort(key=lambda i: members[i][j])
        for rank, i in enumerate(idx):
            members[i] = base.with_exponent(j, rank)


def part2_compactify(B: IndexSet, k: int) -> IndexSet:
    """Chain compaction for every coordinate j > k in the union support.

    Member order is kept: the r-th lowest member of a chain becomes the chain
    base plus r e_j.
    """
    N = len(B)
    if k >= N:
        raise ValueError(f"threshold index {k} must be below the set size {N}")
    members = list(B.members)
    for j in B.support():
        if j > k:
            _compact_coordinate(members, j)
    out = IndexSet(tuple(members))
    return out


def canonical_reduce(B: IndexSet, t: WeightSequence) -> tuple[IndexSet, WeightSequence]:
    """Return (B', eta(t)) with B' k-canonical for k = kappa(t), #B' = N,
    at most N - 1 support positions, and s_form(eta(t), B') >= s_form(t, B).
    """
    k = kappa(t)
    if k >= len(B):
        raise ValueError(f"kappa(t) = {k} must be below the set size {len(B)}")
    closed = part1_reduce(B)
    compact = part2_compactify(closed, k)
    log.debug("canonical_reduce: N=%d kappa=%d support %d -> %d",
              len(B), k, len(B.support()), len(compact.support()))
    return compact, eta(t)
