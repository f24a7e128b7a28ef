"""Universal partial order (UPO) on synthetic-channel indices.

Two channel-independent rules order the reliabilities of the 2^n synthetic
channels of a polar transform: turning any expansion bit from 0 into 1 can
only improve the channel, and moving a set bit to a more significant
position can only improve it as well.  The comparison implemented here is
the equivalent counting test: x precedes y exactly when, for every cutoff
k, x has at most as many ones at bit positions >= k as y does.  A closure
over the elementary moves serves as the reference oracle for that closed
form, and the transitive reduction of the relation gives the Hasse diagram
used by the doubling construction.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

MAX_ORACLE_BITS = 12


class Relation(enum.Enum):
    """Outcome of comparing two indices under the universal partial order."""

    LESS = "less"
    GREATER = "greater"
    EQUAL = "equal"
    INCOMPARABLE = "incomparable"


@dataclass(frozen=True)
class ChannelIndex:
    """A synthetic-channel index together with its fixed bit-width."""

    value: int
    n: int

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError(f"bit-width must be >= 1, got {self.n}")
        if not 0 <= self.value < (1 << self.n):
            raise ValueError(f"value {self.value} does not fit in {self.n} bits")

    @property
    def bits(self) -> tuple[int, ...]:
        """Binary expansion, most significant bit on the left."""
        return tuple((self.value >> k) & 1 for k in range(self.n - 1, -1, -1))

    def bit(self, k: int) -> int:
        """Bit at significance k (k = 0 is the least significant bit)."""
        return (self.value >> k) & 1


def binary_expansion(value: int, n: int) -> ChannelIndex:
    """Wrap an integer in [0, 2^n) as a width-n channel index."""
    return ChannelIndex(value, n)


def _dominates(xv: int, yv: int, n: int) -> bool:
    # Running one-counts from the most significant position down; x <= y
    # iff y's count never falls behind.
    cx = 0
    cy = 0
    for k in range(n - 1, -1, -1):
        cx += (xv >> k) & 1
        cy += (yv >> k) & 1
        if cx > cy:
            return False
    return True


def upo_compare(x: ChannelIndex, y: ChannelIndex) -> Relation:
    """Compare two same-width indices under the universal partial order."""
    if x.n != y.n:
        raise ValueError(f"width mismatch: {x.n} vs {y.n}")
    if x.value == y.value:
        return Relation.EQUAL
    if _dominates(x.value, y.value, x.n):
        return Relation.LESS
    if _dominates(y.value, x.value, x.n):
        return Relation.GREATER
    return Relation.INCOMPARABLE


def dominance_matrix(n: int) -> np.ndarray:
    """Boolean matrix M with M[x, y] true iff x is at most y in the UPO."""
    if n < 1:
        raise ValueError(f"bit-width must be >= 1, got {n}")
    size = 1 << n
    values = np.arange(size, dtype=np.int64)
    bits = (values[:, None] >> np.arange(n)[None, :]) & 1
    # suffix[v, k] = number of ones of v at positions >= k
    suffix = np.cumsum(bits[:, ::-1], axis=1)[:, ::-1]
    return np.all(suffix[:, None, :] <= suffix[None, :, :], axis=2)


def _elementary_successors(v: int, n: int):
    # Single-bit raise and adjacent (0,1) -> (1,0) swap; both moves go
    # strictly upward in reliability and strictly upward as integers.
    for k in range(n):
        if not (v >> k) & 1:
            yield v | (1 << k)
    for k in range(n - 1):
        if (v >> k) & 3 == 1:
            yield v ^ (3 << k)


def upo_closure_oracle(n: int) -> np.ndarray:
    """Reflexive-transitive closure of the elementary moves.

    Reference implementation for ``upo_compare`` on small widths: the
    multi-bit raises and non-adjacent swaps must all appear in this
    closure.  Returns the full boolean relation matrix.
    """
    if n < 1:
        raise ValueError(f"bit-width must be >= 1, got {n}")
    if n > MAX_ORACLE_BITS:
        raise ValueError(f"closure oracle limited to n <= {MAX_ORACLE_BITS}, got {n}")
    size = 1 << n
    nbytes = (size + 7) // 8
    reach = [0] * size
    closure = np.zeros((size, size), dtype=bool)
    # Every move increases the integer value, so one descending sweep
    # collects each node's complete upward reachability.
    for v in range(size - 1, -1, -1):
        mask = 1 << v
        for s in _elementary_successors(v, n):
            mask |= reach[s]
        reach[v] = mask
        row = np.frombuffer(mask.to_bytes(nbytes, "little"), dtype=np.uint8)
        closure[v] = np.unpackbits(row, bitorder="little")[:size]
    return closure


CoverEdge = tuple[int, int]


@dataclass(frozen=True)
class PartialOrderSet:
    """Hasse diagram at a fixed width: the irredundant cover-edge set whose
    transitive closure is the full relation."""

    n: int
    edges: frozenset[CoverEdge]

    def sorted_edges(self) -> list[CoverEdge]:
        return sorted(self.edges)


def cover_edges(n: int) -> PartialOrderSet:
    """Transitive reduction of the UPO at width n."""
    leq = dominance_matrix(n)
    strict = leq & ~np.eye(1 << n, dtype=bool)
    # An edge is redundant exactly when a two-step strict path joins its ends.
    s8 = strict.astype(np.uint8)
    covers = strict & ~((s8 @ s8) > 0)
    xs, ys = np.nonzero(covers)
    return PartialOrderSet(n, frozenset((int(a), int(b)) for a, b in zip(xs, ys)))


def recursive_construct(prev: PartialOrderSet) -> PartialOrderSet:
    """Cover set at width n+1 from the one at width n.

    Keeps the inherited edges, adds their bit-complement twins in the new
    upper half, and joins the halves with the edges {x, x + 2^(n-1)} for x
    in the upper half of the old index range.  The result is checked
    against ``cover_edges`` in the test suite; agreement is required, not
    assumed.
    """
    limit = 1 << prev.n
    for lo, hi in prev.edges:
        if not (0 <= lo < limit and 0 <= hi < limit) or lo == hi:
            raise ValueError(f"edge ({lo}, {hi}) is malformed at width {prev.n}")
    n = prev.n + 1
    top = (1 << n) - 1
    quarter = 1 << (prev.n - 1)
    edges = set(prev.edges)
    edges.update((top - hi, top - lo) for lo, hi in prev.edges)
    edges.update((x, x + quarter) for x in range(quarter, 2 * quarter))
    return PartialOrderSet(n, frozenset(edges))


def incomparable_pairs(n: int, cross_half_only: bool = False) -> list[tuple[int, int]]:
    """All unordered pairs the UPO leaves undecided, ascending by (min, max).

    With ``cross_half_only`` keep only pairs with x < 2^(n-1) <= y.  Widths
    below 3 have none.
    """
    if n < 1:
        raise ValueError(f"bit-width must be >= 1, got {n}")
    if n < 3:
        return []
    leq = dominance_matrix(n)
    inc = ~leq & ~leq.T
    half = 1 << (n - 1)
    xs, ys = np.nonzero(np.triu(inc, k=1))
    pairs = [(int(a), int(b)) for a, b in zip(xs, ys)]
    if cross_half_only:
        pairs = [(a, b) for a, b in pairs if a < half <= b]
    return pairs


def to_edge_list(poset: PartialOrderSet) -> str:
    """Plain-text cover edges, one "lo hi" per line, ascending."""
    return "".join(f"{lo} {hi}\n" for lo, hi in poset.sorted_edges())


def to_dot(poset: PartialOrderSet) -> str:
    """GraphViz digraph with one directed edge per cover relation."""
    lines = [f"digraph upo_{poset.n} {{"]
    lines.extend(f"  {v};" for v in range(1 << poset.n))
    lines.extend(f"  {lo} -> {hi};" for lo, hi in poset.sorted_edges())
    lines.append("}")
    return "\n".join(lines) + "\n"
