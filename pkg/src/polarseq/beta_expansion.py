"""Polarization weights and the exact geometry of their total orders.

Ranking index x by the weight sum_k b_k beta^k (b = binary expansion of x)
turns code construction into a one-parameter family of total orders.  The
parameter axis (1, inf) splits into finitely many open intervals on which
the order is constant; the split points are the real roots in (1, 2) of
the signed 0/1 difference polynomials of order-undecided index pairs.
This module evaluates the weights, isolates those roots, derives the
interval structure, and narrows an interval from externally decided pairs.

All difference polynomials here have coefficients in {-1, 0, +1} and a
leading coefficient of +1 once trimmed, so every real root lies below 2:
at beta = 2 the leading power already outweighs the sum of all lower ones.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from polarseq.partial_order import ChannelIndex, Relation, incomparable_pairs

TIE_TOL = 1e-9        # weight collision threshold in rank_by_pw
ROOT_TOL = 1e-9       # isolation width for reported roots
DEDUP_TOL = 1e-8      # distinct-breakpoint separation
BOUNDARY_TOL = 1e-7   # roots this close to an interval end are not inside
SCAN_STEP = 1e-3      # sign-change scan resolution


class IllConditionedBetaError(ValueError):
    """The supplied beta cannot rank the indices: two weights collide,
    which happens exactly when beta sits numerically on a breakpoint."""

    def __init__(self, beta: float, pair: tuple[int, int], gap: float):
        self.beta = beta
        self.pair = pair
        self.gap = gap
        super().__init__(
            f"beta={beta!r} is ill-conditioned: indices {pair[0]} and "
            f"{pair[1]} have weights within {gap:.3e}"
        )


class AmbiguousIntervalError(ValueError):
    """The interval straddles a breakpoint, so no single order covers it."""

    def __init__(self, interval: "BetaInterval", breakpoint_value: float,
                 pair: tuple[int, int]):
        self.interval = interval
        self.breakpoint_value = breakpoint_value
        self.pair = pair
        super().__init__(
            f"interval {interval} contains breakpoint {breakpoint_value:.9f} "
            f"of pair {pair}"
        )


class InfeasibleConstraintsError(ValueError):
    """No sub-interval satisfies every decided orientation."""

    def __init__(self, pairs: list[tuple[int, int]], interval: "BetaInterval"):
        self.pairs = pairs
        self.interval = interval
        super().__init__(
            f"decisions for pairs {pairs} have empty intersection inside {interval}"
        )


@dataclass(frozen=True)
class SignedZeroOnePolynomial:
    """Polynomial with coefficients in {-1, 0, +1}, stored degree-ascending
    with trailing zeros trimmed."""

    coeffs: tuple[int, ...]

    def __post_init__(self) -> None:
        if any(c not in (-1, 0, 1) for c in self.coeffs):
            raise ValueError("coefficients must lie in {-1, 0, +1}")
        trimmed = tuple(self.coeffs)
        while trimmed and trimmed[-1] == 0:
            trimmed = trimmed[:-1]
        object.__setattr__(self, "coeffs", trimmed)

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def degree(self) -> int:
        if self.is_zero:
            raise ValueError("the zero polynomial has no degree")
        return len(self.coeffs) - 1

    def __call__(self, x: float) -> float:
        acc = 0.0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def __str__(self) -> str:
        if self.is_zero:
            return "0"
        terms = []
        for k in range(len(self.coeffs) - 1, -1, -1):
            c = self.coeffs[k]
            if c == 0:
                continue
            sign = "+" if c > 0 else "-"
            if k == 0:
                terms.append(f"{sign}1")
            elif k == 1:
                terms.append(f"{sign}x")
            else:
                terms.append(f"{sign}x^{k}")
        return " ".join(terms)


@dataclass(frozen=True)
class PolarizationWeight:
    """Weight of one index: the bit vector in degree order, plus the value
    at a concrete base once evaluated."""

    monomial: tuple[int, ...]
    numeric: float | None = None

    def evaluate(self, beta: float) -> float:
        acc = 0.0
        for b in reversed(self.monomial):
            acc = acc * beta + b
        return acc


@dataclass(frozen=True)
class ReliabilitySequence:
    """Permutation of [0, 2^n), least reliable first."""

    n: int
    order: tuple[int, ...]

    def __post_init__(self) -> None:
        if sorted(self.order) != list(range(1 << self.n)):
            raise ValueError(f"order is not a permutation of [0, {1 << self.n})")


@dataclass(frozen=True)
class BetaInterval:
    """Open interval of base values; hi may be math.inf."""

    lo: float = 1.0
    hi: float = math.inf

    def __post_init__(self) -> None:
        if not (1.0 <= self.lo < self.hi):
            raise ValueError(f"need 1 <= lo < hi, got ({self.lo}, {self.hi})")

    def representative(self) -> float:
        """Midpoint, with an unbounded end capped at 2 (all breakpoints lie
        below 2)."""
        return 0.5 * (self.lo + min(self.hi, 2.0))

    def contains(self, value: float) -> bool:
        return self.lo < value < self.hi

    def __str__(self) -> str:
        hi = "inf" if math.isinf(self.hi) else f"{self.hi:.6f}"
        return f"({self.lo:.6f}, {hi})"


@dataclass(frozen=True)
class BreakpointSet:
    """Ascending breakpoints of the width-n order family, with sentinels 1
    and +inf and one witness polynomial per interior value."""

    n: int
    values: tuple[float, ...]
    witnesses: tuple[SignedZeroOnePolynomial | None, ...]

    def interior(self) -> tuple[float, ...]:
        return self.values[1:-1]


def pw_monomial(x: ChannelIndex) -> PolarizationWeight:
    """Symbolic weight of x: entry k is the coefficient of beta^k."""
    return PolarizationWeight(tuple(x.bit(k) for k in range(x.n)))


def pw_value(x: ChannelIndex, beta: float) -> float:
    """Numeric weight sum_k b_k beta^k; defined for beta > 1 only."""
    if not beta > 1.0:
        raise ValueError(f"beta must exceed 1, got {beta}")
    return pw_monomial(x).evaluate(beta)


def _weights(n: int, beta: float) -> np.ndarray:
    values = np.arange(1 << n)
    bits = (values[:, None] >> np.arange(n)[None, :]) & 1
    return bits @ (beta ** np.arange(n))


def rank_by_pw(n: int, beta: float) -> ReliabilitySequence:
    """Total order of [0, 2^n) by ascending weight at a fixed base.

    Raises IllConditionedBetaError when two weights land within TIE_TOL of
    each other; a tie is never broken silently.
    """
    if not beta > 1.0:
        raise ValueError(f"beta must exceed 1, got {beta}")
    w = _weights(n, beta)
    order = np.argsort(w, kind="stable")
    gaps = np.diff(w[order])
    tie = np.nonzero(gaps < TIE_TOL)[0]
    if tie.size:
        i = int(tie[0])
        a, b = int(order[i]), int(order[i + 1])
        raise IllConditionedBetaError(beta, (min(a, b), max(a, b)), float(gaps[i]))
    return ReliabilitySequence(n, tuple(int(v) for v in order))


def diff_polynomial(x: ChannelIndex, y: ChannelIndex) -> SignedZeroOnePolynomial:
    """Coefficients of weight(y) - weight(x), degree ascending."""
    if x.n != y.n:
        raise ValueError(f"width mismatch: {x.n} vs {y.n}")
    return SignedZeroOnePolynomial(
        tuple(y.bit(k) - x.bit(k) for k in range(x.n))
    )


def _eval_rows(coeffs: np.ndarray, x: np.ndarray) -> np.ndarray:
    acc = np.zeros_like(x)
    for k in range(coeffs.shape[1] - 1, -1, -1):
        acc = acc * x + coeffs[:, k]
    return acc


def _bulk_roots(coeffs: np.ndarray, lo: float, hi: float) -> list[tuple[int, float]]:
    """Sign-change roots in (lo, hi) for many coefficient rows at once.

    Scans a grid no coarser than SCAN_STEP, then bisects each bracket well
    below ROOT_TOL.  Returns (row, root) entries sorted by row then root.
    """
    if hi <= lo:
        return []
    count = max(int(math.ceil((hi - lo) / SCAN_STEP)), 256) + 1
    xs = np.linspace(lo, hi, count)
    vals = coeffs @ (xs[None, :] ** np.arange(coeffs.shape[1])[:, None])
    signs = np.sign(vals)
    flips = signs[:, :-1] * signs[:, 1:] < 0
    rows, cols = np.nonzero(flips)
    out: list[tuple[int, float]] = []
    if rows.size:
        lo_b = xs[cols].copy()
        hi_b = xs[cols + 1].copy()
        cp = coeffs[rows]
        flo = vals[rows, cols].copy()
        for _ in range(55):
            mid = 0.5 * (lo_b + hi_b)
            fmid = _eval_rows(cp, mid)
            go_right = flo * fmid > 0
            lo_b = np.where(go_right, mid, lo_b)
            flo = np.where(go_right, fmid, flo)
            hi_b = np.where(go_right, hi_b, mid)
        out.extend((int(r), float(v)) for r, v in zip(rows, 0.5 * (lo_b + hi_b)))
    # exact zeros at interior grid points produce no sign product below zero
    zrows, zcols = np.nonzero(vals[:, 1:-1] == 0.0)
    out.extend((int(r), float(xs[c + 1])) for r, c in zip(zrows, zcols))
    out.sort()
    return out


def roots_in_unit_to_two(p: SignedZeroOnePolynomial) -> list[float]:
    """All real roots of p in the open interval (1, 2), ascending."""
    if p.is_zero:
        raise ValueError("zero polynomial")
    coeffs = np.array([p.coeffs], dtype=np.float64)
    return [root for _, root in _bulk_roots(coeffs, 1.0 + ROOT_TOL, 2.0)]


def _pair_diff_matrix(pairs, n: int) -> np.ndarray:
    array = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    ks = np.arange(n, dtype=np.int64)
    xbits = (array[:, 0:1] >> ks) & 1
    ybits = (array[:, 1:2] >> ks) & 1
    return (ybits - xbits).astype(np.float64)


def breakpoints(n: int) -> BreakpointSet:
    """Every base in (1, 2) at which the width-n order changes.

    Union of the difference-polynomial roots over all order-undecided
    pairs, deduplicated at DEDUP_TOL, between the sentinels 1 and +inf.
    """
    pairs = incomparable_pairs(n)
    hits: list[tuple[float, tuple[int, int]]] = []
    if pairs:
        coeffs = _pair_diff_matrix(pairs, n)
        for row, root in _bulk_roots(coeffs, 1.0 + ROOT_TOL, 2.0):
            hits.append((root, pairs[row]))
    hits.sort()
    values: list[float] = [1.0]
    witnesses: list[SignedZeroOnePolynomial | None] = [None]
    last = None
    for root, pair in hits:
        if last is not None and root - last <= DEDUP_TOL:
            continue
        values.append(root)
        witnesses.append(
            diff_polynomial(ChannelIndex(pair[0], n), ChannelIndex(pair[1], n))
        )
        last = root
    values.append(math.inf)
    witnesses.append(None)
    return BreakpointSet(n, tuple(values), tuple(witnesses))


def order_for_interval(n: int, interval: BetaInterval) -> ReliabilitySequence:
    """The single order shared by every base inside the interval.

    Ranks at the representative point, then verifies constancy: no
    difference polynomial of consecutive output indices may change sign
    strictly inside the interval.
    """
    seq = rank_by_pw(n, interval.representative())
    lo = interval.lo + BOUNDARY_TOL
    hi = min(interval.hi, 2.0) - BOUNDARY_TOL
    if hi > lo:
        order = seq.order
        coeffs = _pair_diff_matrix(list(zip(order[:-1], order[1:])), n)
        bad = _bulk_roots(coeffs, lo, hi)
        if bad:
            row, root = bad[0]
            pair = (order[row], order[row + 1])
            raise AmbiguousIntervalError(interval, root, (min(pair), max(pair)))
    return seq


def constraining_pairs(
    n: int, interval: BetaInterval, cross_half_only: bool = False
) -> list[tuple[int, int, float]]:
    """Order-undecided pairs whose relative order still changes inside the
    interval, each with the breakpoint responsible.

    A pair whose polynomial crosses zero several times inside the interval
    appears once per crossing.  Roots within BOUNDARY_TOL of an endpoint do
    not count as inside.
    """
    pairs = incomparable_pairs(n, cross_half_only=cross_half_only)
    if not pairs:
        return []
    lo = interval.lo + BOUNDARY_TOL
    hi = min(interval.hi, 2.0) - BOUNDARY_TOL
    if hi <= lo:
        return []
    coeffs = _pair_diff_matrix(pairs, n)
    out = [
        (pairs[row][0], pairs[row][1], root)
        for row, root in _bulk_roots(coeffs, lo, hi)
    ]
    out.sort()
    return out


Decision = tuple[tuple[int, int], Relation]


def refine_interval(
    n: int, interval: BetaInterval, decisions: list[Decision]
) -> BetaInterval:
    """Narrow the interval to the largest sub-range consistent with every
    decided orientation.

    A decision ((x, y), LESS) requires weight(x) < weight(y) throughout the
    result; GREATER the reverse.  Decisions on pairs already constant over
    the interval are checked for consistency and otherwise change nothing,
    so redundant certificates are harmless.  If the feasible set falls into
    several components, the one containing 2^(1/4) is kept, else the widest.
    """
    if not decisions:
        return interval
    lo, hi = interval.lo, interval.hi
    scan_lo, scan_hi = lo + BOUNDARY_TOL, min(hi, 2.0) - BOUNDARY_TOL
    checks: list[tuple[tuple[int, int], Relation, SignedZeroOnePolynomial]] = []
    cuts: set[float] = set()
    for (x, y), rel in decisions:
        if rel not in (Relation.LESS, Relation.GREATER):
            raise ValueError(f"decision for ({x}, {y}) must orient the pair")
        p = diff_polynomial(ChannelIndex(x, n), ChannelIndex(y, n))
        if p.is_zero:
            raise ValueError(f"pair ({x}, {y}) has identical weights")
        checks.append(((x, y), rel, p))
        if scan_hi > scan_lo:
            coeffs = np.array([p.coeffs], dtype=np.float64)
            cuts.update(root for _, root in _bulk_roots(coeffs, scan_lo, scan_hi))
    bounds = [lo, *sorted(cuts), hi]
    feasible: list[list[float]] = []
    least_bad: tuple[int, list[tuple[int, int]]] | None = None
    for a, b in zip(bounds[:-1], bounds[1:]):
        mid = 0.5 * (a + min(b, 2.0))
        bad = [pair for pair, rel, p in checks
               if (p(mid) > 0) != (rel is Relation.LESS)]
        if not bad:
            if feasible and feasible[-1][1] == a:
                feasible[-1][1] = b
            else:
                feasible.append([a, b])
        elif least_bad is None or len(bad) < least_bad[0]:
            least_bad = (len(bad), bad)
    if not feasible:
        assert least_bad is not None
        raise InfeasibleConstraintsError(least_bad[1], interval)
    keep = 2.0 ** 0.25
    pick = next((seg for seg in feasible if seg[0] < keep < seg[1]), None)
    if pick is None:
        pick = max(feasible, key=lambda seg: min(seg[1], 2.0) - seg[0])
    return BetaInterval(pick[0], pick[1])


def format_sequence_file(seq: ReliabilitySequence, source: str) -> str:
    """Sequence file body: header line, then one index per line."""
    lines = [f"# n={seq.n} beta={source}"]
    lines.extend(str(i) for i in seq.order)
    return "\n".join(lines) + "\n"


def format_breakpoint_report(bset: BreakpointSet) -> str:
    """One "value<TAB>polynomial" line per interior breakpoint, ascending."""
    lines = [
        f"{value:.6f}\t{witness}"
        for value, witness in zip(bset.values, bset.witnesses)
        if witness is not None
    ]
    return "\n".join(lines) + ("\n" if lines else "")
