"""Polar encoder plus successive-cancellation and list decoders.

Indexing follows the natural (non bit-reversed) convention everywhere, so
a reliability sequence maps positionally onto the input vector u.  The
list decoder is written over arrays of paths and, internally, over whole
batches of received words, which keeps the Monte-Carlo harness fast; a
single-word wrapper exposes the plain interface.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from polarseq.beta_expansion import ReliabilitySequence

LLR_CLAMP = 40.0
_ATANH_LIMIT = 1.0 - 1e-15

# generator polynomials including the leading x^w term, by remainder width
CRC_GENERATORS = {
    8: 0x107,       # x^8 + x^2 + x + 1
    16: 0x11021,    # x^16 + x^12 + x^5 + 1
    19: 0x80027,    # x^19 + x^5 + x^2 + x + 1
}


@dataclass(frozen=True)
class CodeConfig:
    """Code geometry: block size 2^n, info_count data positions, a frozen
    set, and the CRC / list-size decoding parameters."""

    n: int
    info_count: int
    frozen_set: frozenset[int]
    crc_bits: int = 0
    list_size: int = 1

    def __post_init__(self) -> None:
        size = 1 << self.n
        if self.n < 1:
            raise ValueError(f"bit-width must be >= 1, got {self.n}")
        if self.info_count < 0 or self.crc_bits < 0:
            raise ValueError("info_count and crc_bits must be nonnegative")
        if self.list_size < 1:
            raise ValueError(f"list size must be >= 1, got {self.list_size}")
        if self.info_count + self.crc_bits > size:
            raise ValueError(
                f"info_count {self.info_count} + crc_bits {self.crc_bits} "
                f"exceed block length {size}"
            )
        if len(self.frozen_set) != size - self.info_count - self.crc_bits:
            raise ValueError("frozen set size does not match N - K - crc_bits")
        if any(not 0 <= i < size for i in self.frozen_set):
            raise ValueError("frozen index out of range")

    @property
    def block_length(self) -> int:
        return 1 << self.n

    @property
    def payload_positions(self) -> tuple[int, ...]:
        """Non-frozen positions in index order; data then CRC fill them."""
        return tuple(sorted(set(range(self.block_length)) - self.frozen_set))


@dataclass(frozen=True, eq=False)
class Codeword:
    """Input vector u (frozen positions zero) and its transform x."""

    u: np.ndarray
    x: np.ndarray


@dataclass(frozen=True)
class DecodeDiagnostics:
    crc_passed: bool
    path_metric: float


def select_frozen(
    seq: ReliabilitySequence, info_count: int, crc_bits: int = 0,
    list_size: int = 1,
) -> CodeConfig:
    """Freeze the least reliable N - K - crc_bits positions of a sequence."""
    size = 1 << seq.n
    if info_count + crc_bits > size:
        raise ValueError(
            f"cannot place {info_count} + {crc_bits} bits in a length-{size} code"
        )
    frozen = frozenset(seq.order[: size - info_count - crc_bits])
    return CodeConfig(seq.n, info_count, frozen, crc_bits, list_size)


def _transform_rows(rows: np.ndarray) -> np.ndarray:
    """In-place butterfly transform of each row over GF(2)."""
    size = rows.shape[-1]
    h = 1
    while h < size:
        for i in range(0, size, 2 * h):
            rows[..., i:i + h] ^= rows[..., i + h:i + 2 * h]
        h *= 2
    return rows


def encode(u, n: int) -> np.ndarray:
    """Polar transform x = u F^(tensor n) over GF(2); self-inverse."""
    u = np.asarray(u, dtype=np.uint8)
    if u.ndim != 1 or u.size != (1 << n):
        raise ValueError(f"expected 2^{n} bits, got shape {u.shape}")
    return _transform_rows(u.copy())


def assemble(config: CodeConfig, payload) -> Codeword:
    """Place payload bits (data then CRC) on the non-frozen positions and
    encode."""
    payload = np.asarray(payload, dtype=np.uint8)
    u = np.zeros(config.block_length, dtype=np.uint8)
    u[list(config.payload_positions)] = payload
    return Codeword(u, encode(u, config.n))


def _crc_generator(crc_bits: int) -> int:
    try:
        return CRC_GENERATORS[crc_bits]
    except KeyError:
        raise ValueError(
            f"no generator registered for a {crc_bits}-bit CRC; "
            f"known widths: {sorted(CRC_GENERATORS)}"
        ) from None


def crc_attach(info, crc_bits: int) -> np.ndarray:
    """Append the CRC remainder of the data bits; width 0 is the identity."""
    info = np.asarray(info, dtype=np.uint8)
    if crc_bits == 0:
        return info.copy()
    poly = _crc_generator(crc_bits)
    reg = 0
    for b in info:
        reg = (reg << 1) | int(b)
        if (reg >> crc_bits) & 1:
            reg ^= poly
    for _ in range(crc_bits):
        reg <<= 1
        if (reg >> crc_bits) & 1:
            reg ^= poly
    rem = [(reg >> k) & 1 for k in range(crc_bits - 1, -1, -1)]
    return np.concatenate([info, np.array(rem, dtype=np.uint8)])


@lru_cache(maxsize=None)
def _crc_column_table(length: int, crc_bits: int) -> np.ndarray:
    """Remainder contribution of each bit position of a length-`length`
    word, as a (length, crc_bits) 0/1 matrix; XOR of the selected rows is
    the word's remainder."""
    poly = _crc_generator(crc_bits)
    table = np.zeros((length, crc_bits), dtype=np.uint8)
    for pos in range(length):
        reg = 1
        for _ in range(length - 1 - pos):
            reg <<= 1
            if (reg >> crc_bits) & 1:
                reg ^= poly
        table[pos] = [(reg >> k) & 1 for k in range(crc_bits - 1, -1, -1)]
    return table


def crc_check(bits, crc_bits: int) -> bool:
    """True when the trailing CRC matches the leading data bits."""
    if crc_bits == 0:
        return True
    bits = np.asarray(bits, dtype=np.uint8)
    table = _crc_column_table(bits.size, crc_bits)
    return not np.any((bits @ table) & 1)


def _crc_check_rows(rows: np.ndarray, crc_bits: int) -> np.ndarray:
    if crc_bits == 0:
        return np.ones(rows.shape[0], dtype=bool)
    table = _crc_column_table(rows.shape[1], crc_bits)
    return ~np.any((rows.astype(np.int64) @ table.astype(np.int64)) & 1, axis=1)


def _check_node(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # exact boxplus; the product stays clear of +-1 because channel LLRs
    # are clamped, but guard the arctanh argument anyway
    t = np.tanh(a / 2.0) * np.tanh(b / 2.0)
    return 2.0 * np.arctanh(np.clip(t, -_ATANH_LIMIT, _ATANH_LIMIT))


def _check_node_minsum(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.sign(a) * np.sign(b) * np.minimum(np.abs(a), np.abs(b))


def sc_decode(llr, config: CodeConfig, min_sum: bool = False) -> np.ndarray:
    """Successive-cancellation decoding of one word.

    Returns the non-frozen decisions in index order.  Kept deliberately
    independent of the list decoder so the two can cross-check each other.
    """
    size = config.block_length
    llr = np.clip(np.asarray(llr, dtype=np.float64), -LLR_CLAMP, LLR_CLAMP)
    if llr.shape != (size,):
        raise ValueError(f"expected {size} LLRs, got shape {llr.shape}")
    check = _check_node_minsum if min_sum else _check_node
    frozen = np.zeros(size, dtype=bool)
    frozen[list(config.frozen_set)] = True
    u_hat = np.zeros(size, dtype=np.uint8)

    def descend(alpha: np.ndarray, start: int) -> np.ndarray:
        if alpha.size == 1:
            if not frozen[start]:
                u_hat[start] = 0 if alpha[0] >= 0.0 else 1
            return u_hat[start:start + 1]
        h = alpha.size // 2
        a, b = alpha[:h], alpha[h:]
        left = descend(check(a, b), start)
        right = descend(b + (1.0 - 2.0 * left) * a, start + h)
        return np.concatenate([left ^ right, right])

    descend(llr, 0)
    return u_hat[~frozen]


def _scl_decode_batch(
    llr_rows: np.ndarray, config: CodeConfig, min_sum: bool = False
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """List-decode a batch of words in parallel.

    Returns (payloads, crc_ok, metrics): the selected payload row, whether
    any surviving path passed the CRC, and the winner's path metric, one
    per word.  Paths carry the additive metric log(1 + exp(-(1-2u) llr)),
    which never decreases along a path.
    """
    size = config.block_length
    L = config.list_size
    check = _check_node_minsum if min_sum else _check_node
    frozen = np.zeros(size, dtype=bool)
    frozen[list(config.frozen_set)] = True
    batch = llr_rows.shape[0]
    alpha0 = np.clip(llr_rows.astype(np.float64), -LLR_CLAMP, LLR_CLAMP)

    pm = np.zeros((batch, 1))
    decisions = np.zeros((batch, 1, size), dtype=np.uint8)

    def descend(alpha: np.ndarray, start: int) -> tuple[np.ndarray, np.ndarray]:
        nonlocal pm, decisions
        width = alpha.shape[2]
        if width == 1:
            a = alpha[:, :, 0]
            paths = a.shape[1]
            if frozen[start]:
                pm = pm + np.logaddexp(0.0, -a)
                decisions[:, :, start] = 0
                ident = np.broadcast_to(np.arange(paths), (batch, paths))
                return np.zeros((batch, paths, 1), dtype=np.uint8), ident
            pm_all = np.concatenate(
                [pm + np.logaddexp(0.0, -a), pm + np.logaddexp(0.0, a)], axis=1
            )
            if 2 * paths > L:
                keep = np.argsort(pm_all, axis=1, kind="stable")[:, :L]
            else:
                keep = np.broadcast_to(np.arange(2 * paths), (batch, 2 * paths))
            parents = keep % paths
            ubits = (keep // paths).astype(np.uint8)
            pm = np.take_along_axis(pm_all, keep, axis=1)
            decisions = np.take_along_axis(decisions, parents[:, :, None], axis=1)
            decisions[:, :, start] = ubits
            return ubits[:, :, None], parents
        h = width // 2
        a, b = alpha[:, :, :h], alpha[:, :, h:]
        left, m1 = descend(check(a, b), start)
        a = np.take_along_axis(a, m1[:, :, None], axis=1)
        b = np.take_along_axis(b, m1[:, :, None], axis=1)
        right, m2 = descend(b + (1.0 - 2.0 * left) * a, start + h)
        left = np.take_along_axis(left, m2[:, :, None], axis=1)
        bits = np.concatenate([left ^ right, right], axis=2)
        return bits, np.take_along_axis(m1, m2, axis=1)

    descend(alpha0[:, None, :], 0)

    cols = np.array(config.payload_positions, dtype=np.int64)
    payloads = decisions[:, :, cols] if cols.size else decisions[:, :, :0]
    paths = payloads.shape[1]
    flat_ok = _crc_check_rows(payloads.reshape(batch * paths, -1), config.crc_bits)
    ok = flat_ok.reshape(batch, paths)
    any_ok = ok.any(axis=1)
    best_any = np.argmin(pm, axis=1)
    masked = np.where(ok, pm, np.inf)
    chosen = np.where(any_ok, np.argmin(masked, axis=1), best_any)
    sel = np.arange(batch)
    return payloads[sel, chosen], any_ok, pm[sel, chosen]


def scl_decode(
    llr, config: CodeConfig, min_sum: bool = False,
    with_diagnostics: bool = False,
):
    """CRC-aided successive-cancellation list decoding of one word.

    Keeps up to list_size paths ranked by the additive path metric; with a
    CRC attached the best checking path wins, otherwise the best path
    overall.  list_size 1 reproduces sc_decode decision for decision.
    """
    size = config.block_length
    llr = np.asarray(llr, dtype=np.float64)
    if llr.shape != (size,):
        raise ValueError(f"expected {size} LLRs, got shape {llr.shape}")
    payloads, crc_ok, metrics = _scl_decode_batch(llr[None, :], config, min_sum)
    if with_diagnostics:
        return payloads[0], DecodeDiagnostics(bool(crc_ok[0]), float(metrics[0]))
    return payloads[0]
