"""Color-shift-keying modem.

Each LED group of ``k_t`` color channels carries one 4-point constellation
symbol per time slot: an intensity vector whose entries are the per-channel
drive levels.  A symbol block is a matrix with one row per slot and one
column per LED; row n concatenates the ``l_t`` group symbols of slot n.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

BITS_PER_SYMBOL = 2

_LABELS = ("00", "01", "10", "11")


@dataclass(frozen=True)
class Constellation:
    """Four intensity vectors, indexed by the natural value of their bit label."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[0] != 4:
            raise ValueError(f"expected 4 points, got array of shape {pts.shape}")
        if np.any(pts < 0.0) or np.any(pts > 1.0):
            raise ValueError("intensity levels must lie in [0, 1]")
        object.__setattr__(self, "points", pts)

    @property
    def k_t(self) -> int:
        return self.points.shape[1]

    @property
    def labels(self) -> tuple[str, ...]:
        return _LABELS

    @property
    def d_min(self) -> float:
        dists = [
            float(np.linalg.norm(self.points[i] - self.points[j]))
            for i in range(4)
            for j in range(i + 1, 4)
        ]
        return min(dists)


def default_constellation(k_t: int) -> Constellation:
    """Unit-vector constellation; with three channels the fourth point is the centroid."""
    if k_t == 4:
        return Constellation(np.eye(4))
    if k_t == 3:
        return Constellation(np.vstack([np.eye(3), np.full(3, 1.0 / 3.0)]))
    raise ValueError(f"no default constellation for k_t = {k_t}")


@dataclass(frozen=True)
class SymbolBlock:
    """A block of transmit rows plus the payload bits they carry.

    ``reference_row`` marks a training slot that carries no payload (used by
    the semi-blind receiver to resolve per-column scaling); it is None for
    all-payload blocks.
    """

    symbols: np.ndarray
    bits: np.ndarray
    n_groups: int
    reference_row: int | None = None

    @property
    def n_rows(self) -> int:
        return self.symbols.shape[0]


def modulate(bits, n_rows: int, n_groups: int, constellation: Constellation) -> SymbolBlock:
    """Map a bit vector onto a block of ``n_rows`` slots, two bits per group symbol."""
    bits = np.asarray(bits, dtype=np.uint8).reshape(-1)
    if np.any(bits > 1):
        raise ValueError("bits must be 0/1 valued")
    needed = BITS_PER_SYMBOL * n_groups * n_rows
    if bits.size != needed:
        raise ValueError(f"need {needed} bits for {n_rows}x{n_groups} symbols, got {bits.size}")
    pairs = bits.reshape(n_rows, n_groups, 2)
    idx = 2 * pairs[:, :, 0].astype(int) + pairs[:, :, 1].astype(int)
    symbols = constellation.points[idx].reshape(n_rows, n_groups * constellation.k_t)
    return SymbolBlock(symbols=symbols, bits=bits.copy(), n_groups=n_groups)


def demodulate(estimates, constellation: Constellation) -> tuple[SymbolBlock, np.ndarray]:
    """Slice each group to the nearest constellation point and emit its bits.

    Ties go to the lowest point index, which makes detection deterministic.
    """
    est = np.asarray(estimates, dtype=float)
    if est.ndim != 2 or est.shape[1] % constellation.k_t != 0:
        raise ValueError(
            f"estimate width {est.shape} is not a multiple of k_t = {constellation.k_t}"
        )
    n_rows = est.shape[0]
    n_groups = est.shape[1] // constellation.k_t
    grouped = est.reshape(n_rows, n_groups, constellation.k_t)
    diffs = grouped[:, :, None, :] - constellation.points[None, None, :, :]
    idx = np.argmin(np.einsum("ngpk,ngpk->ngp", diffs, diffs), axis=2)
    bits = np.empty((n_rows, n_groups, 2), dtype=np.uint8)
    bits[:, :, 0] = idx >> 1
    bits[:, :, 1] = idx & 1
    flat_bits = bits.reshape(-1)
    symbols = constellation.points[idx].reshape(n_rows, n_groups * constellation.k_t)
    block = SymbolBlock(symbols=symbols, bits=flat_bits, n_groups=n_groups)
    return block, flat_bits


def pilot_block(n_tx: int) -> np.ndarray:
    """One-LED-at-a-time pilot rows (identity), trivially invertible."""
    if n_tx < 1:
        raise ValueError(f"n_tx must be positive, got {n_tx}")
    return np.eye(n_tx)


def reference_row(constellation: Constellation, n_groups: int) -> np.ndarray:
    """Training row with every channel at 1/k_t, nonzero in all entries.

    With three channels this is the centroid constellation point repeated per
    group; with four it is a dedicated row outside the constellation.
    """
    return np.full(n_groups * constellation.k_t, 1.0 / constellation.k_t)


def block_with_reference(
    bits, n_rows: int, n_groups: int, constellation: Constellation
) -> SymbolBlock:
    """Payload block of ``n_rows`` slots whose first row is the training row."""
    if n_rows < 2:
        raise ValueError("need at least one payload row besides the training row")
    payload = modulate(bits, n_rows - 1, n_groups, constellation)
    symbols = np.vstack([reference_row(constellation, n_groups), payload.symbols])
    return SymbolBlock(
        symbols=symbols, bits=payload.bits, n_groups=n_groups, reference_row=0
    )


def payload_bits(all_bits, n_groups: int, reference: int | None) -> np.ndarray:
    """Drop the training slot's bits from a full-block detected bit vector."""
    all_bits = np.asarray(all_bits).reshape(-1)
    if reference is None:
        return all_bits
    per_row = BITS_PER_SYMBOL * n_groups
    rows = all_bits.reshape(-1, per_row)
    return np.delete(rows, reference, axis=0).reshape(-1)
