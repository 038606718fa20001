"""Uniqueness checks for the trilinear received-block model.

The received block factors as a three-way array with factor matrices
``gains`` (receive side), ``symbols`` (time slots), and ``code`` (dimming
states), all sharing R = n_tx columns.  The essential-uniqueness test is the
classical k-rank sum condition

    krank(gains) + krank(symbols) + krank(code) >= 2 R + 2,

reported together with two sufficient special cases: a full-rank symbol
block combined with an orthogonal-by-design code only needs the channel
k-rank to reach 2, and short blocks (fewer slots than LEDs) still pass with
a strictly tall, structurally diagonal channel whenever the symbol k-rank
reaches 2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import KRUSKAL_GUARD, SizeLimitError, kruskal_rank

DIAGONAL_TOL = 1e-12


@dataclass(frozen=True)
class UniquenessReport:
    """k-ranks of the three factors plus the resulting uniqueness verdicts."""

    k_gains: int
    k_symbols: int
    k_code: int
    n_columns: int
    kruskal_sum_ok: bool
    full_rank_symbol_path: bool
    diagonal_channel_path: bool

    @property
    def unique(self) -> bool:
        return self.kruskal_sum_ok


def _structurally_diagonal(gains: np.ndarray) -> bool:
    n_rx, n_tx = gains.shape
    if n_rx <= n_tx:
        return False
    off = gains.copy()
    off[np.arange(n_tx), np.arange(n_tx)] = 0.0
    return bool(np.max(np.abs(off)) <= DIAGONAL_TOL)


def check_uniqueness(gains, symbols, code, tol: float = 1e-9) -> UniquenessReport:
    """Evaluate the k-rank sum condition and its two sufficient shortcuts."""
    gains = np.asarray(gains, dtype=float)
    symbols = np.asarray(symbols, dtype=float)
    code = np.asarray(code, dtype=float)
    widths = {gains.shape[1], symbols.shape[1], code.shape[1]}
    if len(widths) != 1:
        raise ValueError(
            f"factor column counts differ: gains {gains.shape[1]}, "
            f"symbols {symbols.shape[1]}, code {code.shape[1]}"
        )
    r = gains.shape[1]
    if r > KRUSKAL_GUARD:
        raise SizeLimitError(
            f"uniqueness check enumerates column subsets; {r} columns exceed "
            f"the guard of {KRUSKAL_GUARD}"
        )
    k_gains = kruskal_rank(gains, tol)
    k_symbols = kruskal_rank(symbols, tol)
    k_code = kruskal_rank(code, tol)
    return UniquenessReport(
        k_gains=k_gains,
        k_symbols=k_symbols,
        k_code=k_code,
        n_columns=r,
        kruskal_sum_ok=k_gains + k_symbols + k_code >= 2 * r + 2,
        full_rank_symbol_path=(k_symbols == r and k_code == r and k_gains >= 2),
        diagonal_channel_path=(
            symbols.shape[0] < r
            and gains.shape[0] > r
            and _structurally_diagonal(gains)
            and k_symbols >= 2
        ),
    )
