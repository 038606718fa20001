"""Construction and auditing of dimming space-time codes.

A code is a K x (K_T*L_T) matrix whose row k scales every LED during dimming
state k.  It is built from nonconstant columns of a Hadamard matrix:

    code = p_m + alpha * b

where the columns of ``b`` are zero-sum and mutually orthogonal.  Every entry
then lies in {p_m - alpha, p_m + alpha}, every column averages to exactly
p_m (the dimming target is met one LED at a time), and the matrix has full
column rank, so it can double as a diversity code.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import (
    DegenerateInputError,
    HadamardOrderError,
    hadamard,
    kruskal_rank,
)

COLUMN_MEAN_TOL = 1e-12


class ConstraintViolationError(ValueError):
    """A dimming-design constraint cannot be met; names the failed condition."""

    def __init__(self, constraint: str, detail: str = ""):
        self.constraint = constraint
        msg = constraint if not detail else f"{constraint}: {detail}"
        super().__init__(msg)


@dataclass(frozen=True)
class DimmingSpec:
    """Design request for a dimming code.

    ``columns`` optionally picks which Hadamard columns (1-based, never
    column 1, which is constant) supply the power variation; by default the
    first ``n_tx`` nonconstant columns are used.
    """

    n_states: int
    n_tx: int
    p_m: float
    alpha: float
    columns: tuple[int, ...] | None = None


@dataclass(frozen=True)
class ChromaticityTable:
    """CIE 1931 (x, y) coordinates for each color channel of a group."""

    coords: tuple[tuple[float, float], ...]

    def __post_init__(self):
        for x, y in self.coords:
            if not (0.0 <= x and 0.0 <= y and x + y <= 1.0):
                raise ValueError(f"({x}, {y}) is not a valid chromaticity point")

    def __len__(self) -> int:
        return len(self.coords)


_RGB = ((0.70, 0.29), (0.30, 0.60), (0.15, 0.06))
_YELLOW = (0.40, 0.50)


def default_chromaticity(n_channels: int) -> ChromaticityTable:
    """Red/green/blue primaries, plus yellow for four-channel transmitters."""
    if n_channels == 3:
        return ChromaticityTable(_RGB)
    if n_channels == 4:
        return ChromaticityTable(_RGB + (_YELLOW,))
    raise ValueError(f"no default chromaticity table for {n_channels} channels")


def build_dimming_matrix(spec: DimmingSpec) -> np.ndarray:
    """Construct the dimming code for ``spec``.

    Raises :class:`ConstraintViolationError` naming the violated condition
    when the request is infeasible (alpha out of range, too many LEDs for the
    state count, no Hadamard matrix of the requested order, bad column pick).
    """
    k, n_tx = spec.n_states, spec.n_tx
    if n_tx < 1:
        raise ConstraintViolationError("K_T*L_T >= 1", f"got {n_tx}")
    if not 0.0 < spec.p_m < 1.0:
        raise ConstraintViolationError("0 < P_m < 1", f"got P_m = {spec.p_m}")
    if spec.alpha > min(spec.p_m, 1.0 - spec.p_m):
        raise ConstraintViolationError(
            "alpha <= min(P_m, 1 - P_m)",
            f"got alpha = {spec.alpha} with P_m = {spec.p_m}",
        )
    if spec.alpha <= 0.0:
        raise ConstraintViolationError(
            "alpha > 0 (full column rank needs nonzero power variation)",
            f"got alpha = {spec.alpha}",
        )
    if n_tx > k - 1:
        raise ConstraintViolationError(
            "K_T*L_T <= K - 1",
            f"got K_T*L_T = {n_tx} with K = {k} (only K - 1 nonconstant columns exist)",
        )
    try:
        h = hadamard(k)
    except HadamardOrderError as exc:
        raise ConstraintViolationError("K is a constructible Hadamard order", str(exc)) from exc

    columns = spec.columns if spec.columns is not None else tuple(range(2, n_tx + 2))
    if len(columns) != n_tx:
        raise ConstraintViolationError(
            "len(columns) == K_T*L_T", f"got {len(columns)} indices for {n_tx} LEDs"
        )
    if len(set(columns)) != len(columns):
        raise ConstraintViolationError("column indices are distinct", f"got {columns}")
    for c in columns:
        if c == 1:
            raise ConstraintViolationError(
                "column 1 (constant) is excluded", "pick indices from 2..K"
            )
        if not 2 <= c <= k:
            raise ConstraintViolationError(
                "column indices lie in 2..K", f"got {c} with K = {k}"
            )
    b = h[:, [c - 1 for c in columns]].astype(float)
    return spec.p_m + spec.alpha * b


def state_scaling(code: np.ndarray, state: int) -> np.ndarray:
    """Diagonal per-LED scaling applied during one dimming state (0-based)."""
    code = np.asarray(code, dtype=float)
    if not 0 <= state < code.shape[0]:
        raise IndexError(f"state {state} out of range for {code.shape[0]} states")
    return np.diag(code[state])


def transmit_block(code: np.ndarray, symbols: np.ndarray) -> np.ndarray:
    """Per-state transmit matrices for one symbol block.

    ``symbols`` has one row per time slot; the result is a (K, n_tx, N)
    array whose slice k equals ``state_scaling(code, k) @ symbols.T``.
    """
    code = np.asarray(code, dtype=float)
    symbols = np.asarray(symbols, dtype=float)
    if symbols.ndim != 2 or symbols.shape[1] != code.shape[1]:
        raise ValueError(
            f"symbol block must have {code.shape[1]} columns, got shape {symbols.shape}"
        )
    return code[:, :, None] * symbols.T[None, :, :]


def average_power(code: np.ndarray, symbols: np.ndarray) -> float:
    """Mean emitted level across states, slots, and LEDs, relative to no dimming."""
    code = np.asarray(code, dtype=float)
    symbols = np.asarray(symbols, dtype=float)
    baseline = float(symbols.mean())
    if baseline == 0.0:
        raise DegenerateInputError("symbol block has zero mean; relative power undefined")
    dimmed = float(np.mean(code.mean(axis=0) * symbols.mean(axis=0)))
    return dimmed / baseline


def average_chromaticity(
    code: np.ndarray, symbols: np.ndarray, table: ChromaticityTable
) -> tuple[float, float]:
    """Mixture chromaticity of the emitted light under color mixing.

    LEDs are assigned to color channels cyclically (LED i drives channel
    i mod len(table)), so each group contributes one LED per channel.  The
    mixture point is the per-channel-power weighted average of the table.
    """
    code = np.asarray(code, dtype=float)
    symbols = np.asarray(symbols, dtype=float)
    n_tx = code.shape[1]
    n_ch = len(table)
    if symbols.shape[1] != n_tx:
        raise ValueError(f"symbol block must have {n_tx} columns, got {symbols.shape}")
    if n_tx % n_ch != 0:
        raise ValueError(f"{n_tx} LEDs cannot be split into {n_ch} color channels")
    per_led = code.sum(axis=0) * symbols.sum(axis=0)
    per_channel = np.array([per_led[ch::n_ch].sum() for ch in range(n_ch)])
    total = per_channel.sum()
    if total <= 0.0:
        raise DegenerateInputError("total emitted power is zero; chromaticity undefined")
    weights = per_channel / total
    coords = np.asarray(table.coords, dtype=float)
    x, y = weights @ coords
    return float(x), float(y)


@dataclass(frozen=True)
class DimmingReport:
    """Feasibility audit of a constructed code against its design request."""

    entries_in_range: bool
    column_mean_error: float
    rank: int
    kruskal: int
    condition_number: float
    n_tx: int = field(repr=False, default=0)

    @property
    def ok(self) -> bool:
        return (
            self.entries_in_range
            and self.column_mean_error <= COLUMN_MEAN_TOL
            and self.rank == self.n_tx
            and self.kruskal == self.n_tx
        )


def validate_dimming_matrix(code: np.ndarray, spec: DimmingSpec) -> DimmingReport:
    """Check range, per-column mean, rank, and k-rank of a dimming code."""
    code = np.asarray(code, dtype=float)
    in_range = bool(np.all(code >= 0.0) and np.all(code <= 1.0))
    mean_err = float(np.max(np.abs(code.mean(axis=0) - spec.p_m)))
    rank = int(np.linalg.matrix_rank(code))
    # Full column rank already forces every column subset independent, which
    # is what lets wide designs (n_tx above the brute-force guard) pass.
    krank = code.shape[1] if rank == code.shape[1] else kruskal_rank(code)
    cond = float(np.linalg.cond(code))
    return DimmingReport(
        entries_in_range=in_range,
        column_mean_error=mean_err,
        rank=rank,
        kruskal=krank,
        condition_number=cond,
        n_tx=spec.n_tx,
    )
