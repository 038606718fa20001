"""Receivers for dimming-coded CSK blocks.

Two detectors share the stacked received model: a pilot-assisted
zero-forcing receiver that estimates the effective (state-stacked) channel
from one-LED-at-a-time pilots, and a semi-blind receiver that exploits the
trilinear structure of the received block.  The semi-blind receiver inverts
the known dimming code out of the mode-3 unfolding, which leaves a
Khatri-Rao product of symbols and channel; each of its columns is a
vectorized rank-one matrix, so a per-column best rank-one fit recovers both
factors up to one scale per column, resolved by a single known symbol row.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from .channel import ReceivedTensor, propagate, unfold
from .csk import Constellation, demodulate, pilot_block
from .linalg import (
    leading_singular_triplet,
    pseudoinverse,
    unvec,
)

RECEIVER_ZF = "ZF"
RECEIVER_KRF = "VLC-KRF"
RECEIVER_PLAIN = "plain-CSK"


class EqualizationError(RuntimeError):
    """The linear equalizer could not be formed (degenerate effective channel)."""


class AmbiguityError(RuntimeError):
    """Per-column scaling cannot be resolved from the known symbol row."""


@dataclass(frozen=True)
class EstimationResult:
    """Output of one detector run on one block.

    ``bits`` covers every row of the block, training slot included; callers
    that embed a training row slice it off when counting errors.
    ``channel_estimate`` is always the plain n_rx x n_tx gain matrix so that
    different receivers can be compared on the same object;
    ``effective_estimate`` additionally carries the state-stacked channel for
    receivers that estimate it directly.
    """

    receiver: str
    symbol_estimate: np.ndarray
    bits: np.ndarray
    channel_estimate: np.ndarray | None = None
    effective_estimate: np.ndarray | None = None
    scale_factors: np.ndarray | None = None


def stack_received(tensor) -> np.ndarray:
    """Stack per-state receptions vertically: rows of block k are state k's rows."""
    data = tensor.data if isinstance(tensor, ReceivedTensor) else np.asarray(tensor, dtype=float)
    if data.ndim != 3:
        raise ValueError(f"expected a 3-way array, got shape {data.shape}")
    n_rx, n_slots, n_states = data.shape
    return data.transpose(2, 0, 1).reshape(n_states * n_rx, n_slots)


def effective_channel(gains: np.ndarray, code: np.ndarray) -> np.ndarray:
    """State-stacked channel: block k is the gain matrix scaled by dimming row k."""
    gains = np.asarray(gains, dtype=float)
    code = np.asarray(code, dtype=float)
    if gains.shape[1] != code.shape[1]:
        raise ValueError(
            f"gain columns ({gains.shape[1]}) must match code columns ({code.shape[1]})"
        )
    n_states, n_tx = code.shape
    return (code[:, None, :] * gains[None, :, :]).reshape(n_states * gains.shape[0], n_tx)


def zf_estimate_channel(pilot_stack: np.ndarray, pilots: np.ndarray) -> np.ndarray:
    """Least-squares effective-channel estimate from stacked pilot receptions."""
    pilot_stack = np.asarray(pilot_stack, dtype=float)
    pilots = np.asarray(pilots, dtype=float)
    if pilot_stack.shape[1] != pilots.shape[0]:
        raise ValueError(
            f"pilot reception has {pilot_stack.shape[1]} slots but {pilots.shape[0]} pilot rows"
        )
    if np.linalg.matrix_rank(pilots) < pilots.shape[1]:
        raise ValueError("pilot matrix is rank-deficient; cannot identify all LEDs")
    return pilot_stack @ pseudoinverse(pilots.T)


def channel_from_effective(effective: np.ndarray, code: np.ndarray) -> np.ndarray:
    """Collapse a state-stacked channel estimate back to plain gains.

    Block k scales column j by code[k, j]; dividing it out and averaging over
    the blocks gives one comparable n_rx x n_tx estimate.  States whose code
    entry is zero carry no information about that column (at full dimming
    depth half the states switch a LED off) and are left out of its average.
    """
    effective = np.asarray(effective, dtype=float)
    code = np.asarray(code, dtype=float)
    n_states, n_tx = code.shape
    if effective.shape[0] % n_states != 0 or effective.shape[1] != n_tx:
        raise ValueError(
            f"effective estimate of shape {effective.shape} does not stack "
            f"{n_states} blocks of {n_tx} columns"
        )
    usable = np.abs(code) > 1e-12
    if not np.all(usable.any(axis=0)):
        dark = int(np.flatnonzero(~usable.any(axis=0))[0])
        raise ValueError(f"dimming code column {dark} is all zeros; LED never lit")
    blocks = effective.reshape(n_states, -1, n_tx)
    safe = np.where(usable, code, 1.0)
    ratios = blocks / safe[:, None, :]
    weights = usable[:, None, :].astype(float)
    return (ratios * weights).sum(axis=0) / weights.sum(axis=0)


def zf_detect(
    stacked: np.ndarray,
    effective_estimate: np.ndarray,
    constellation: Constellation,
    code: np.ndarray | None = None,
) -> EstimationResult:
    """Zero-forcing detection against an effective-channel estimate.

    Passing the dimming ``code`` also fills in the collapsed plain-channel
    estimate for error reporting.
    """
    stacked = np.asarray(stacked, dtype=float)
    effective_estimate = np.asarray(effective_estimate, dtype=float)
    if stacked.shape[0] != effective_estimate.shape[0]:
        raise ValueError(
            f"stacked rows ({stacked.shape[0]}) must match effective-channel rows "
            f"({effective_estimate.shape[0]})"
        )
    if not effective_estimate.any():
        raise EqualizationError("effective-channel estimate is zero; nothing to invert")
    symbols = (pseudoinverse(effective_estimate) @ stacked).T
    _, bits = demodulate(symbols, constellation)
    gains = channel_from_effective(effective_estimate, code) if code is not None else None
    return EstimationResult(
        receiver=RECEIVER_ZF,
        symbol_estimate=symbols,
        bits=bits,
        channel_estimate=gains,
        effective_estimate=effective_estimate,
    )


def krf_detect(
    received: ReceivedTensor,
    code: np.ndarray,
    known_row: int,
    known_values: np.ndarray,
    constellation: Constellation,
) -> EstimationResult:
    """Semi-blind joint channel/symbol recovery from one block.

    Inverts the dimming code out of the mode-3 unfolding, fits each residual
    column with its best rank-one matrix (channel column times symbol
    column), and rescales every column pair so that the estimated symbol row
    ``known_row`` matches ``known_values``.  Those values must be nonzero,
    otherwise that column's scale is unobservable.
    """
    code = np.asarray(code, dtype=float)
    known_values = np.asarray(known_values, dtype=float).reshape(-1)
    n_states, n_tx = code.shape
    data = received.data if isinstance(received, ReceivedTensor) else np.asarray(received, dtype=float)
    n_rx, n_slots = data.shape[0], data.shape[1]
    if data.shape[2] != n_states:
        raise ValueError(
            f"received tensor has {data.shape[2]} states but the code has {n_states}"
        )
    if known_values.size != n_tx:
        raise ValueError(f"known row must have {n_tx} entries, got {known_values.size}")
    if not 0 <= known_row < n_slots:
        raise ValueError(f"known row {known_row} outside block of {n_slots} slots")
    zero_cols = np.flatnonzero(known_values == 0.0)
    if zero_cols.size:
        raise AmbiguityError(
            f"known symbol row is zero in column {int(zero_cols[0])}; "
            "its scale cannot be resolved"
        )
    if np.linalg.matrix_rank(code) < n_tx:
        raise ValueError("dimming code must have full column rank")

    joint = unfold(data, 3).T @ pseudoinverse(code.T)  # estimate of khatri_rao(s, h)
    gains = np.empty((n_rx, n_tx))
    symbols = np.empty((n_slots, n_tx))
    for r in range(n_tx):
        triplet = leading_singular_triplet(unvec(joint[:, r], n_rx, n_slots))
        gains[:, r] = triplet.sigma * triplet.u
        symbols[:, r] = triplet.v

    estimated_row = symbols[known_row]
    zero_est = np.flatnonzero(estimated_row == 0.0)
    if zero_est.size:
        raise AmbiguityError(
            f"estimated symbol row is zero in column {int(zero_est[0])}; "
            "scaling is unresolvable"
        )
    scales = known_values / estimated_row
    symbols = symbols * scales
    gains = gains / scales
    _, bits = demodulate(symbols, constellation)
    return EstimationResult(
        receiver=RECEIVER_KRF,
        symbol_estimate=symbols,
        bits=bits,
        channel_estimate=gains,
        scale_factors=scales,
    )


def plain_csk_baseline(
    gains: np.ndarray,
    symbols: np.ndarray,
    snr_db: float,
    constellation: Constellation,
    seed=None,
) -> EstimationResult:
    """Uncoded CSK reference link: single state, no dimming code.

    Transmits the block as-is, estimates the channel from identity pilots at
    the data-phase noise level, and zero-forces.  Needs at least as many
    receive as transmit elements.
    """
    gains = np.asarray(gains, dtype=float)
    symbols = np.asarray(symbols, dtype=float)
    n_rx, n_tx = gains.shape
    if n_rx < n_tx:
        raise ValueError(f"plain CSK zero forcing needs n_rx >= n_tx, got {n_rx} < {n_tx}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    data = propagate(gains, symbols.T[None, :, :], snr_db, seed=rng)
    pilots = pilot_block(n_tx)
    pilot_rx = propagate(
        gains, pilots.T[None, :, :], snr_db, seed=rng, noise_variance=data.noise_variance
    )
    estimate = zf_estimate_channel(stack_received(pilot_rx), pilots)
    result = zf_detect(stack_received(data), estimate, constellation)
    return dataclasses.replace(
        result, receiver=RECEIVER_PLAIN, channel_estimate=estimate
    )
