"""Monte Carlo harness: BER/NMSE sweeps, dimming-depth sweeps, link audits.

One trial transmits a single block of ``block_len`` slots (first slot is the
semi-blind receiver's training row) over a freshly drawn channel.  Trial
seeds are split deterministically from the base seed and are independent of
the sweep point, so every receiver at a given (trial, point) sees the same
channel and payload, and paired runs that share a base seed stay paired
across sweeps.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from .channel import (
    CHANNEL_MODELS,
    derive_seed,
    draw_channel,
    propagate,
)
from .csk import (
    Constellation,
    block_with_reference,
    default_constellation,
    modulate,
    payload_bits,
    pilot_block,
)
from .dimming import (
    ChromaticityTable,
    DimmingSpec,
    average_chromaticity,
    average_power,
    build_dimming_matrix,
    default_chromaticity,
    transmit_block,
)
from .identifiability import UniquenessReport, check_uniqueness
from .linalg import DegenerateInputError
from .receivers import (
    RECEIVER_KRF,
    RECEIVER_PLAIN,
    RECEIVER_ZF,
    AmbiguityError,
    EqualizationError,
    effective_channel,
    krf_detect,
    plain_csk_baseline,
    stack_received,
    zf_detect,
    zf_estimate_channel,
)

ALL_RECEIVERS = (RECEIVER_ZF, RECEIVER_KRF, RECEIVER_PLAIN)

CSV_COLUMNS = ("x", "receiver", "ber", "nmse", "cond", "n_bits", "n_errors", "n_trials", "failures")

_RECEIVER_FAILURES = (AmbiguityError, EqualizationError, DegenerateInputError)


class IdentifiabilityError(RuntimeError):
    """The scenario's trilinear model fails the uniqueness pre-check."""


@dataclass(frozen=True)
class SystemConfig:
    """Link geometry and dimming operating point.

    ``k_t``/``l_t`` are color channels and groups at the transmitter (their
    product is the LED count), ``k_r``/``l_r`` the same on the receive side,
    ``n_states`` the number of dimming states per block, and ``block_len``
    the number of time slots per block.
    """

    k_t: int
    l_t: int
    k_r: int
    l_r: int
    n_states: int
    block_len: int
    p_m: float = 0.5
    alpha: float = 0.4
    code_columns: tuple[int, ...] | None = None

    def __post_init__(self):
        for name in ("k_t", "l_t", "k_r", "l_r", "n_states", "block_len"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be a positive integer")
        if self.block_len < 2:
            raise ValueError("block_len must leave room for one payload row")

    @property
    def n_tx(self) -> int:
        return self.k_t * self.l_t

    @property
    def n_rx(self) -> int:
        return self.k_r * self.l_r

    def dimming_spec(self, alpha: float | None = None) -> DimmingSpec:
        return DimmingSpec(
            n_states=self.n_states,
            n_tx=self.n_tx,
            p_m=self.p_m,
            alpha=self.alpha if alpha is None else alpha,
            columns=self.code_columns,
        )


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything a sweep needs besides the code itself.

    ``n_symbols_total`` counts transmitted slots per sweep point and must be
    a whole number of blocks; the trial count follows from it.
    """

    scenario: SystemConfig
    snr_grid_db: tuple[float, ...]
    alpha_grid: tuple[float, ...] = (0.1, 0.2, 0.3, 0.4, 0.5)
    alpha_sweep_snr_db: float = 20.0
    n_symbols_total: int = 10_000
    base_seed: int = 0
    receivers: tuple[str, ...] = (RECEIVER_ZF, RECEIVER_KRF)
    channel_model: str = "gaussian"
    noiseless: bool = False

    def __post_init__(self):
        if not self.snr_grid_db:
            raise ValueError("snr_grid_db must not be empty")
        if not self.alpha_grid:
            raise ValueError("alpha_grid must not be empty")
        if self.n_symbols_total % self.scenario.block_len != 0:
            raise ValueError(
                f"n_symbols_total = {self.n_symbols_total} is not a whole number of "
                f"blocks of {self.scenario.block_len} slots"
            )
        if not self.receivers:
            raise ValueError("at least one receiver must be enabled")
        for r in self.receivers:
            if r not in ALL_RECEIVERS:
                raise ValueError(f"unknown receiver {r!r}; expected one of {ALL_RECEIVERS}")
        if self.channel_model not in CHANNEL_MODELS:
            raise ValueError(
                f"unknown channel model {self.channel_model!r}; expected one of {CHANNEL_MODELS}"
            )

    @property
    def n_trials(self) -> int:
        return self.n_symbols_total // self.scenario.block_len


@dataclass(frozen=True)
class TrialOutcome:
    """Per-trial, per-receiver tallies; failures carry no bit or NMSE counts."""

    receiver: str
    bit_errors: int
    n_bits: int
    nmse: float
    cond_effective: float
    failed: bool = False


@dataclass(frozen=True)
class CurvePoint:
    """Aggregated statistics of one receiver at one sweep point."""

    x: float
    receiver: str
    ber: float
    nmse: float
    cond: float
    n_symbols: int
    n_bits: int
    n_errors: int
    n_trials: int
    failures: int


def _nmse(truth: np.ndarray, estimate: np.ndarray | None) -> float:
    if estimate is None:
        return math.nan
    return float(
        np.linalg.norm(truth - estimate) ** 2 / np.linalg.norm(truth) ** 2
    )


def _score(result, block, gains, cond_effective, l_t) -> TrialOutcome:
    detected = payload_bits(result.bits, l_t, block.reference_row)
    return TrialOutcome(
        receiver=result.receiver,
        bit_errors=int(np.sum(detected != block.bits)),
        n_bits=int(block.bits.size),
        nmse=_nmse(gains, result.channel_estimate),
        cond_effective=cond_effective,
        failed=False,
    )


def _failure(receiver: str, cond_effective: float) -> TrialOutcome:
    return TrialOutcome(
        receiver=receiver,
        bit_errors=0,
        n_bits=0,
        nmse=math.nan,
        cond_effective=cond_effective,
        failed=True,
    )


def run_trial(
    scenario: SystemConfig,
    snr_db: float,
    seed: int,
    receivers: tuple[str, ...] = (RECEIVER_ZF, RECEIVER_KRF),
    channel_model: str = "gaussian",
    constellation: Constellation | None = None,
    alpha: float | None = None,
) -> dict[str, TrialOutcome]:
    """One block through one channel draw, detected by every enabled receiver.

    All receivers consume the same payload, channel, and data noise; use
    ``snr_db=math.inf`` for a noiseless run.
    """
    constellation = constellation or default_constellation(scenario.k_t)
    rng = np.random.default_rng(seed)
    code = build_dimming_matrix(scenario.dimming_spec(alpha))
    bits = rng.integers(
        0, 2, size=2 * scenario.l_t * (scenario.block_len - 1), dtype=np.uint8
    )
    block = block_with_reference(bits, scenario.block_len, scenario.l_t, constellation)
    gains = draw_channel(scenario.n_rx, scenario.n_tx, channel_model, seed=rng)
    received = propagate(gains, transmit_block(code, block.symbols), snr_db, seed=rng)
    cond_eff = float(np.linalg.cond(effective_channel(gains, code)))

    outcomes: dict[str, TrialOutcome] = {}
    if RECEIVER_ZF in receivers:
        pilots = pilot_block(scenario.n_tx)
        pilot_rx = propagate(
            gains,
            transmit_block(code, pilots),
            snr_db,
            seed=rng,
            noise_variance=received.noise_variance,
        )
        try:
            estimate = zf_estimate_channel(stack_received(pilot_rx), pilots)
            result = zf_detect(stack_received(received), estimate, constellation, code)
            outcomes[RECEIVER_ZF] = _score(result, block, gains, cond_eff, scenario.l_t)
        except _RECEIVER_FAILURES:
            outcomes[RECEIVER_ZF] = _failure(RECEIVER_ZF, cond_eff)
    if RECEIVER_KRF in receivers:
        try:
            result = krf_detect(received, code, 0, block.symbols[0], constellation)
            outcomes[RECEIVER_KRF] = _score(result, block, gains, cond_eff, scenario.l_t)
        except _RECEIVER_FAILURES:
            outcomes[RECEIVER_KRF] = _failure(RECEIVER_KRF, cond_eff)
    if RECEIVER_PLAIN in receivers:
        cond_plain = float(np.linalg.cond(gains))
        try:
            result = plain_csk_baseline(gains, block.symbols, snr_db, constellation, seed=rng)
            outcomes[RECEIVER_PLAIN] = _score(result, block, gains, cond_plain, scenario.l_t)
        except _RECEIVER_FAILURES:
            outcomes[RECEIVER_PLAIN] = _failure(RECEIVER_PLAIN, cond_plain)
    return outcomes


def run_point(
    scenario: SystemConfig,
    snr_db: float,
    n_trials: int,
    base_seed: int,
    receivers: tuple[str, ...] = (RECEIVER_ZF, RECEIVER_KRF),
    channel_model: str = "gaussian",
    constellation: Constellation | None = None,
    alpha: float | None = None,
) -> dict[str, list[TrialOutcome]]:
    """Independent trials at one sweep point, keyed by receiver."""
    outcomes: dict[str, list[TrialOutcome]] = {r: [] for r in receivers}
    for trial in range(n_trials):
        result = run_trial(
            scenario,
            snr_db,
            derive_seed(base_seed, trial),
            receivers,
            channel_model,
            constellation,
            alpha,
        )
        for r in receivers:
            outcomes[r].append(result[r])
    return outcomes


def _aggregate(
    x: float, receiver: str, outcomes: list[TrialOutcome], symbols_per_trial: int
) -> CurvePoint:
    ok = [o for o in outcomes if not o.failed]
    n_bits = sum(o.n_bits for o in ok)
    n_errors = sum(o.bit_errors for o in ok)
    return CurvePoint(
        x=x,
        receiver=receiver,
        ber=(n_errors / n_bits) if n_bits else 0.0,
        nmse=float(np.mean([o.nmse for o in ok])) if ok else math.nan,
        cond=float(np.mean([o.cond_effective for o in ok])) if ok else math.nan,
        n_symbols=symbols_per_trial * len(ok),
        n_bits=n_bits,
        n_errors=n_errors,
        n_trials=len(outcomes),
        failures=len(outcomes) - len(ok),
    )


def _identifiability_precheck(cfg: ExperimentConfig, constellation: Constellation) -> UniquenessReport:
    scenario = cfg.scenario
    rng = np.random.default_rng(derive_seed(cfg.base_seed, 0))
    bits = rng.integers(0, 2, size=2 * scenario.l_t * (scenario.block_len - 1), dtype=np.uint8)
    block = block_with_reference(bits, scenario.block_len, scenario.l_t, constellation)
    gains = draw_channel(scenario.n_rx, scenario.n_tx, cfg.channel_model, seed=rng)
    code = build_dimming_matrix(scenario.dimming_spec())
    return check_uniqueness(gains, block.symbols, code)


def check_scenario_identifiability(cfg: ExperimentConfig) -> UniquenessReport:
    """Uniqueness report for a seeded representative draw of the scenario."""
    return _identifiability_precheck(cfg, default_constellation(cfg.scenario.k_t))


def run_ber_nmse_sweep(
    cfg: ExperimentConfig, constellation: Constellation | None = None
) -> dict[str, list[CurvePoint]]:
    """BER and channel-NMSE curves over the SNR grid, one list per receiver."""
    constellation = constellation or default_constellation(cfg.scenario.k_t)
    if RECEIVER_ZF in cfg.receivers or RECEIVER_KRF in cfg.receivers:
        report = _identifiability_precheck(cfg, constellation)
        if not report.unique:
            raise IdentifiabilityError(
                f"scenario fails the k-rank sum condition: {report}"
            )
    symbols_per_trial = cfg.scenario.block_len - 1
    curves: dict[str, list[CurvePoint]] = {r: [] for r in cfg.receivers}
    for snr_db in cfg.snr_grid_db:
        point = run_point(
            cfg.scenario,
            math.inf if cfg.noiseless else snr_db,
            cfg.n_trials,
            cfg.base_seed,
            cfg.receivers,
            cfg.channel_model,
            constellation,
        )
        for r in cfg.receivers:
            curves[r].append(_aggregate(snr_db, r, point[r], symbols_per_trial))
    return curves


def run_alpha_sweep(
    cfg: ExperimentConfig, constellation: Constellation | None = None
) -> dict[str, list[CurvePoint]]:
    """BER and conditioning versus dimming depth at one fixed SNR.

    Channel draws are paired across depth values (same trial seeds), so the
    conditioning trend is compared on identical channels.
    """
    constellation = constellation or default_constellation(cfg.scenario.k_t)
    for alpha in cfg.alpha_grid:
        build_dimming_matrix(cfg.scenario.dimming_spec(alpha))  # fail fast if infeasible
    if RECEIVER_ZF in cfg.receivers or RECEIVER_KRF in cfg.receivers:
        report = _identifiability_precheck(cfg, constellation)
        if not report.unique:
            raise IdentifiabilityError(
                f"scenario fails the k-rank sum condition: {report}"
            )
    symbols_per_trial = cfg.scenario.block_len - 1
    curves: dict[str, list[CurvePoint]] = {r: [] for r in cfg.receivers}
    for alpha in cfg.alpha_grid:
        point = run_point(
            cfg.scenario,
            math.inf if cfg.noiseless else cfg.alpha_sweep_snr_db,
            cfg.n_trials,
            cfg.base_seed,
            cfg.receivers,
            cfg.channel_model,
            constellation,
            alpha=alpha,
        )
        for r in cfg.receivers:
            curves[r].append(_aggregate(alpha, r, point[r], symbols_per_trial))
    return curves


@dataclass(frozen=True)
class SpectralEfficiency:
    """Exact per-receiver efficiencies (bits per slot per LED pair) and their gap."""

    zf: float
    krf: float
    gain_percent: float


def spectral_efficiency(k_t: int, l_t: int, n_states: int, block_len: int) -> SpectralEfficiency:
    """Training-overhead-aware spectral efficiencies of the two receivers.

    Zero forcing spends one pilot slot per LED; the semi-blind receiver
    spends a single training slot regardless of the array size.
    """
    for name, v in (("k_t", k_t), ("l_t", l_t), ("n_states", n_states), ("block_len", block_len)):
        if not isinstance(v, (int, np.integer)) or v < 1:
            raise ValueError(f"{name} must be a positive integer, got {v!r}")
    useful = 2 * l_t * block_len
    zf = Fraction(useful, block_len * n_states + k_t * l_t)
    krf = Fraction(useful, block_len * n_states + 1)
    gain = (krf / zf - 1) * 100
    return SpectralEfficiency(zf=float(zf), krf=float(krf), gain_percent=float(gain))


@dataclass(frozen=True)
class PowerColorAudit:
    """Measured optical effect of a dimming code on a random symbol stream."""

    power_target: float
    relative_power: float
    chroma_before: tuple[float, float]
    chroma_after: tuple[float, float]

    @property
    def chroma_shift(self) -> tuple[float, float]:
        return (
            abs(self.chroma_after[0] - self.chroma_before[0]),
            abs(self.chroma_after[1] - self.chroma_before[1]),
        )


def audit_power_color(
    scenario: SystemConfig,
    n_rows: int = 10_000,
    seed: int = 0,
    table: ChromaticityTable | None = None,
) -> PowerColorAudit:
    """Check that dimming scales power to the target without moving the color point."""
    table = table or default_chromaticity(scenario.k_t)
    constellation = default_constellation(scenario.k_t)
    rng = np.random.default_rng(seed)
    bits = rng.integers(0, 2, size=2 * scenario.l_t * n_rows, dtype=np.uint8)
    block = modulate(bits, n_rows, scenario.l_t, constellation)
    if scenario.alpha == 0.0:
        # constant dimming: useless as a code but a valid optical operating point
        code = np.full((scenario.n_states, scenario.n_tx), float(scenario.p_m))
    else:
        code = build_dimming_matrix(scenario.dimming_spec())
    no_dimming = np.ones_like(code)
    return PowerColorAudit(
        power_target=scenario.p_m,
        relative_power=average_power(code, block.symbols),
        chroma_before=average_chromaticity(no_dimming, block.symbols, table),
        chroma_after=average_chromaticity(code, block.symbols, table),
    )


def default_scenarios() -> dict[str, SystemConfig]:
    """Reference link geometries used by the bundled configs and checks."""
    return {
        "qled2x2-k12": SystemConfig(k_t=4, l_t=2, k_r=4, l_r=2, n_states=12, block_len=100),
        "qled2x2-k16": SystemConfig(k_t=4, l_t=2, k_r=4, l_r=2, n_states=16, block_len=100),
        "tled2x2-k12": SystemConfig(k_t=3, l_t=2, k_r=3, l_r=2, n_states=12, block_len=100),
    }


def flatten_curves(curves: dict[str, list[CurvePoint]]) -> list[CurvePoint]:
    """Row order used by the CSV emitters: by sweep point, then receiver."""
    rows: list[CurvePoint] = []
    receivers = list(curves)
    if not receivers:
        return rows
    n_points = len(curves[receivers[0]])
    for i in range(n_points):
        for r in receivers:
            rows.append(curves[r][i])
    return rows


def write_curves_csv(curves: dict[str, list[CurvePoint]], path) -> Path:
    """Emit one CSV with the fixed column set; formatting is deterministic."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for p in flatten_curves(curves):
            writer.writerow(
                [
                    f"{p.x:.10g}",
                    p.receiver,
                    f"{p.ber:.12g}",
                    f"{p.nmse:.12g}",
                    f"{p.cond:.12g}",
                    p.n_bits,
                    p.n_errors,
                    p.n_trials,
                    p.failures,
                ]
            )
    return path
