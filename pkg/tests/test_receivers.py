import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dstc.channel import draw_channel, propagate
from dstc.csk import block_with_reference, default_constellation, payload_bits
from dstc.dimming import DimmingSpec, build_dimming_matrix, transmit_block
from dstc.receivers import (
    AmbiguityError,
    EqualizationError,
    channel_from_effective,
    effective_channel,
    krf_detect,
    plain_csk_baseline,
    stack_received,
    zf_detect,
    zf_estimate_channel,
)


def dstc_link(seed, spec, k_t, l_t, n_rx, n_slots, snr_db):
    """Transmit one random block and return everything a receiver needs."""
    rng = np.random.default_rng(seed)
    constellation = default_constellation(k_t)
    code = build_dimming_matrix(spec)
    bits = rng.integers(0, 2, size=2 * l_t * (n_slots - 1), dtype=np.uint8)
    block = block_with_reference(bits, n_slots, l_t, constellation)
    gains = draw_channel(n_rx, spec.n_tx, "gaussian", seed=rng)
    received = propagate(gains, transmit_block(code, block.symbols), snr_db, seed=rng)
    return constellation, code, block, gains, received, rng


class TestStacking:
    def test_single_state(self):
        y = np.random.default_rng(0).random((3, 5, 1))
        assert np.array_equal(stack_received(y), y[:, :, 0])

    def test_blocks_follow_state_order(self):
        y = np.random.default_rng(1).random((2, 4, 3))
        out = stack_received(y)
        assert out.shape == (6, 4)
        for k in range(3):
            assert np.array_equal(out[2 * k:2 * k + 2], y[:, :, k])

    def test_noiseless_consistency_with_effective_channel(self):
        rng = np.random.default_rng(2)
        spec = DimmingSpec(8, 6, 0.5, 0.4)
        code = build_dimming_matrix(spec)
        gains = rng.standard_normal((4, 6))
        symbols = rng.random((9, 6))
        received = propagate(gains, transmit_block(code, symbols), math.inf)
        assert np.allclose(
            stack_received(received), effective_channel(gains, code) @ symbols.T, atol=1e-12
        )


class TestEffectiveChannel:
    def test_disabled_dimming_tiles_gains(self):
        gains = np.random.default_rng(0).standard_normal((3, 4))
        out = effective_channel(gains, np.ones((2, 4)))
        assert np.array_equal(out, np.vstack([gains, gains]))

    def test_elementwise_oracle(self):
        rng = np.random.default_rng(1)
        gains = rng.standard_normal((3, 4))
        code = rng.random((5, 4))
        out = effective_channel(gains, code)
        for k in range(5):
            for i in range(3):
                for j in range(4):
                    assert out[3 * k + i, j] == pytest.approx(code[k, j] * gains[i, j])

    def test_mismatch(self):
        with pytest.raises(ValueError):
            effective_channel(np.ones((2, 3)), np.ones((4, 5)))


class TestZfChannelEstimate:
    def test_identity_pilots_pass_through(self):
        rx = np.random.default_rng(0).random((8, 4))
        assert np.allclose(zf_estimate_channel(rx, np.eye(4)), rx)

    def test_noiseless_recovery(self):
        rng = np.random.default_rng(1)
        spec = DimmingSpec(8, 6, 0.5, 0.4)
        code = build_dimming_matrix(spec)
        gains = rng.standard_normal((4, 6))
        pilots = np.eye(6)
        rx = propagate(gains, transmit_block(code, pilots), math.inf)
        est = zf_estimate_channel(stack_received(rx), pilots)
        assert np.allclose(est, effective_channel(gains, code), atol=1e-10)

    def test_error_shrinks_with_snr(self):
        rng = np.random.default_rng(2)
        spec = DimmingSpec(8, 6, 0.5, 0.4)
        code = build_dimming_matrix(spec)
        gains = rng.standard_normal((4, 6))
        truth = effective_channel(gains, code)
        pilots = np.eye(6)
        errs = []
        for snr in (10.0, 20.0, 30.0):
            acc = 0.0
            for trial in range(100):
                rx = propagate(
                    gains, transmit_block(code, pilots), snr, seed=1000 * trial + int(snr)
                )
                acc += np.linalg.norm(zf_estimate_channel(stack_received(rx), pilots) - truth)
            errs.append(acc)
        assert errs[0] > errs[1] > errs[2]

    def test_rank_deficient_pilots(self):
        with pytest.raises(ValueError, match="rank"):
            zf_estimate_channel(np.ones((4, 2)), np.ones((2, 2)))


class TestChannelFromEffective:
    def test_noiseless_collapse_is_exact(self):
        rng = np.random.default_rng(3)
        code = build_dimming_matrix(DimmingSpec(12, 8, 0.5, 0.4))
        gains = rng.standard_normal((8, 8))
        assert np.allclose(channel_from_effective(effective_channel(gains, code), code), gains)

    def test_zero_code_entries_use_only_lit_states(self):
        # full dimming depth: half the states switch each LED off
        code = build_dimming_matrix(DimmingSpec(12, 8, 0.5, 0.5))
        assert np.any(code == 0.0)
        rng = np.random.default_rng(4)
        gains = rng.standard_normal((8, 8))
        assert np.allclose(channel_from_effective(effective_channel(gains, code), code), gains)

    def test_all_dark_column_rejected(self):
        code = np.array([[0.5, 0.0], [0.5, 0.0]])
        with pytest.raises(ValueError, match="never lit"):
            channel_from_effective(np.ones((4, 2)), code)


class TestZfDetect:
    def test_noiseless_block_is_error_free(self):
        constellation, code, block, gains, received, _ = dstc_link(
            0, DimmingSpec(12, 8, 0.5, 0.4), 4, 2, 8, 30, math.inf
        )
        est = zf_detect(stack_received(received), effective_channel(gains, code), constellation, code)
        assert np.array_equal(payload_bits(est.bits, 2, block.reference_row), block.bits)
        assert np.allclose(est.channel_estimate, gains, atol=1e-10)

    def test_high_snr_low_error(self):
        errors = bits = 0
        for seed in range(20):
            constellation, code, block, gains, received, rng = dstc_link(
                seed, DimmingSpec(12, 8, 0.5, 0.4), 4, 2, 8, 30, 40.0
            )
            pilots = np.eye(8)
            pilot_rx = propagate(
                gains, transmit_block(code, pilots), 40.0, seed=rng,
                noise_variance=received.noise_variance,
            )
            est = zf_detect(
                stack_received(received),
                zf_estimate_channel(stack_received(pilot_rx), pilots),
                constellation,
                code,
            )
            detected = payload_bits(est.bits, 2, block.reference_row)
            errors += int(np.sum(detected != block.bits))
            bits += block.bits.size
        assert errors / bits <= 1e-3

    def test_row_mismatch(self):
        with pytest.raises(ValueError, match="rows"):
            zf_detect(np.ones((8, 4)), np.ones((6, 3)), default_constellation(3))

    def test_zero_effective_channel(self):
        with pytest.raises(EqualizationError):
            zf_detect(np.ones((6, 4)), np.zeros((6, 3)), default_constellation(3))


class TestKrfDetect:
    def test_noiseless_joint_recovery(self):
        constellation, code, block, gains, received, _ = dstc_link(
            4, DimmingSpec(8, 6, 0.5, 0.4), 3, 2, 4, 40, math.inf
        )
        est = krf_detect(received, code, 0, block.symbols[0], constellation)
        assert np.array_equal(payload_bits(est.bits, 2, block.reference_row), block.bits)
        rel = np.linalg.norm(est.channel_estimate - gains) / np.linalg.norm(gains)
        assert rel <= 1e-8
        assert np.allclose(est.symbol_estimate, block.symbols, atol=1e-8)

    def test_scaling_cancels_in_reconstruction(self):
        # the per-column scale moves between factors without changing their product
        constellation, code, block, gains, received, _ = dstc_link(
            5, DimmingSpec(8, 6, 0.5, 0.4), 3, 2, 4, 40, math.inf
        )
        est = krf_detect(received, code, 0, block.symbols[0], constellation)
        assert np.allclose(
            est.channel_estimate @ est.symbol_estimate.T,
            gains @ block.symbols.T,
            atol=1e-8,
        )

    def test_needs_fewer_receivers_than_leds(self):
        # works even when the stacked-channel inverse would be the only other option
        constellation, code, block, gains, received, _ = dstc_link(
            6, DimmingSpec(8, 6, 0.5, 0.4), 3, 2, 2, 40, math.inf
        )
        est = krf_detect(received, code, 0, block.symbols[0], constellation)
        assert np.array_equal(payload_bits(est.bits, 2, block.reference_row), block.bits)

    def test_zero_in_known_row_rejected(self):
        constellation, code, block, gains, received, _ = dstc_link(
            7, DimmingSpec(8, 6, 0.5, 0.4), 3, 2, 4, 20, math.inf
        )
        bad = block.symbols[0].copy()
        bad[2] = 0.0
        with pytest.raises(AmbiguityError, match="column 2"):
            krf_detect(received, code, 0, bad, constellation)

    def test_known_row_length_checked(self):
        constellation, code, block, gains, received, _ = dstc_link(
            8, DimmingSpec(8, 6, 0.5, 0.4), 3, 2, 4, 20, math.inf
        )
        with pytest.raises(ValueError, match="entries"):
            krf_detect(received, code, 0, np.ones(4), constellation)

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=25, deadline=None)
    def test_noiseless_exactness_random_geometry(self, seed):
        rng = np.random.default_rng(seed)
        k_t = int(rng.choice([3, 4]))
        l_t = int(rng.integers(1, 3))
        n_tx = k_t * l_t
        order = int(rng.choice([8, 12]))
        if n_tx > order - 1:
            l_t, n_tx = 1, k_t
        n_rx = int(rng.integers(2, 7))
        n_slots = int(rng.integers(6, 30))
        spec = DimmingSpec(order, n_tx, 0.5, 0.4)
        constellation, code, block, gains, received, _ = dstc_link(
            int(rng.integers(2**31)), spec, k_t, l_t, n_rx, n_slots, math.inf
        )
        est = krf_detect(received, code, 0, block.symbols[0], constellation)
        assert np.array_equal(payload_bits(est.bits, l_t, block.reference_row), block.bits)
        rel = np.linalg.norm(est.channel_estimate - gains) / np.linalg.norm(gains)
        assert rel <= 1e-8


class TestPlainCskBaseline:
    def test_noiseless_exact(self):
        rng = np.random.default_rng(9)
        constellation = default_constellation(4)
        bits = rng.integers(0, 2, size=2 * 2 * 19, dtype=np.uint8)
        block = block_with_reference(bits, 20, 2, constellation)
        gains = draw_channel(8, 8, "gaussian", seed=rng)
        est = plain_csk_baseline(gains, block.symbols, math.inf, constellation, seed=rng)
        assert est.receiver == "plain-CSK"
        assert np.array_equal(payload_bits(est.bits, 2, block.reference_row), bits)
        assert np.allclose(est.channel_estimate, gains, atol=1e-10)

    def test_needs_square_or_tall_channel(self):
        with pytest.raises(ValueError, match="n_rx >= n_tx"):
            plain_csk_baseline(
                np.ones((4, 8)), np.ones((5, 8)), 20.0, default_constellation(4)
            )
