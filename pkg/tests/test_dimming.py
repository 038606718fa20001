import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dstc import dimming
from dstc.dimming import (
    ChromaticityTable,
    ConstraintViolationError,
    DimmingSpec,
    average_chromaticity,
    average_power,
    build_dimming_matrix,
    default_chromaticity,
    state_scaling,
    transmit_block,
    validate_dimming_matrix,
)

FEASIBLE = [
    DimmingSpec(n_states=8, n_tx=6, p_m=0.5, alpha=0.4),
    DimmingSpec(n_states=12, n_tx=6, p_m=0.5, alpha=0.4),
    DimmingSpec(n_states=12, n_tx=8, p_m=0.5, alpha=0.4),
    DimmingSpec(n_states=16, n_tx=8, p_m=0.5, alpha=0.4),
    DimmingSpec(n_states=20, n_tx=18, p_m=0.5, alpha=0.4),
    DimmingSpec(n_states=32, n_tx=30, p_m=0.5, alpha=0.4),
    DimmingSpec(n_states=12, n_tx=6, p_m=0.3, alpha=0.25),
    DimmingSpec(n_states=4, n_tx=3, p_m=0.5, alpha=0.25),
]


class TestBuild:
    def test_two_level_entries(self):
        c = build_dimming_matrix(DimmingSpec(4, 3, 0.5, 0.25))
        assert c.shape == (4, 3)
        assert set(np.round(c.ravel(), 12)) == {0.25, 0.75}

    def test_qled_k12_levels(self):
        c = build_dimming_matrix(DimmingSpec(12, 8, 0.5, 0.4))
        assert set(np.round(c.ravel(), 12)) == {0.1, 0.9}

    @pytest.mark.parametrize("spec", FEASIBLE)
    def test_feasible_designs(self, spec):
        c = build_dimming_matrix(spec)
        report = validate_dimming_matrix(c, spec)
        assert report.entries_in_range
        assert report.column_mean_error <= 1e-12
        assert report.rank == spec.n_tx
        assert report.kruskal == spec.n_tx
        assert report.ok

    @pytest.mark.parametrize("spec", FEASIBLE)
    def test_gram_structure(self, spec):
        # columns share a constant inner product: c_i . c_j = K*(p_m^2 + alpha^2*[i==j])
        c = build_dimming_matrix(spec)
        k = spec.n_states
        expect = k * (
            spec.p_m**2 * np.ones((spec.n_tx, spec.n_tx))
            + spec.alpha**2 * np.eye(spec.n_tx)
        )
        assert np.allclose(c.T @ c, expect, atol=1e-10)

    def test_alpha_too_large(self):
        with pytest.raises(ConstraintViolationError, match=r"alpha <= min\(P_m, 1 - P_m\)"):
            build_dimming_matrix(DimmingSpec(12, 6, 0.5, 0.6))

    def test_alpha_zero(self):
        with pytest.raises(ConstraintViolationError, match="alpha > 0"):
            build_dimming_matrix(DimmingSpec(12, 6, 0.5, 0.0))

    def test_too_many_leds(self):
        with pytest.raises(ConstraintViolationError, match="K_T\\*L_T <= K - 1"):
            build_dimming_matrix(DimmingSpec(8, 8, 0.5, 0.4))

    def test_unsupported_state_count(self):
        with pytest.raises(ConstraintViolationError, match="Hadamard order"):
            build_dimming_matrix(DimmingSpec(36, 6, 0.5, 0.4))

    def test_bad_dimming_target(self):
        with pytest.raises(ConstraintViolationError, match="0 < P_m < 1"):
            build_dimming_matrix(DimmingSpec(12, 6, 1.0, 0.0))

    def test_constant_column_rejected(self):
        with pytest.raises(ConstraintViolationError, match="constant"):
            build_dimming_matrix(DimmingSpec(12, 3, 0.5, 0.4, columns=(1, 2, 3)))

    def test_custom_columns(self):
        spec = DimmingSpec(12, 3, 0.5, 0.4, columns=(5, 2, 9))
        c = build_dimming_matrix(spec)
        assert validate_dimming_matrix(c, spec).ok

    def test_duplicate_columns_rejected(self):
        with pytest.raises(ConstraintViolationError, match="distinct"):
            build_dimming_matrix(DimmingSpec(12, 3, 0.5, 0.4, columns=(2, 2, 3)))

    @given(
        st.sampled_from([4, 8, 12, 16, 20]),
        st.floats(0.1, 0.9),
        st.integers(0, 2**32 - 1),
    )
    @settings(max_examples=60, deadline=None)
    def test_feasibility_properties(self, n_states, p_m, seed):
        rng = np.random.default_rng(seed)
        n_tx = int(rng.integers(1, min(n_states - 1, 10) + 1))
        cap = min(p_m, 1.0 - p_m)
        alpha = float(rng.uniform(0.05, 1.0)) * cap
        if alpha <= 0.0:
            return
        spec = DimmingSpec(n_states, n_tx, p_m, alpha)
        c = build_dimming_matrix(spec)
        assert np.all(c >= 0.0) and np.all(c <= 1.0)
        assert np.max(np.abs(c.mean(axis=0) - p_m)) <= 1e-12
        assert np.linalg.matrix_rank(c) == n_tx


class TestStateScaling:
    def test_diagonal_of_row(self):
        c = build_dimming_matrix(DimmingSpec(4, 3, 0.5, 0.25))
        psi = state_scaling(c, 2)
        assert np.array_equal(psi, np.diag(c[2]))

    def test_constant_row(self):
        psi = state_scaling(np.full((3, 4), 0.5), 1)
        assert np.allclose(psi, 0.5 * np.eye(4))

    def test_out_of_range(self):
        c = np.full((3, 4), 0.5)
        with pytest.raises(IndexError):
            state_scaling(c, 3)
        with pytest.raises(IndexError):
            state_scaling(c, -1)


class TestTransmitBlock:
    def test_disabled_dimming_is_transpose(self):
        s = np.random.default_rng(0).random((5, 4))
        x = transmit_block(np.ones((3, 4)), s)
        for k in range(3):
            assert np.array_equal(x[k], s.T)

    def test_elementwise_oracle(self):
        rng = np.random.default_rng(1)
        c = build_dimming_matrix(DimmingSpec(8, 6, 0.5, 0.4))
        s = rng.random((7, 6))
        x = transmit_block(c, s)
        assert x.shape == (8, 6, 7)
        for k in range(8):
            for i in range(6):
                for n in range(7):
                    assert x[k, i, n] == pytest.approx(c[k, i] * s[n, i])

    def test_states_average_to_target(self):
        c = build_dimming_matrix(DimmingSpec(12, 6, 0.5, 0.4))
        s = np.random.default_rng(2).random((9, 6))
        x = transmit_block(c, s)
        assert np.allclose(x.mean(axis=0), 0.5 * s.T, atol=1e-12)

    def test_column_mismatch(self):
        with pytest.raises(ValueError, match="columns"):
            transmit_block(np.ones((3, 4)), np.ones((5, 3)))


class TestAveragePower:
    def test_no_dimming(self):
        s = np.random.default_rng(0).random((50, 4))
        assert average_power(np.ones((6, 4)), s) == pytest.approx(1.0)

    def test_constant_half_code(self):
        s = np.random.default_rng(1).random((50, 4))
        assert average_power(np.full((6, 4), 0.5), s) == pytest.approx(0.5)

    def test_structured_code_hits_target_exactly(self):
        c = build_dimming_matrix(DimmingSpec(12, 6, 0.5, 0.4))
        s = np.random.default_rng(2).random((500, 6))
        assert average_power(c, s) == pytest.approx(0.5, abs=1e-12)

    def test_zero_block_rejected(self):
        with pytest.raises(dimming.DegenerateInputError):
            average_power(np.ones((2, 3)), np.zeros((4, 3)))


class TestChromaticity:
    def test_single_channel_hits_its_coordinate(self):
        table = default_chromaticity(3)
        s = np.zeros((10, 3))
        s[:, 1] = 1.0  # only the green LED emits
        assert average_chromaticity(np.ones((4, 3)), s, table) == pytest.approx((0.30, 0.60))

    def test_equal_power_mix_is_centroid(self):
        table = default_chromaticity(3)
        s = np.ones((10, 3))
        x, y = average_chromaticity(np.ones((4, 3)), s, table)
        coords = np.array(table.coords)
        assert (x, y) == pytest.approx(tuple(coords.mean(axis=0)))

    def test_dimming_leaves_mixture_unchanged(self):
        # every LED is dimmed to the same mean, so channel weights cancel
        rng = np.random.default_rng(3)
        table = default_chromaticity(3)
        c = build_dimming_matrix(DimmingSpec(12, 6, 0.5, 0.4))
        s = rng.random((10_000, 6))
        before = average_chromaticity(np.ones_like(c), s, table)
        after = average_chromaticity(c, s, table)
        assert abs(before[0] - after[0]) < 1e-3
        assert abs(before[1] - after[1]) < 1e-3

    def test_table_validation(self):
        with pytest.raises(ValueError):
            ChromaticityTable(((0.8, 0.3),))

    def test_default_table_sizes(self):
        assert len(default_chromaticity(3)) == 3
        assert len(default_chromaticity(4)) == 4
        with pytest.raises(ValueError):
            default_chromaticity(5)

    def test_zero_power_rejected(self):
        with pytest.raises(dimming.DegenerateInputError):
            average_chromaticity(np.ones((2, 3)), np.zeros((4, 3)), default_chromaticity(3))
