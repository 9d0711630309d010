import math

import numpy as np
import pytest

from fbia import (
    CoefficientVector,
    NonpositivePower,
    baseline_rates,
    check_nondegeneracy,
    constraint_matrices,
    equivalent_channel,
    max_scale,
    solve_exact_alignment,
    sum_rate,
)

EXAMPLE_H = np.array([[1.0, 2.0, 3.0], [4.0, 5.0, 6.0], [7.0, 8.0, 10.0]])


def coeffs(t, f, d=(0.0, 0.0, 0.0)):
    return CoefficientVector.from_parts(d, t, f)


def two_slot_observation(H, t, f, x, z1, z2):
    """Physical-layer oracle: run the two-slot protocol symbol by symbol."""
    y1 = H @ x + z1
    x2 = np.asarray(t) * x + np.asarray(f) * y1  # each tx hears only its own rx
    y2 = H @ x2 + z2
    return y1, y2


class TestEquivalentChannel:
    def test_diagonal_repetition(self):
        H = np.diag([2.0, -1.5, 0.5])
        a = coeffs((1, 1, 1), (0, 0, 0))
        for k in (1, 2, 3):
            eq = equivalent_channel(H, a, k)
            expected = np.zeros((2, 3))
            expected[:, k - 1] = H[k - 1, k - 1]
            np.testing.assert_allclose(eq.G, expected)
            np.testing.assert_allclose(eq.C, np.eye(2))

    def test_columns_match_protocol_simulation(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            H = rng.normal(size=(3, 3))
            t = rng.normal(size=3)
            f = rng.normal(size=3)
            a = coeffs(t, f)
            for j in range(3):
                x = np.zeros(3)
                x[j] = 1.0
                y1, y2 = two_slot_observation(H, t, f, x, np.zeros(3), np.zeros(3))
                for k in (1, 2, 3):
                    eq = equivalent_channel(H, a, k)
                    np.testing.assert_allclose(
                        eq.G[:, j], [y1[k - 1], y2[k - 1]], rtol=1e-12, atol=1e-14
                    )

    def test_covariance_matches_simulated_noise(self):
        rng = np.random.default_rng(1)
        H = rng.normal(size=(3, 3))
        t = rng.normal(size=3)
        f = rng.normal(size=3)
        a = coeffs(t, f)
        n = 400_000
        z1 = rng.normal(size=(n, 3))
        z2 = rng.normal(size=(n, 3))
        # noise part of the stacked observation: [z1_k, (H (f o z1))_k + z2_k]
        w2 = (z1 * f) @ H.T + z2
        for k in (1, 2, 3):
            eq = equivalent_channel(H, a, k)
            stacked = np.column_stack([z1[:, k - 1], w2[:, k - 1]])
            empirical = stacked.T @ stacked / n
            np.testing.assert_allclose(empirical, eq.C, atol=0.05 * max(1.0, abs(eq.C).max()))

    def test_covariance_entries_formula(self):
        rng = np.random.default_rng(2)
        for _ in range(50):
            H = rng.normal(size=(3, 3))
            f = rng.normal(size=3)
            a = coeffs(rng.normal(size=3), f)
            for k in (1, 2, 3):
                eq = equivalent_channel(H, a, k)
                hf = H[k - 1] * f
                expected = np.array(
                    [[1.0, H[k - 1, k - 1] * f[k - 1]], [H[k - 1, k - 1] * f[k - 1], hf @ hf + 1.0]]
                )
                np.testing.assert_allclose(eq.C, expected, rtol=1e-12)
                assert np.linalg.det(eq.C) >= 1.0 - 1e-12

    def test_user_index_validated(self):
        with pytest.raises(ValueError):
            equivalent_channel(EXAMPLE_H, np.zeros(9), 0)


class TestSumRate:
    def test_matches_determinant_oracle(self):
        # rebuild the rate from equivalent_channel output with np.linalg.det
        rng = np.random.default_rng(3)
        for _ in range(100):
            H = rng.normal(size=(3, 3))
            a = rng.normal(size=9)
            P = float(10 ** rng.uniform(-1, 5))
            breakdown = sum_rate(H, a, P)
            for k in (1, 2, 3):
                eq = equivalent_channel(H, a, k)
                full = eq.C + P * sum(np.outer(eq.G[:, l], eq.G[:, l]) for l in range(3))
                part = eq.C + P * sum(
                    np.outer(eq.G[:, l], eq.G[:, l]) for l in range(3) if l != k - 1
                )
                expected = 0.25 * math.log2(np.linalg.det(full) / np.linalg.det(part))
                np.testing.assert_allclose(breakdown.per_user[k - 1], expected, rtol=1e-8, atol=1e-12)
            np.testing.assert_allclose(breakdown.sum, breakdown.per_user.sum(), rtol=0)

    @pytest.mark.parametrize("P", [1.0, 1e2, 1e4])
    def test_diagonal_repetition_closed_form(self, P):
        H = np.diag([1.3, 0.7, -2.1])
        a = coeffs((1, 1, 1), (0, 0, 0))
        breakdown = sum_rate(H, a, P)
        for k in range(3):
            expected = 0.25 * math.log2(1.0 + 2.0 * P * H[k, k] ** 2)
            np.testing.assert_allclose(breakdown.per_user[k], expected, atol=1e-10, rtol=1e-10)

    def test_silent_second_slot_closed_form(self):
        rng = np.random.default_rng(4)
        H = rng.normal(size=(3, 3))
        P = 25.0
        breakdown = sum_rate(H, np.zeros(9), P)
        for k in range(3):
            total = float(H[k] @ H[k])
            inter = total - H[k, k] ** 2
            expected = 0.25 * math.log2((1 + P * total) / (1 + P * inter))
            np.testing.assert_allclose(breakdown.per_user[k], expected, rtol=1e-12)

    def test_rates_nonnegative(self):
        rng = np.random.default_rng(5)
        for _ in range(200):
            breakdown = sum_rate(rng.normal(size=(3, 3)), rng.normal(size=9), 10.0)
            assert (breakdown.per_user >= 0).all()

    def test_receive_weights_do_not_matter(self):
        rng = np.random.default_rng(6)
        H = rng.normal(size=(3, 3))
        t = rng.normal(size=3)
        f = rng.normal(size=3)
        ref = sum_rate(H, coeffs(t, f), 8.0)
        for _ in range(10):
            other = sum_rate(H, coeffs(t, f, d=tuple(rng.normal(size=3))), 8.0)
            assert other.sum == ref.sum
            assert (other.per_user == ref.per_user).all()

    def test_aligned_solution_has_half_dof_per_user(self):
        # rate gain from P -> 100 P approaches (1/4) log2(100) per user
        rng = np.random.default_rng(7)
        checked = 0
        for _ in range(40):
            H = rng.normal(size=(3, 3))
            if not check_nondegeneracy(H).overall:
                continue
            a = solve_exact_alignment(H).a.a
            step = 0.25 * math.log2(100.0)
            for P in (1e4, 1e6):
                lo = sum_rate(H, max_scale(constraint_matrices(H, P), a) * a, P)
                hi_P = 100.0 * P
                hi = sum_rate(H, max_scale(constraint_matrices(H, hi_P), a) * a, hi_P)
                gain = hi.per_user - lo.per_user
                assert np.all(np.abs(gain - step) <= 0.05 * step)
            checked += 1
        assert checked >= 30

    def test_nonpositive_power(self):
        with pytest.raises(NonpositivePower):
            sum_rate(EXAMPLE_H, np.zeros(9), 0.0)


class TestBaselineRates:
    def test_identity_unit_power(self):
        rates = baseline_rates(np.eye(3), 1.0)
        assert rates.time_sharing == pytest.approx(1.0, abs=1e-12)
        assert rates.treat_as_noise == pytest.approx(1.5, abs=1e-12)
        assert rates.ergodic_ia == pytest.approx(0.75 * math.log2(3.0), abs=1e-12)

    def test_formulas_per_user(self):
        rng = np.random.default_rng(8)
        H = rng.normal(size=(3, 3))
        P = 37.0
        rates = baseline_rates(H, P)
        ts = sum(math.log2(1 + 3 * P * H[k, k] ** 2) / 6 for k in range(3))
        inter = [sum(P * H[k, j] ** 2 for j in range(3) if j != k) for k in range(3)]
        tan = sum(math.log2(1 + P * H[k, k] ** 2 / (1 + inter[k])) / 2 for k in range(3))
        eia = sum(math.log2(1 + 2 * P * H[k, k] ** 2) / 4 for k in range(3))
        np.testing.assert_allclose(rates.time_sharing, ts, rtol=1e-12)
        np.testing.assert_allclose(rates.treat_as_noise, tan, rtol=1e-12)
        np.testing.assert_allclose(rates.ergodic_ia, eia, rtol=1e-12)

    def test_nonpositive_power(self):
        with pytest.raises(NonpositivePower):
            baseline_rates(EXAMPLE_H, -1.0)
