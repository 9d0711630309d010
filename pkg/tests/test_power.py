import math

import numpy as np
import pytest

from fbia import (
    CoefficientVector,
    NonpositivePower,
    constraint_matrices,
    is_feasible,
    max_scale,
)

EXAMPLE_H = np.array([[1.0, 2.0, 3.0], [4.0, 5.0, 6.0], [7.0, 8.0, 10.0]])


def coeffs(t, f, d=(0.0, 0.0, 0.0)):
    return CoefficientVector.from_parts(d, t, f)


class TestConstraintMatrices:
    def test_identity_unit_power(self):
        region = constraint_matrices(np.eye(3), 1.0)
        for l in range(3):
            np.testing.assert_allclose(region.E[l], [[1.0, 1.0], [0.0, 1.0]])

    def test_high_power_limit(self):
        region = constraint_matrices(EXAMPLE_H, 1e18)
        for l in range(3):
            cross = sum(EXAMPLE_H[l, j] ** 2 for j in range(3) if j != l)
            np.testing.assert_allclose(region.E[l, 1, 1], math.sqrt(cross), rtol=1e-6)

    def test_quadratic_expansion(self):
        # ||E_l (t, f)||^2 must equal the expanded slot-2 power at unit P
        rng = np.random.default_rng(0)
        for _ in range(100):
            H = rng.normal(size=(3, 3))
            P = float(10 ** rng.uniform(-2, 6))
            region = constraint_matrices(H, P)
            t, f = rng.normal(size=2)
            for l in range(3):
                col = region.E[l] @ np.array([t, f])
                got = float(col @ col)
                expected = t * t + 2 * t * f * H[l, l] + f * f * (float(H[l] @ H[l]) + 1.0 / P)
                np.testing.assert_allclose(got, expected, rtol=1e-12)

    def test_nonpositive_power(self):
        with pytest.raises(NonpositivePower):
            constraint_matrices(EXAMPLE_H, 0.0)
        with pytest.raises(NonpositivePower):
            constraint_matrices(EXAMPLE_H, -5.0)


class TestIsFeasible:
    def test_pure_resend_sits_on_boundary(self):
        region = constraint_matrices(EXAMPLE_H, 3.0)
        assert is_feasible(region, coeffs((1, 1, 1), (0, 0, 0)), tol=0.0)

    def test_zero_vector_feasible(self):
        region = constraint_matrices(EXAMPLE_H, 1.0)
        assert is_feasible(region, np.zeros(9), tol=0.0)

    def test_scaled_boundary_infeasible(self):
        region = constraint_matrices(EXAMPLE_H, 3.0)
        a = 1.01 * coeffs((1, 1, 1), (0, 0, 0)).a
        assert not is_feasible(region, a, tol=1e-6)

    def test_receive_weights_unconstrained(self):
        region = constraint_matrices(EXAMPLE_H, 1.0)
        a = coeffs((0, 0, 0), (0, 0, 0), d=(1e9, -1e9, 1e9))
        assert is_feasible(region, a)

    def test_negative_tol_rejected(self):
        region = constraint_matrices(EXAMPLE_H, 1.0)
        with pytest.raises(ValueError):
            is_feasible(region, np.zeros(9), tol=-1e-3)


def bisect_max_scale(region, direction, hi=1e12, iters=200):
    """Feasibility-only oracle for the largest feasible scaling."""
    lo = 0.0
    arr = direction.a if hasattr(direction, "a") else np.asarray(direction, float)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if is_feasible(region, mid * arr, tol=0.0):
            lo = mid
        else:
            hi = mid
    return lo


class TestMaxScale:
    def test_identity_example(self):
        region = constraint_matrices(np.eye(3), 1.0)
        assert max_scale(region, coeffs((1, 1, 1), (0, 0, 0))) == pytest.approx(1.0, abs=1e-14)

    def test_homogeneity(self):
        rng = np.random.default_rng(1)
        region = constraint_matrices(EXAMPLE_H, 10.0)
        u = rng.normal(size=9)
        base = max_scale(region, u)
        for c in (0.25, 3.0, 1e4):
            np.testing.assert_allclose(max_scale(region, c * u), base / c, rtol=1e-12)

    def test_matches_bisection_oracle(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            H = rng.normal(size=(3, 3))
            region = constraint_matrices(H, float(10 ** rng.uniform(-1, 4)))
            u = rng.normal(size=9)
            closed = max_scale(region, u)
            oracle = bisect_max_scale(region, u)
            np.testing.assert_allclose(closed, oracle, rtol=1e-6)

    def test_boundary_activity(self):
        rng = np.random.default_rng(3)
        from fbia.power import _pair_norms

        for _ in range(100):
            H = rng.normal(size=(3, 3))
            region = constraint_matrices(H, 100.0)
            u = rng.normal(size=9)
            beta = max_scale(region, u)
            norms = _pair_norms(region, beta * u[3:6], beta * u[6:9])
            assert abs(norms.max() - 1.0) <= 1e-10
            assert is_feasible(region, beta * u, tol=1e-9)
            assert not is_feasible(region, (1 + 1e-6) * beta * u, tol=0.0)

    def test_unbounded_when_slot2_silent(self):
        region = constraint_matrices(EXAMPLE_H, 1.0)
        direction = coeffs((0, 0, 0), (0, 0, 0), d=(1, 1, 1))
        assert max_scale(region, direction) == math.inf

    def test_single_silent_user_imposes_no_bound(self):
        region = constraint_matrices(np.eye(3), 1.0)
        direction = coeffs((1, 1, 0), (0, 0, 0))
        assert max_scale(region, direction) == pytest.approx(1.0, abs=1e-14)
