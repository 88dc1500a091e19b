"""Inner solver: update formulas, convergence bookkeeping, optimality."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import brute_force_p2, kkt_residuals, random_covariance_p2
from tpgraph import (
    DataError,
    SolverConfig,
    adapt_rho,
    check_convergence,
    omega_update,
    s_neg,
    soft_threshold,
    solve_inner,
    u_update,
    uniform_weights,
    v_update,
)

TIGHT = dict(tau_abs=1e-10, tau_rel=1e-10, k_inner_max=50_000)


def random_problem(rng, p, n=None):
    n = n or 20 * p
    x = rng.normal(size=(n, p))
    sigma = x.T @ x / n
    return (sigma + sigma.T) / 2


class TestSNeg:
    def test_positive_input_zeroed(self):
        assert s_neg(0.5, 0.1) == 0.0

    def test_negative_shrunk(self):
        np.testing.assert_allclose(s_neg(-0.5, 0.1), -0.4)

    def test_small_magnitude_zeroed_exactly(self):
        assert s_neg(-0.05, 0.1) == 0.0

    def test_zero_input(self):
        assert s_neg(0.0, 0.1) == 0.0

    @given(
        a=st.floats(-1e6, 1e6, allow_nan=False),
        beta=st.floats(0.0, 1e6, allow_nan=False),
    )
    @settings(max_examples=200, deadline=None)
    def test_never_positive_never_grows(self, a, beta):
        out = float(s_neg(a, beta))
        assert out <= 0.0
        assert abs(out) <= abs(a)
        if a >= 0 or abs(a) <= beta:
            assert out == 0.0


class TestOmegaUpdate:
    def test_scalar_root(self):
        # stationarity 1 - 1/w + 2w = 0 has positive root 0.5
        out = omega_update(np.array([[1.0]]), np.zeros((1, 1)), np.zeros((1, 1)), 2.0)
        np.testing.assert_allclose(out, [[0.5]], atol=1e-14)

    def test_identity_decouples(self):
        out = omega_update(np.eye(2), np.zeros((2, 2)), np.zeros((2, 2)), 2.0)
        np.testing.assert_allclose(out, 0.5 * np.eye(2), atol=1e-14)

    def test_stationarity_residual(self):
        rng = np.random.default_rng(7)
        sigma = random_problem(rng, 6)
        v = rng.normal(size=(6, 6))
        v = (v + v.T) / 2
        u = rng.normal(size=(6, 6))
        u = (u + u.T) / 2
        rho = 1.7
        omega = omega_update(sigma, v, u, rho)
        resid = sigma - np.linalg.inv(omega) + rho * (omega - v - u)
        assert np.linalg.norm(resid) <= 1e-8
        assert np.linalg.eigvalsh(omega)[0] > 0

    def test_rejects_bad_rho(self):
        with pytest.raises(ValueError):
            omega_update(np.eye(2), np.zeros((2, 2)), np.zeros((2, 2)), 0.0)


class TestVUpdate:
    def test_diagonal_unpenalized(self):
        omega = np.diag([0.7, 0.9])
        out = v_update(omega, np.zeros((2, 2)), uniform_weights(2, 5.0), 2.0)
        np.testing.assert_array_equal(np.diag(out), [0.7, 0.9])

    def test_offdiagonal_thresholded(self):
        omega = np.array([[1.0, -0.5], [-0.5, 1.0]])
        out = v_update(omega, np.zeros((2, 2)), uniform_weights(2, 0.2), 2.0)
        np.testing.assert_allclose(out[0, 1], -0.4)

    def test_positive_offdiagonal_clipped(self):
        omega = np.array([[1.0, 0.3], [0.3, 1.0]])
        out = v_update(omega, np.zeros((2, 2)), uniform_weights(2, 0.01), 2.0)
        assert out[0, 1] == 0.0 and out[1, 0] == 0.0

    def test_two_sided_variant_keeps_positives(self):
        omega = np.array([[1.0, 0.3], [0.3, 1.0]])
        out = v_update(omega, np.zeros((2, 2)), uniform_weights(2, 0.2), 2.0,
                       threshold="two-sided")
        np.testing.assert_allclose(out[0, 1], 0.2)

    def test_exactly_symmetric(self):
        rng = np.random.default_rng(8)
        omega = rng.normal(size=(5, 5))
        omega = (omega + omega.T) / 2
        out = v_update(omega, np.zeros((5, 5)), uniform_weights(5, 0.1), 1.0)
        np.testing.assert_array_equal(out, out.T)


class TestUUpdate:
    def test_fixed_point(self):
        v = np.array([[1.0, -0.2], [-0.2, 1.0]])
        np.testing.assert_array_equal(u_update(np.zeros((2, 2)), v, v), np.zeros((2, 2)))

    def test_cancellation(self):
        eye = np.eye(2)
        np.testing.assert_array_equal(u_update(eye, np.zeros((2, 2)), eye), np.zeros((2, 2)))

    def test_elementwise(self):
        rng = np.random.default_rng(9)
        u, v, omega = rng.normal(size=(3, 4, 4))
        expected = np.array([[u[i, j] + v[i, j] - omega[i, j] for j in range(4)]
                             for i in range(4)])
        np.testing.assert_allclose(u_update(u, v, omega), expected, atol=1e-15)


class TestCheckConvergence:
    def test_converged_at_fixed_point(self):
        omega = np.eye(3)
        converged, d_p, d_d = check_convergence(
            omega, omega, omega, np.zeros((3, 3)), 2.0, 1e-4, 1e-4, 3
        )
        assert converged and d_p == 0.0 and d_d == 0.0

    def test_large_gap_not_converged(self):
        omega = np.eye(3) * 10
        v = np.zeros((3, 3))
        converged, d_p, _ = check_convergence(
            omega, v, v, np.zeros((3, 3)), 2.0, 1e-4, 1e-4, 3
        )
        assert not converged
        np.testing.assert_allclose(d_p, np.linalg.norm(omega))

    def test_matches_direct_norms(self):
        rng = np.random.default_rng(10)
        omega, v, v_prev, u = rng.normal(size=(4, 5, 5))
        rho = 3.0
        _, d_p, d_d = check_convergence(omega, v, v_prev, u, rho, 1e-4, 1e-4, 5)
        assert abs(d_p - np.sqrt(np.sum((omega - v) ** 2))) <= 1e-12
        assert abs(d_d - rho * np.sqrt(np.sum((v - v_prev) ** 2))) <= 1e-12


class TestAdaptRho:
    def test_primal_dominates(self):
        u = np.full((2, 2), 8.0)
        rho, u2 = adapt_rho(2.0, 3.0, 0.1, 10.0, u)
        assert rho == 4.0
        np.testing.assert_array_equal(u2, u / 2)

    def test_dual_dominates(self):
        u = np.full((2, 2), 8.0)
        rho, u2 = adapt_rho(2.0, 0.1, 3.0, 10.0, u)
        assert rho == 1.0
        np.testing.assert_array_equal(u2, 2 * u)

    def test_balanced_unchanged(self):
        u = np.eye(2)
        rho, u2 = adapt_rho(2.0, 1.0, 1.0, 10.0, u)
        assert rho == 2.0
        np.testing.assert_array_equal(u2, u)


class TestSolveInner:
    def test_identity_covariance_diagonal_optimum(self):
        cfg = SolverConfig(lambda0=0.1, **TIGHT)
        res = solve_inner(np.eye(4), uniform_weights(4, 0.1), cfg)
        assert res.converged
        off = res.v[~np.eye(4, dtype=bool)]
        assert np.all(off == 0.0)
        np.testing.assert_allclose(res.omega, np.eye(4), atol=1e-6)

    def test_huge_penalty_forces_diagonal(self):
        rng = np.random.default_rng(11)
        sigma = random_problem(rng, 5)
        cfg = SolverConfig(lambda0=1e6, **TIGHT)
        res = solve_inner(sigma, uniform_weights(5, 1e6), cfg)
        off = res.v[~np.eye(5, dtype=bool)]
        assert np.all(off == 0.0)
        np.testing.assert_allclose(res.omega, np.diag(1.0 / np.diag(sigma)), atol=1e-4)

    def test_matches_brute_force_p2(self):
        rng = np.random.default_rng(12)
        sigma = random_covariance_p2(rng)
        lam = 0.05
        cfg = SolverConfig(lambda0=lam, **TIGHT)
        res = solve_inner(sigma, uniform_weights(2, lam), cfg)
        assert res.converged
        target, _ = brute_force_p2(sigma, lam)
        a, c = res.omega[0, 0], res.omega[1, 1]
        b = res.v[0, 1]
        achieved = (
            a * sigma[0, 0] + c * sigma[1, 1] + 2 * b * sigma[0, 1]
            - np.log(a * c - b * b) + 2 * lam * abs(b)
        )
        assert achieved <= target + 1e-5

    def test_kkt_conditions_at_convergence(self):
        rng = np.random.default_rng(13)
        sigma = random_problem(rng, 5)
        weights = uniform_weights(5, 0.05)
        cfg = SolverConfig(lambda0=0.05, **TIGHT)
        res = solve_inner(sigma, weights, cfg)
        assert res.converged
        neg_violation, zero_excess = kkt_residuals(sigma, res.omega, res.v, weights)
        assert neg_violation <= 1e-4
        assert zero_excess <= 1e-6

    def test_iterates_pd_and_sign_constrained(self):
        rng = np.random.default_rng(14)
        sigma = random_problem(rng, 6)
        seen = []

        def monitor(state):
            if len(seen) < 50:
                assert np.linalg.eigvalsh(state.omega)[0] > 0
                off = state.v[~np.eye(6, dtype=bool)]
                assert np.all(off <= 0.0)
            seen.append(state.rho)

        solve_inner(sigma, uniform_weights(6, 0.1), SolverConfig(lambda0=0.1), monitor)
        assert seen

    def test_deterministic(self):
        rng = np.random.default_rng(15)
        sigma = random_problem(rng, 5)
        cfg = SolverConfig(lambda0=0.2)
        first = solve_inner(sigma, uniform_weights(5, 0.2), cfg)
        second = solve_inner(sigma, uniform_weights(5, 0.2), cfg)
        np.testing.assert_array_equal(first.omega, second.omega)
        np.testing.assert_array_equal(first.v, second.v)
        assert first.iterations == second.iterations

    def test_iteration_cap_returns_unconverged(self):
        rng = np.random.default_rng(16)
        sigma = random_problem(rng, 6)
        cfg = SolverConfig(lambda0=0.1, k_inner_max=3)
        res = solve_inner(sigma, uniform_weights(6, 0.1), cfg)
        assert not res.converged
        assert res.iterations == 3

    def test_zero_diagonal_rejected(self):
        sigma = np.diag([1.0, 0.0])
        with pytest.raises(DataError, match="diagonal"):
            solve_inner(sigma, uniform_weights(2, 0.1), SolverConfig(lambda0=0.1))


class TestSoftThreshold:
    @given(
        a=st.floats(-100, 100, allow_nan=False),
        beta=st.floats(0, 100, allow_nan=False),
    )
    @settings(max_examples=100, deadline=None)
    def test_shrinks_toward_zero(self, a, beta):
        out = float(soft_threshold(a, beta))
        assert abs(out) <= max(abs(a) - beta, 0.0) + 1e-12
        if a != 0:
            assert out * a >= 0


class TestSolverConfig:
    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            SolverConfig(lambda0=0.0)
        with pytest.raises(ValueError):
            SolverConfig(lambda0=1.0, rho0=-1.0)
        with pytest.raises(ValueError):
            SolverConfig(lambda0=1.0, k_outer_max=0)

    def test_rejects_unknown_threshold(self):
        with pytest.raises(ValueError):
            SolverConfig(lambda0=1.0, threshold="hard")
