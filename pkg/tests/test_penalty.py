"""Penalty / conjugate table tests, anchored by brute-force oracles."""

import numpy as np
import pytest

from shmdual.penalty import (
    ConjugateTable,
    LevelSet,
    conjugate_eval,
    conjugate_subdiff,
    penalty_eval,
    smoothed_conjugate_grad,
    smoothed_penalty_grad,
)

U3 = LevelSet.uniform(3)
T3 = ConjugateTable.from_levels(U3)

# Level counts under test are chosen so every level is a dyadic rational:
# breakpoint identities then hold exactly in binary floating point.
LEVEL_COUNTS = [2, 3, 5, 9]


def dense_u_grid(n=10_001):
    # n-1 must be divisible by (L-1) for the levels to land on grid points,
    # otherwise the brute-force conjugate misses the true maximizers.
    return np.linspace(-1.0, 1.0, n)


def brute_conjugate(omega, levels, ugrid):
    """max_u (u*omega - L(u)) over a dense u-grid: the conjugacy oracle."""
    pen = penalty_eval(ugrid, levels)
    return np.max(np.outer(omega, ugrid) - pen[None, :], axis=1)


class TestLevelSet:
    def test_uniform_construction(self):
        ls = LevelSet.uniform(5)
        assert ls.levels == (-1.0, -0.5, 0.0, 0.5, 1.0)
        assert ls.gap == 0.5

    @pytest.mark.parametrize(
        "bad",
        [
            (1.0,),
            (-1.0, 0.5),            # wrong right endpoint
            (-0.5, 1.0),            # wrong left endpoint
            (-1.0, 0.2, 1.0),       # non-uniform
            (-1.0, 1.0, -1.0),      # not increasing
        ],
    )
    def test_rejects_invalid(self, bad):
        with pytest.raises(ValueError):
            LevelSet(bad)


class TestPenalty:
    def test_spec_values_three_level(self):
        assert penalty_eval(0.5, U3) == pytest.approx(0.5)
        assert penalty_eval(-1.0, U3) == 1.0
        assert penalty_eval(1.0, U3) == 1.0

    @pytest.mark.parametrize("count", LEVEL_COUNTS)
    def test_interpolates_parabola_at_levels(self, count):
        ls = LevelSet.uniform(count)
        u = ls.as_array()
        np.testing.assert_allclose(penalty_eval(u, ls), u * u, rtol=0, atol=1e-15)

    @pytest.mark.parametrize("count", LEVEL_COUNTS)
    def test_dominates_parabola_between_levels(self, count):
        ls = LevelSet.uniform(count)
        u = dense_u_grid(2001)
        pen = penalty_eval(u, ls)
        assert np.all(pen >= u * u - 1e-15)

    def test_sup_norm_is_one(self):
        for count in LEVEL_COUNTS:
            pen = penalty_eval(dense_u_grid(4001), LevelSet.uniform(count))
            assert np.max(pen) == 1.0
            assert np.min(pen) >= 0.0

    def test_domain_error(self):
        with pytest.raises(ValueError):
            penalty_eval(1.0000001, U3)
        with pytest.raises(ValueError):
            penalty_eval(np.array([0.0, -1.5]), U3)


class TestConjugate:
    def test_spec_values_three_level(self):
        assert conjugate_eval(0.0, T3) == 0.0
        assert conjugate_eval(2.0, T3) == 1.0
        assert conjugate_eval(-3.0, T3) == 2.0

    @pytest.mark.parametrize("count", LEVEL_COUNTS)
    def test_brute_force_conjugacy(self, count):
        ls = LevelSet.uniform(count)
        table = ConjugateTable.from_levels(ls)
        omega = np.linspace(-4.0, 4.0, 1001)
        oracle = brute_conjugate(omega, ls, dense_u_grid())
        np.testing.assert_allclose(conjugate_eval(omega, table), oracle, rtol=0, atol=1e-6)

    @pytest.mark.parametrize("count", LEVEL_COUNTS)
    def test_breakpoint_continuity_exact(self, count):
        table = ConjugateTable.from_levels(LevelSet.uniform(count))
        for k, bp in enumerate(table.breakpoints):
            left = table.slopes[k] * bp + table.intercepts[k]
            right = table.slopes[k + 1] * bp + table.intercepts[k + 1]
            assert left == right
            assert left == table.slopes[k] * table.slopes[k + 1]

    def test_breakpoint_locations(self):
        # three levels: breakpoints at -1 and 1, extended ends at -3 and 3
        np.testing.assert_array_equal(T3.breakpoints, [-1.0, 1.0])
        assert T3.omega_lo == -3.0
        assert T3.omega_hi == 3.0

    @pytest.mark.parametrize("count", LEVEL_COUNTS)
    def test_fenchel_young(self, count):
        ls = LevelSet.uniform(count)
        table = ConjugateTable.from_levels(ls)
        u = dense_u_grid(401)
        omega = np.linspace(-4.0, 4.0, 401)
        pen = penalty_eval(u, ls)
        conj = conjugate_eval(omega, table)
        gap = pen[:, None] + conj[None, :] - u[:, None] * omega[None, :]
        assert np.min(gap) >= -1e-12
        # equality is attained: every omega column touches zero at some level
        assert np.max(np.min(gap, axis=0)) <= 1e-6


class TestSubdifferential:
    def test_spec_values_three_level(self):
        assert conjugate_subdiff(0.5, T3) == (0.0, 0.0)
        assert conjugate_subdiff(1.0, T3) == (0.0, 1.0)
        assert conjugate_subdiff(5.0, T3) == (1.0, 1.0)
        assert conjugate_subdiff(-5.0, T3) == (-1.0, -1.0)

    @pytest.mark.parametrize("count", LEVEL_COUNTS)
    def test_selection_monotone_and_in_levels(self, count):
        ls = LevelSet.uniform(count)
        table = ConjugateTable.from_levels(ls)
        omega = np.sort(np.concatenate([np.linspace(-5, 5, 2001), table.breakpoints]))
        lo, hi = conjugate_subdiff(omega, table)
        assert np.all(np.diff(lo) >= 0)
        assert np.all(np.diff(hi) >= 0)
        assert np.all(hi >= lo)
        levels = ls.as_array()
        assert np.all(np.isin(lo, levels))
        assert np.all(np.isin(hi, levels))


def envelope_oracle(omega, mu, table, span=6.0, n=2_000_001):
    """Numeric minimization of v -> L*(v) + (omega - v)^2 / (2 mu).

    The candidate grid includes the conjugate's breakpoints, where the
    minimum may sit exactly.
    """
    v = np.sort(np.concatenate([np.linspace(omega - span, omega + span, n), table.breakpoints]))
    obj = conjugate_eval(v, table) + (omega - v) ** 2 / (2.0 * mu)
    i = np.argmin(obj)
    return obj[i], (omega - v[i]) / mu


class TestSmoothedConjugate:
    def test_flat_interior_untouched(self):
        for mu in (0.4, 0.1, 0.01):
            value, grad = smoothed_conjugate_grad(0.5, mu, T3)
            assert value == 0.0
            assert grad == 0.0

    def test_kink_transition_band(self):
        # the smoothing band at breakpoint 1 spans [1, 1 + mu]; the gradient
        # ramps linearly from the left slope to the right slope across it
        mu = 0.1
        _, g_left = smoothed_conjugate_grad(1.0, mu, T3)
        _, g_mid = smoothed_conjugate_grad(1.0 + mu / 2, mu, T3)
        _, g_right = smoothed_conjugate_grad(1.0 + mu, mu, T3)
        assert g_left == 0.0
        assert 0.0 < g_mid < 1.0
        assert g_mid == pytest.approx(0.5)
        assert g_right == pytest.approx(1.0)

    def test_saturated_slope_matches_grid_oracle(self):
        value, grad = smoothed_conjugate_grad(3.0, 0.01, T3)
        assert abs(grad - 1.0) <= 1e-12
        ref_value, ref_grad = envelope_oracle(3.0, 0.01, T3)
        assert abs(value - ref_value) <= 1e-9
        assert abs(grad - ref_grad) <= 1e-3  # grid-limited oracle

    @pytest.mark.parametrize("count", LEVEL_COUNTS)
    def test_matches_grid_oracle(self, count):
        table = ConjugateTable.from_levels(LevelSet.uniform(count))
        rng = np.random.default_rng(7)
        for omega in rng.uniform(-4, 4, size=8):
            for mu in (0.5, 0.05):
                value, grad = smoothed_conjugate_grad(omega, mu, table)
                ref_value, _ = envelope_oracle(omega, mu, table, n=400_001)
                assert abs(value - ref_value) <= 1e-8

    @pytest.mark.parametrize("count", LEVEL_COUNTS)
    def test_matches_conjugate_of_augmented_penalty(self, count):
        # independent identity: the envelope of the conjugate equals the
        # conjugate of  u -> L(u) + mu*u^2/2, evaluated by brute force
        ls = LevelSet.uniform(count)
        table = ConjugateTable.from_levels(ls)
        u = dense_u_grid(200_001)
        mu = 0.2
        pen = penalty_eval(u, ls) + 0.5 * mu * u * u
        for omega in np.linspace(-3.5, 3.5, 29):
            value, _ = smoothed_conjugate_grad(omega, mu, table)
            assert value == pytest.approx(np.max(u * omega - pen), abs=1e-8)

    def test_gradient_vs_finite_differences(self):
        rng = np.random.default_rng(42)
        for count in LEVEL_COUNTS:
            table = ConjugateTable.from_levels(LevelSet.uniform(count))
            mu = 10 ** rng.uniform(-3, -0.5)
            checked = 0
            while checked < 100:
                omega = rng.uniform(-4, 4)
                delta = 1e-7
                # stay clear of the piecewise-quadratic seams, where central
                # differences straddle a curvature jump
                nb = table.breakpoints
                seams = np.concatenate([nb + mu * table.slopes[:-1], nb + mu * table.slopes[1:]])
                if np.min(np.abs(omega - seams)) < 10 * delta:
                    continue
                _, grad = smoothed_conjugate_grad(omega, mu, table)
                vp, _ = smoothed_conjugate_grad(omega + delta, mu, table)
                vm, _ = smoothed_conjugate_grad(omega - delta, mu, table)
                fd = (vp - vm) / (2 * delta)
                assert abs(fd - grad) <= 1e-6 * max(1.0, abs(grad))
                checked += 1

    def test_envelope_bounds_and_convergence(self):
        omega = np.linspace(-4, 4, 801)
        exact = conjugate_eval(omega, T3)
        prev_gap = None
        for mu in (1e-1, 1e-2, 1e-3):
            value, _ = smoothed_conjugate_grad(omega, mu, T3)
            gap = exact - value
            assert np.all(gap >= -1e-14)
            assert np.all(gap <= mu / 2 + 1e-14)
            if prev_gap is not None:
                assert np.all(gap <= prev_gap + 1e-14)
            prev_gap = gap

    def test_rejects_nonpositive_mu(self):
        with pytest.raises(ValueError):
            smoothed_conjugate_grad(0.0, 0.0, T3)
        with pytest.raises(ValueError):
            smoothed_conjugate_grad(0.0, -1e-3, T3)


class TestSmoothedPenalty:
    def test_node_and_branch_regions(self):
        # u = 0 is a node of the three-level penalty with 0 in d L(0)
        value, grad = smoothed_penalty_grad(0.0, 0.1, U3)
        assert value == 0.0
        assert grad == 0.0
        # far outside [-1, 1] the prox saturates at the endpoint
        value, grad = smoothed_penalty_grad(2.0, 0.1, U3)
        assert grad == pytest.approx((2.0 - 1.0) / 0.1)
        assert value == pytest.approx(1.0 + (2.0 - 1.0) ** 2 / 0.2)

    @pytest.mark.parametrize("count", LEVEL_COUNTS)
    def test_matches_grid_oracle(self, count):
        ls = LevelSet.uniform(count)
        v = dense_u_grid(400_001)
        pen = penalty_eval(v, ls)
        rng = np.random.default_rng(3)
        for u in rng.uniform(-1.3, 1.3, size=10):
            for mu in (0.3, 0.03):
                value, _ = smoothed_penalty_grad(u, mu, ls)
                oracle = np.min(pen + (u - v) ** 2 / (2 * mu))
                assert value == pytest.approx(oracle, abs=1e-8)

    def test_gradient_vs_finite_differences(self):
        rng = np.random.default_rng(11)
        ls = LevelSet.uniform(5)
        nodes = ls.as_array()
        sig = nodes[:-1] + nodes[1:]
        mu = 0.05
        seams = np.concatenate([nodes[:-1] + mu * sig, nodes[1:] + mu * sig])
        checked = 0
        while checked < 50:
            u = rng.uniform(-1.5, 1.5)
            delta = 1e-7
            if np.min(np.abs(u - seams)) < 10 * delta:
                continue
            _, grad = smoothed_penalty_grad(u, mu, ls)
            vp, _ = smoothed_penalty_grad(u + delta, mu, ls)
            vm, _ = smoothed_penalty_grad(u - delta, mu, ls)
            assert (vp - vm) / (2 * delta) == pytest.approx(grad, abs=1e-6)
            checked += 1

    def test_rejects_nonpositive_mu(self):
        with pytest.raises(ValueError):
            smoothed_penalty_grad(0.0, -0.1, U3)
