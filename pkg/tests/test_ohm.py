from fractions import Fraction

import numpy as np
import pytest

from nsmhall import spectral as sp
from nsmhall.errors import NoConvergence
from nsmhall.ohm import (
    OhmSolveOptions, hall_det, hall_matrix, hall_matrix_apply, hall_matrix_solve, ohm_residual,
    solve_ohm_dense, solve_ohm_implicit, solve_ohm_lagged,
)
from nsmhall.params import PhysicalParams, Variant


def _fields(box, seed):
    rng = np.random.default_rng(seed)
    return tuple(sp.random_field(box, rng) for _ in range(3))


class TestHallMatrix:
    def test_determinant_example(self):
        assert hall_det((Fraction(1), Fraction(0), Fraction(0)), Fraction(1)) == 2

    def test_determinant_exact_random(self):
        rng = np.random.default_rng(0)
        for _ in range(200):
            B = tuple(Fraction(int(x), int(y)) for x, y in
                      zip(rng.integers(-50, 50, 3), rng.integers(1, 20, 3)))
            k = Fraction(int(rng.integers(0, 30)), int(rng.integers(1, 10)))
            assert hall_det(B, k) == k * k * sum(b * b for b in B) + 1

    def test_matrix_matches_cross(self):
        B, j, k = np.array([0.3, -1.2, 0.5]), np.array([1.0, 2.0, -0.4]), 0.8
        M = np.array(hall_matrix(list(B), k), dtype=float)
        np.testing.assert_allclose(M @ j, j + k * np.cross(j, B), atol=1e-15)
        np.testing.assert_allclose(hall_matrix_apply(B, k, j), M @ j, atol=1e-15)

    def test_solve_round_trip(self):
        rng = np.random.default_rng(3)
        B, r = rng.standard_normal((3, 500)), rng.standard_normal((3, 500))
        back = hall_matrix_apply(B, 0.6, hall_matrix_solve(B, 0.6, r))
        assert np.max(np.abs(back - r)) < 1e-14


class TestImplicitSolve:
    @pytest.mark.parametrize("d", [2, 3])
    def test_matches_dense_oracle(self, d):
        box = sp.BoxSpec(d, 8)
        v, E, B = _fields(box, d)
        p = PhysicalParams(Variant.NSM_GO, kappa=0.5 / sp.sup_norm(B))
        it = solve_ohm_implicit(v, E, B, p, OhmSolveOptions(tol=1e-14, max_iters=500))
        ref = solve_ohm_dense(v, E, B, p)
        assert sp.l2_norm(it.j - ref) / sp.l2_norm(ref) < 1e-10
        assert it.contraction == pytest.approx(0.5)

    def test_residual_and_divergence(self, box2):
        v, E, B = _fields(box2, 11)
        p = PhysicalParams(Variant.NSM_GO, kappa=0.4 / sp.sup_norm(B))
        res = solve_ohm_implicit(v, E, B, p)
        assert ohm_residual(res.j, v, E, B, p) < 1e-11
        assert sp.divergence_norm(res.j) < 1e-12
        assert res.residuals[-1] <= 1e-12

    def test_no_hall_term_is_one_iteration(self, box2):
        v, E, B = _fields(box2, 5)
        res = solve_ohm_implicit(v, E, B, PhysicalParams(Variant.NSM_SO))
        assert res.iterations == 1

    def test_raises_no_convergence(self, box2):
        v, E, B = _fields(box2, 5)
        p = PhysicalParams(Variant.NSM_GO, kappa=5.0 / sp.sup_norm(B))
        with pytest.raises(NoConvergence) as info:
            solve_ohm_implicit(v, E, B, p, OhmSolveOptions(max_iters=20))
        assert info.value.iterations == 20

    def test_plain_nsm_not_projected(self, box2):
        v, E, B = _fields(box2, 8)
        E = sp.random_field(box2, np.random.default_rng(1), solenoidal=False)
        res = solve_ohm_implicit(v, E, B, PhysicalParams(Variant.NSM))
        assert sp.divergence_norm(res.j) > 1e-3


class TestLagged:
    def test_fixed_point_of_lagged_map_is_implicit_solution(self, box2):
        v, E, B = _fields(box2, 2)
        p = PhysicalParams(Variant.NSM_GO, kappa=0.3 / sp.sup_norm(B))
        j = solve_ohm_implicit(v, E, B, p, OhmSolveOptions(tol=1e-14)).j
        again = solve_ohm_lagged(v, E, B, j, p)
        assert sp.l2_norm(again - j) / sp.l2_norm(j) < 1e-12
