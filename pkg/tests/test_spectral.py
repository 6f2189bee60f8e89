import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nsmhall import spectral as sp
from nsmhall.errors import BoxMismatch, NegativePowerOnMeanMode
from nsmhall.dynamics import _beltrami


class TestBoxSpec:
    def test_rejects_bad_dimension(self):
        with pytest.raises(ValueError):
            sp.BoxSpec(4, 16)

    @pytest.mark.parametrize("n", [7, 6, 15])
    def test_rejects_bad_grid(self, n):
        with pytest.raises(ValueError):
            sp.BoxSpec(2, n)

    def test_k0_and_volume(self):
        box = sp.BoxSpec(2, 16, 4 * np.pi)
        assert box.k0 == pytest.approx(0.5)
        assert box.volume == pytest.approx((4 * np.pi) ** 2)

    def test_grid_is_read_only(self, box2):
        with pytest.raises(ValueError):
            box2.grid().kmag[0, 0] = 1.0


class TestTransforms:
    @pytest.mark.parametrize("d,n", [(2, 16), (2, 32), (3, 8), (3, 16)])
    def test_round_trip(self, d, n, rng):
        box = sp.BoxSpec(d, n)
        phys = rng.standard_normal((3,) + box.shape)
        f = sp.SpectralField.from_physical(box, phys)
        assert np.max(np.abs(f.to_physical() - phys)) < 1e-13
        assert sp.hermitian_defect(f) == 0.0

    def test_parseval(self, box2, rng):
        phys = rng.standard_normal((3,) + box2.shape)
        f = sp.SpectralField.from_physical(box2, phys)
        direct = np.sqrt((phys ** 2).sum() * box2.volume / phys[0].size)
        assert sp.l2_norm(f) == pytest.approx(direct, rel=1e-13)

    def test_single_mode_coefficient(self):
        box = sp.BoxSpec(2, 16)
        x = box.coordinates()
        f = sp.SpectralField.from_function(box, lambda x: np.array([np.cos(2 * x[0]), 0 * x[0], 0 * x[0]]))
        assert f.coeffs[0, 2, 0] == pytest.approx(0.5)
        assert f.coeffs[0, -2, 0] == pytest.approx(0.5)
        assert x.shape == (2, 16, 16)

    def test_box_mismatch(self, box2, box3):
        with pytest.raises(BoxMismatch):
            sp.SpectralField.zeros(box2) + sp.SpectralField.zeros(box3)


class TestOperators:
    def test_leray_divergence_free(self, box3, rng):
        f = sp.random_field(box3, rng, solenoidal=False)
        assert sp.divergence_norm(f) > 1e-3
        assert sp.divergence_norm(sp.leray_project(f)) < 1e-13

    def test_curl_is_divergence_free(self, box3, rng):
        f = sp.random_field(box3, rng, solenoidal=False)
        assert sp.divergence_norm(sp.curl(f)) < 1e-12

    def test_beltrami_2d(self):
        box = sp.BoxSpec(2, 16)
        B = _beltrami(box)
        assert sp.l2_norm(sp.curl(B) + B) < 1e-12

    @pytest.mark.parametrize("hand", [1, -1])
    def test_abc_handedness(self, hand):
        box = sp.BoxSpec(3, 16)
        B = _beltrami(box, hand)
        assert sp.l2_norm(sp.curl(B) - hand * B) < 1e-12

    def test_fractional_laplacian_of_mode(self):
        box = sp.BoxSpec(2, 16)
        f = sp.SpectralField.from_function(box, lambda x: np.array([np.sin(3 * x[0]), 0 * x[0], 0 * x[0]]))
        g = sp.frac_laplacian(f, 0.75)
        assert sp.l2_norm(g - 3.0 ** 1.5 * f) < 1e-12

    def test_negative_power_needs_zero_mean(self, box2):
        f = sp.SpectralField.constant(box2, (1.0, 0.0, 0.0))
        with pytest.raises(NegativePowerOnMeanMode):
            sp.frac_laplacian(f, -0.5)
        with pytest.raises(NegativePowerOnMeanMode):
            sp.sobolev_norm(f, -0.5)

    def test_advect_matches_physical(self, box2):
        u = sp.SpectralField.from_function(box2, lambda x: np.array([np.sin(x[1]), 0 * x[0], 0 * x[0]]))
        w = sp.SpectralField.from_function(box2, lambda x: np.array([0 * x[0], np.cos(x[0]), 0 * x[0]]))
        expect = sp.SpectralField.from_function(
            box2, lambda x: np.array([0 * x[0], -np.sin(x[1]) * np.sin(x[0]), 0 * x[0]]))
        assert sp.l2_norm(sp.advect(u, w) - expect) < 1e-12

    def test_truncation_rejects_nonpositive(self, box2):
        with pytest.raises(ValueError):
            sp.truncate(sp.SpectralField.zeros(box2), 0)

    def test_sup_norm_of_mode(self, box2):
        f = sp.SpectralField.from_function(box2, lambda x: np.array([2 * np.cos(x[0]), 0 * x[0], 0 * x[0]]))
        assert sp.sup_norm(f) == pytest.approx(2.0)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10_000), s=st.floats(-1.0, 3.0))
def test_leray_idempotent_and_norm_reducing(seed, s):
    box = sp.BoxSpec(2, 16)
    f = sp.random_field(box, np.random.default_rng(seed), solenoidal=False)
    f.coeffs[(slice(None), 0, 0)] = 0.0
    pf = sp.leray_project(f)
    assert sp.l2_norm(sp.leray_project(pf) - pf) < 1e-13
    assert sp.sobolev_norm(pf, s) <= sp.sobolev_norm(f, s) * (1 + 1e-12)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10_000))
def test_inner_product_symmetry(seed):
    box = sp.BoxSpec(2, 16)
    rng = np.random.default_rng(seed)
    f, g = sp.random_field(box, rng), sp.random_field(box, rng)
    assert sp.inner(f, g) == pytest.approx(sp.inner(g, f), rel=1e-12, abs=1e-14)
    assert sp.inner(f, f) == pytest.approx(sp.l2_norm(f) ** 2, rel=1e-12)
