import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nsmhall import littlewood_paley as lp
from nsmhall import spectral as sp


@pytest.fixture
def box():
    return sp.BoxSpec(2, 32)


class TestBlocks:
    def test_shell_index_of_known_modes(self, box):
        q = lp.shell_index(box)
        assert q[0, 0] == -(10 ** 6)
        assert q[1, 0] == 1  # |xi| = 1
        assert q[2, 0] == 2  # |xi| = 2
        assert q[3, 0] == 2
        assert q[4, 0] == 3

    def test_blocks_sum_to_mean_free_field(self, box, rng):
        f = sp.random_field(box, rng, solenoidal=False)
        f.coeffs[:, 0, 0] = 1.0
        total = sum((lp.dyadic_block(f, q) for q in lp.occupied_shells(box)),
                    sp.SpectralField.zeros(box))
        assert sp.l2_norm(total - lp.mean_free(f)) < 1e-13

    def test_low_cutoff_is_partial_sum(self, box, rng):
        f = sp.random_field(box, rng, solenoidal=False)
        part = sum((lp.dyadic_block(f, q) for q in lp.occupied_shells(box) if q <= 2),
                   sp.SpectralField.zeros(box))
        assert sp.l2_norm(lp.low_cutoff(f, 3) - part) < 1e-14

    def test_besov_b22_equals_sobolev_up_to_constants(self, box, rng):
        f = sp.random_field(box, rng, solenoidal=False)
        ratio = lp.besov_norm(f, 1.0, 2) / sp.sobolev_norm(f, 1.0)
        assert 1.0 <= ratio <= 2.0

    def test_hybrid_norm_matches_shell_weights(self, box, rng):
        f = sp.random_field(box, rng, solenoidal=False)
        spec = lp.HybridNormSpec(0.0, 0.0)
        assert lp.hybrid_norm(f, spec) == pytest.approx(sp.l2_norm(lp.mean_free(f)), rel=1e-12)

    def test_l2log_weights(self, box):
        f = sp.SpectralField.from_function(box, lambda x: np.array([np.cos(4 * x[0]), 0 * x[0], 0 * x[0]]))
        assert lp.l2log_norm(f) == pytest.approx(np.sqrt(3.0) * sp.l2_norm(f), rel=1e-12)


class TestBony:
    @pytest.mark.parametrize("seed", range(4))
    def test_identity(self, box, seed):
        rng = np.random.default_rng(seed)
        f = sp.random_field(box, rng, solenoidal=False)
        g = sp.random_field(box, rng, solenoidal=False)
        assert lp.bony_residual(f, g) < 1e-12 * sp.l2_norm(f) * sp.l2_norm(g)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 5_000), m=st.sampled_from([1.0, 2.0, 4.0, 8.0]),
       s2=st.sampled_from([0.5, 1.0, 2.0]))
def test_truncation_estimate_constant_one(seed, m, s2):
    box = sp.BoxSpec(2, 32)
    f = sp.random_field(box, np.random.default_rng(seed), slope=1.0)
    lhs = sp.l2_norm(f - sp.truncate(f, m))
    assert lhs <= m ** (-s2) * sp.sobolev_norm(f, s2) * (1 + 1e-12)


class TestParaproductReport:
    def test_ratios_finite(self, box):
        rep = lp.verify_paraproduct_lemma(5, box, seed=0)
        assert set(rep.max_ratio) == set(lp.PARAPRODUCT_INEQUALITIES)
        assert all(np.isfinite(v) and v > 0 for v in rep.max_ratio.values())
        assert len(rep.csv_rows()) == 5 * 6

    def test_zero_paths_are_skipped(self, box):
        z = [sp.SpectralField.zeros(box)] * 4
        rep = lp.verify_paraproduct_lemma(1, box, paths=[(z, z)])
        assert {r.status for r in rep.rows} == {"skipped"}
        assert rep.max_ratio == {}

    def test_underflowing_rhs_is_discarded(self, box, rng):
        tiny = [lp.random_scalar(box, rng) * 1e-160 for _ in range(4)]
        rep = lp.verify_paraproduct_lemma(1, box, paths=[(tiny, tiny)])
        assert len(rep.discarded) == 6

    def test_rejects_three_dimensions(self):
        with pytest.raises(ValueError):
            lp.verify_paraproduct_lemma(1, sp.BoxSpec(3, 8))

    def test_rejects_small_s(self, box):
        with pytest.raises(ValueError):
            lp.verify_paraproduct_lemma(1, box, s=1.0)


class TestBernsteinAndHeat:
    def test_bernstein_ratios_bounded(self, box):
        out = lp.bernstein_ratios(box, [1, 2, 3], trials=5, seed=0)
        assert all(0 < r <= 1.0 for pair in out.values() for r in pair)

    @pytest.mark.parametrize("q", [1, 2, 3])
    def test_envelope_rate_at_shell_edge(self, box, q):
        # the slowest mode of shell q sits at |xi| = 2^(q-1), so the exponent is 1/4
        fit = lp.heat_envelope(box, q, p=2, trials=3, seed=0)
        assert fit.c3 == pytest.approx(0.25, abs=0.02)

    def test_heat_semigroup_rejects_negative_time(self, box, rng):
        with pytest.raises(ValueError):
            lp.heat_semigroup(sp.random_field(box, rng), -1.0, 1.0, 1.0)

    def test_forced_heat_matches_mode_solution(self, box):
        w0 = sp.SpectralField.from_function(box, lambda x: np.array([np.sin(2 * x[0]), 0 * x[0], 0 * x[0]]))
        forcing = [sp.SpectralField.zeros(box)] * 3
        states = lp.forced_heat(box, w0, forcing, 0.1, 1.0, 1.0)
        assert np.allclose(states[-1], w0.coeffs * np.exp(-4.0 * 0.3), atol=1e-15)

    def test_maximal_regularity_report(self, box):
        rep = lp.verify_maximal_regularity(box, trials=10, seed=1)
        assert 0 < rep.max_ratio["max_regularity"] < 10
