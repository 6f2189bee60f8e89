import numpy as np
import pytest

from nsmhall import diagnostics as dg
from nsmhall import spectral as sp
from nsmhall.dynamics import (
    Integrator, StepperConfig, make_initial, maxwell_propagator, rhs, simulate, step, with_variant,
    xs_norm_sq,
)
from nsmhall.errors import CflViolation, UnknownFamily
from nsmhall.params import PhysicalParams, Variant

VARIANT_PARAMS = {
    Variant.NSM: dict(),
    Variant.NSM_SO: dict(),
    Variant.NSM_GO: dict(kappa=0.2),
    Variant.NSM_GO_STAR: dict(kappa=0.2, alpha=0.0, B_star=(0.0, 0.0, 1.0)),
    Variant.HMHD: dict(kappa=0.2, alpha=1.25, beta=1.75),
    Variant.MHD: dict(),
}


def _params(variant, **extra):
    return PhysicalParams(variant, **dict(VARIANT_PARAMS[variant], **extra))


@pytest.fixture
def box():
    return sp.BoxSpec(2, 32)


class TestEnergyIdentity:
    @pytest.mark.parametrize("variant", list(VARIANT_PARAMS))
    def test_rate_equals_minus_dissipation(self, box, variant):
        p = _params(variant)
        state = make_initial("random", box, variant, amplitude=1.0, seed=3)
        d = rhs(state, p)
        rate = sp.inner(state.v, d["v"]) + sp.inner(state.B, d["B"])
        if d["E"] is not None:
            rate += sp.inner(state.E, d["E"])
        st = state.copy()
        st.j = d["j"]
        dv, dj = dg.dissipation(st, p)
        assert abs(rate + dv + dj) <= 1e-12 * (dv + dj)


class TestIntegrator:
    def test_fourth_order(self, box):
        p = _params(Variant.NSM_GO)
        state = make_initial("random", box, Variant.NSM_GO, amplitude=3.0, seed=1)
        ref = simulate(state, p, StepperConfig(dt=1.25e-3), 0.1)[1]
        errs = []
        for dt in (1e-2, 5e-3, 2.5e-3):
            out = simulate(state, p, StepperConfig(dt=dt), 0.1)[1]
            errs.append(np.sqrt(sum(sp.l2_norm(out.fields()[k] - ref.fields()[k]) ** 2 for k in "vEB")))
        assert errs[0] / errs[1] > 12
        assert errs[1] / errs[2] > 12

    @pytest.mark.parametrize("sigma,c", [(1.0, 1.0), (0.1, 3.0), (10.0, 2.0)])
    def test_maxwell_propagator_closed_form(self, box, sigma, c):
        h = 0.03
        p11, p12, p21, p22, edamp = maxwell_propagator(box, sigma, c, h)
        a = sigma * c * c
        w = c * box.grid().kmag
        mu = np.sqrt(a * a / 4 - w * w + 0j)
        mus = np.where(np.abs(mu) > 0, mu, 1.0)
        sh = np.where(np.abs(mu) > 0, np.sinh(mu * h) / mus, h)
        pre = np.exp(-a * h / 2)
        ch = np.cosh(mu * h)
        np.testing.assert_allclose(p11, (pre * (ch - a / 2 * sh)).real, atol=1e-13)
        np.testing.assert_allclose(p12, (pre * sh * w).real, atol=1e-13)
        np.testing.assert_allclose(p21, (-pre * sh * w).real, atol=1e-13)
        np.testing.assert_allclose(p22, (pre * (ch + a / 2 * sh)).real, atol=1e-13)
        np.testing.assert_allclose(edamp, np.exp(-a * h))

    def test_linear_only_run_keeps_energy_law(self, box):
        p = _params(Variant.NSM_SO)
        state = make_initial("single_mode", box, Variant.NSM_SO, mode=(2, 1, 0))
        recs, final = simulate(state, p, StepperConfig(dt=1e-2, nonlinear=False), 0.5,
                               observers=[dg.recorder()])
        # exact propagator; only the Simpson quadrature of the dissipation is approximate
        assert dg.energy_balance_residual(recs) < 1e-6
        assert dg.energy(final) < dg.energy(state)

    def test_projection_after_step(self, box):
        p = _params(Variant.NSM_GO)
        state = make_initial("random", box, Variant.NSM_GO, amplitude=2.0)
        out = step(state, p, StepperConfig(dt=1e-3))
        for f in out.fields().values():
            assert sp.divergence_norm(f) < 1e-12

    def test_cfl_violation(self, box):
        p = _params(Variant.NSM_GO)
        state = make_initial("random", box, Variant.NSM_GO, amplitude=50.0)
        with pytest.raises(CflViolation):
            step(state, p, StepperConfig(dt=0.5))

    def test_zero_length_run(self, box):
        state = make_initial("random", box, Variant.MHD)
        recs, final = simulate(state, _params(Variant.MHD), StepperConfig(dt=1e-3), 0.0,
                               observers=[dg.recorder()])
        assert recs == [] and final is state

    def test_horizon_must_be_multiple_of_dt(self, box):
        state = make_initial("random", box, Variant.MHD)
        with pytest.raises(ValueError):
            simulate(state, _params(Variant.MHD), StepperConfig(dt=0.3), 1.0)

    def test_lagged_and_implicit_agree_for_small_dt(self, box):
        p = _params(Variant.NSM_GO)
        state = make_initial("random", box, Variant.NSM_GO, amplitude=1.0, seed=4)
        a = simulate(state, p, StepperConfig(dt=1e-3), 0.02)[1]
        b = simulate(state, p, StepperConfig(dt=1e-3, ohm_mode="lagged"), 0.02)[1]
        rel = sp.l2_norm(a.v - b.v) / sp.l2_norm(a.v)
        assert rel < 1e-3

    def test_stepper_validation(self):
        with pytest.raises(ValueError):
            StepperConfig(dt=0.0)
        with pytest.raises(ValueError):
            StepperConfig(dt=1e-3, ohm_mode="explicit")

    def test_integrator_linear_keys(self, box):
        integ = Integrator(box, _params(Variant.HMHD), StepperConfig(dt=1e-2))
        state = make_initial("random", box, Variant.HMHD)
        U = integ.state_arrays(state)
        half = integ.linear(integ.linear(U, "half"), "half")
        full = integ.linear(U, "full")
        np.testing.assert_allclose(half[0], full[0], atol=1e-15)
        np.testing.assert_allclose(half[2], full[2], atol=1e-15)


class TestInitialData:
    def test_random_is_deterministic(self, box):
        a = make_initial("random", box, Variant.NSM_GO, seed=9)
        b = make_initial("random", box, Variant.NSM_GO, seed=9)
        assert all(np.array_equal(a.fields()[k].coeffs, b.fields()[k].coeffs) for k in "vEB")

    def test_random_amplitude_is_xs_norm(self, box):
        st = make_initial("random", box, Variant.NSM_GO, amplitude=2.5)
        assert np.sqrt(xs_norm_sq(st.v, st.E, st.B, 2.5)) == pytest.approx(2.5)

    def test_beltrami_has_positive_helicity(self):
        box = sp.BoxSpec(3, 16)
        st = make_initial("beltrami", box, Variant.NSM_GO, amplitude=0.3)
        assert dg.magnetic_helicity(st.B) > 0

    def test_unknown_family(self, box):
        with pytest.raises(UnknownFamily):
            make_initial("vortex", box, Variant.NSM_GO)

    def test_nonpositive_amplitude(self, box):
        with pytest.raises(ValueError):
            make_initial("random", box, Variant.NSM_GO, amplitude=0.0)

    def test_with_variant_drops_and_fills_e(self, box):
        st = make_initial("random", box, Variant.NSM_GO)
        assert with_variant(st, Variant.HMHD).E is None
        back = with_variant(with_variant(st, Variant.HMHD), Variant.NSM_GO)
        assert sp.l2_norm(back.E) == 0.0


class TestParams:
    @pytest.mark.parametrize("variant", [Variant.NSM, Variant.NSM_SO, Variant.MHD])
    def test_hall_free_variants_reject_kappa(self, variant):
        with pytest.raises(ValueError):
            PhysicalParams(variant, kappa=0.1)

    def test_star_requires_zero_alpha(self):
        with pytest.raises(ValueError):
            PhysicalParams(Variant.NSM_GO_STAR, alpha=1.0)

    def test_background_only_for_star(self):
        with pytest.raises(ValueError):
            PhysicalParams(Variant.NSM_GO, B_star=(0, 0, 1))

    def test_round_trip_dict(self):
        p = _params(Variant.HMHD)
        assert PhysicalParams(**p.to_dict()) == p
