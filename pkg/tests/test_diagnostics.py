import json

import numpy as np
import pytest

from nsmhall import diagnostics as dg
from nsmhall import spectral as sp
from nsmhall.dynamics import StepperConfig, make_initial, rhs, simulate, _beltrami
from nsmhall.errors import NonSolenoidal, NonzeroMeanMode
from nsmhall.params import PhysicalParams, Variant


class TestHelicity:
    def test_abc_helicity_closed_form(self):
        # curl B = B with |k| = 1 modes gives H = ||B||^2
        box = sp.BoxSpec(3, 16)
        B = _beltrami(box)
        assert dg.magnetic_helicity(B) == pytest.approx(sp.l2_norm(B) ** 2, rel=1e-12)
        assert dg.helicity_constant(B) == pytest.approx(1.0, rel=1e-12)

    def test_mirror_field_has_negative_helicity(self):
        box = sp.BoxSpec(3, 16)
        assert dg.magnetic_helicity(_beltrami(box, -1)) < 0

    def test_vector_potential_curl(self, box3, rng):
        B = sp.random_field(box3, rng)
        A = dg.vector_potential(B)
        assert sp.l2_norm(sp.curl(A) - B) < 1e-12
        assert sp.divergence_norm(A) < 1e-13

    def test_rejects_mean_mode(self, box3):
        with pytest.raises(NonzeroMeanMode):
            dg.vector_potential(sp.SpectralField.constant(box3, (0.0, 0.0, 1.0)))

    def test_rejects_divergent_field(self, box3, rng):
        with pytest.raises(NonSolenoidal):
            dg.vector_potential(sp.random_field(box3, rng, solenoidal=False))

    def test_hmhd_rate_forms_agree(self, box3):
        p = PhysicalParams(Variant.HMHD, kappa=0.1, alpha=1.25, beta=1.75, sigma=3.0)
        st = make_initial("random", box3, Variant.HMHD, amplitude=1.0)
        assert dg.helicity_rate(st, p) == pytest.approx(dg.helicity_rate_adjoint(st, p), rel=1e-10)

    @pytest.mark.parametrize("variant,extra", [
        (Variant.NSM_GO, dict(kappa=0.1)),
        (Variant.HMHD, dict(kappa=0.1, alpha=1.25, beta=1.75)),
    ])
    def test_rate_matches_time_derivative(self, box3, variant, extra):
        p = PhysicalParams(variant, **extra)
        st = make_initial("random", box3, variant, amplitude=1.0, seed=2)
        d = rhs(st, p)
        A = dg.vector_potential(st.B)
        assert 2 * sp.inner(A, d["B"]) == pytest.approx(dg.helicity_rate(st, p), rel=1e-9, abs=1e-12)


class TestNormSpec:
    @pytest.mark.parametrize("text,label", [
        ("B:Hdot(-0.5)", "B:Hdot(-0.5)"),
        ("v:H(1)", "v:H(1)"),
        ("j:hybrid(1,0)", "j:hybrid(1,0)"),
        ("B:L2log", "B:L2log"),
        ("B:Linf", "B:Linf"),
        ("E:B21(2.5)", "E:B21(2.5)"),
    ])
    def test_parse_round_trip(self, text, label):
        assert dg.NormSpec.parse(text).label == label

    def test_rejects_unknown_field(self):
        with pytest.raises(ValueError):
            dg.NormSpec("w", "H", 1.0)

    def test_dedupe(self):
        specs = [dg.NormSpec.parse("v:H(1)"), dg.NormSpec.parse("v:H(1)"), dg.NormSpec.parse("B:L2")]
        assert [s.label for s in dg.dedupe_specs(specs)] == ["v:H(1)", "B:L2"]


class TestRecords:
    def test_record_contents_and_schema(self, box2):
        p = PhysicalParams(Variant.NSM_GO, kappa=0.1)
        st = make_initial("random", box2, Variant.NSM_GO)
        rec = dg.record(st, p, [dg.NormSpec.parse("B:L2")])
        assert rec.energy == pytest.approx(dg.energy(st))
        assert rec.norms["B:L2"] == pytest.approx(sp.l2_norm(st.B))
        assert max(rec.div_residuals.values()) < 1e-12
        flat = rec.flat()
        assert flat["schema_version"] == dg.SCHEMA_VERSION and "norm[B:L2]" in flat
        assert json.loads(json.dumps(rec.to_json()))["schema"] == dg.SCHEMA_NAME

    def test_record_is_pure(self, box2):
        p = PhysicalParams(Variant.NSM_GO, kappa=0.1)
        st = make_initial("random", box2, Variant.NSM_GO)
        dg.record(st, p)
        assert st.j is None

    def test_energy_balance_short_run(self, box2):
        p = PhysicalParams(Variant.NSM_GO, kappa=0.1)
        st = make_initial("random", box2, Variant.NSM_GO, amplitude=2.0)
        recs, _ = simulate(st, p, StepperConfig(dt=1e-3), 0.05, observers=[dg.recorder()])
        assert dg.energy_balance_residual(recs) < 1e-7

    def test_balance_needs_two_records(self):
        with pytest.raises(ValueError):
            dg.energy_balance_residual([])

    def test_two_point_quadrature(self):
        recs = [dg.DiagnosticsRecord(t, 1.0 - t, 1.0, 0.0, 0.0, 0.0) for t in (0.0, 0.5)]
        assert dg.energy_balance_residual(recs) == 0.0

    def test_helicity_drift(self):
        recs = [dg.DiagnosticsRecord(0.0, 1, 0, 0, h, 0) for h in (2.0, 1.5, 2.5)]
        np.testing.assert_allclose(dg.helicity_drift(recs), [0.0, 0.5, 0.5])
