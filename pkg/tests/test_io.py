import io

import numpy as np
import pytest

from nsmhall import io as nio
from nsmhall import diagnostics as dg
from nsmhall.dynamics import StepperConfig, make_initial, simulate
from nsmhall.params import PhysicalParams, Variant


@pytest.fixture
def params():
    return PhysicalParams(Variant.NSM_GO, kappa=0.1)


class TestCheckpoint:
    def test_round_trip_bitwise(self, tmp_path, box2, params):
        st = make_initial("random", box2, Variant.NSM_GO, seed=5)
        nio.save_state(tmp_path / "a.npz", st, params)
        back, meta = nio.load_state(tmp_path / "a.npz")
        assert nio.states_identical(st, back)
        assert meta["params"]["kappa"] == 0.1

    def test_file_object_target(self, box2):
        st = make_initial("random", box2, Variant.HMHD)
        buf = io.BytesIO()
        nio.save_state(buf, st)
        buf.seek(0)
        back, _ = nio.load_state(buf)
        assert nio.states_identical(st, back)

    def test_resume_is_bitwise(self, tmp_path, box2, params):
        st = make_initial("random", box2, Variant.NSM_GO, amplitude=2.0)
        cfg = StepperConfig(dt=1e-3)
        _, straight = simulate(st, params, cfg, 0.02)
        _, mid = simulate(st, params, cfg, 0.01)
        nio.save_state(tmp_path / "mid.npz", mid, params)
        loaded, _ = nio.load_state(tmp_path / "mid.npz")
        _, resumed = simulate(loaded, params, cfg, 0.02)
        assert nio.states_identical(straight, resumed)

    def test_states_identical_detects_change(self, box2):
        st = make_initial("random", box2, Variant.NSM_GO)
        other = st.copy()
        other.v.coeffs[0, 1, 0] += 1e-300
        assert not nio.states_identical(st, other)

    def test_rejects_foreign_file(self, tmp_path):
        np.savez(tmp_path / "x.npz", header=np.array('{"format": "other"}'))
        with pytest.raises(ValueError):
            nio.load_fields(tmp_path / "x.npz")


class TestTables:
    def test_jsonl_schema_header(self, tmp_path, box2, params):
        st = make_initial("random", box2, Variant.NSM_GO)
        recs, _ = simulate(st, params, StepperConfig(dt=1e-3), 0.002, observers=[dg.recorder()])
        nio.write_records_jsonl(tmp_path / "d.jsonl", recs)
        header, body = nio.read_records_jsonl(tmp_path / "d.jsonl")
        assert header["schema_version"] == dg.SCHEMA_VERSION
        assert [r["t"] for r in body] == pytest.approx([0.0, 0.001, 0.002])

    def test_csv_union_header(self, tmp_path):
        nio.write_rows_csv(tmp_path / "r.csv", [{"a": 1}, {"a": 2, "b": 3}])
        rows = nio.read_rows_csv(tmp_path / "r.csv")
        assert rows == [{"a": "1", "b": ""}, {"a": "2", "b": "3"}]

    def test_json_handles_nonfinite(self, tmp_path):
        path = nio.write_json(tmp_path / "r.json", {"x": float("nan"), "y": np.float64(2.0)})
        assert '"nan"' in path.read_text()
