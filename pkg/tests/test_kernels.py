import numpy as np
import pytest

from nsmhall import _kernels_py, kernels

compiled = pytest.importorskip("nsmhall._kernels")


@pytest.fixture
def arrays():
    rng = np.random.default_rng(7)
    shape = (3, 6, 5)
    real = [rng.standard_normal(shape) for _ in range(3)]
    cplx = [rng.standard_normal(shape) + 1j * rng.standard_normal(shape) for _ in range(2)]
    xhat = rng.standard_normal(shape)
    xhat /= np.linalg.norm(xhat, axis=0)
    blocks = [rng.standard_normal(shape[1:]) for _ in range(5)]
    return real, cplx, xhat, blocks


def _run_all(arrays):
    (a, b, c), (E, B), xhat, blk = arrays
    return {
        "cross3": kernels.cross3(a, b),
        "hall_apply": kernels.hall_apply(a, 0.7, b),
        "hall_solve": kernels.hall_solve(a, 0.7, c),
        "maxwell": np.concatenate(kernels.maxwell_apply(E, B, xhat, *blk)),
    }


class TestBackends:
    def teardown_method(self):
        kernels.use_backend("cython")

    def test_backends_agree(self, arrays):
        kernels.use_backend("python")
        ref = _run_all(arrays)
        kernels.use_backend("cython")
        got = _run_all(arrays)
        for name in ref:
            np.testing.assert_allclose(got[name], ref[name], rtol=1e-13, atol=1e-13, err_msg=name)

    @pytest.mark.parametrize("backend", ["python", "cython"])
    def test_cross_matches_numpy(self, backend, arrays):
        kernels.use_backend(backend)
        (a, b, _), *_ = arrays
        np.testing.assert_allclose(kernels.cross3(a, b), np.cross(a, b, axis=0), atol=1e-14)

    @pytest.mark.parametrize("backend", ["python", "cython"])
    def test_hall_round_trip(self, backend, arrays):
        kernels.use_backend(backend)
        (B, j, _), *_ = arrays
        back = kernels.hall_solve(B, 0.9, kernels.hall_apply(B, 0.9, j))
        np.testing.assert_allclose(back, j, atol=1e-13)

    def test_unknown_backend(self):
        with pytest.raises(ValueError):
            kernels.use_backend("fortran")

    def test_fallback_module_has_same_api(self):
        for name in ("cross3", "hall_apply", "hall_solve", "maxwell_apply"):
            assert callable(getattr(_kernels_py, name))
            assert callable(getattr(compiled, name))
