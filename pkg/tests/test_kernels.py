"""Backend parity: the compiled and NumPy kernels must agree bitwise."""

import os
import subprocess
import sys

import numpy as np
import pytest

from vpfplab import kernels
from vpfplab.kernels import _impl_py

try:
    from vpfplab.kernels import _impl_c
except ImportError:
    _impl_c = None

needs_c = pytest.mark.skipif(_impl_c is None,
                             reason="compiled kernels not built")


def random_problem(rng):
    nx = int(rng.integers(2, 40))
    nv = int(rng.integers(2, 40))
    f = rng.uniform(0.0, 2.0, size=(nx, nv))
    cx = rng.uniform(-1.0, 1.0, size=nv)
    cv = rng.uniform(-1.0, 1.0, size=nx)
    fa = -rng.uniform(0.1, 2.0, size=nv - 1)
    fb = rng.uniform(0.1, 2.0, size=nv - 1)
    dv = float(rng.uniform(0.05, 0.5))
    return nx, nv, f, cx, cv, fa, fb, dv


def spd_tridiag(rng, n):
    lower = -rng.uniform(0.1, 0.5, size=n - 1)
    upper = -rng.uniform(0.1, 0.5, size=n - 1)
    diag = 1.0 + np.zeros(n)
    diag[:-1] += np.abs(upper)
    diag[1:] += np.abs(lower)
    return lower, diag, upper


@needs_c
class TestBitwiseParity:
    def test_all_kernels_on_random_inputs(self):
        rng = np.random.default_rng(11)
        for _ in range(50):
            nx, nv, f, cx, cv, fa, fb, dv = random_problem(rng)
            assert np.array_equal(_impl_c.advect_x(f, cx),
                                  _impl_py.advect_x(f, cx))
            assert np.array_equal(_impl_c.advect_v(f, cv),
                                  _impl_py.advect_v(f, cv))
            assert np.array_equal(_impl_c.fp_apply(f, fa, fb, dv),
                                  _impl_py.fp_apply(f, fa, fb, dv))
            f3 = rng.uniform(0.0, 2.0, size=(3, nx, nv))
            assert np.array_equal(_impl_c.fp_apply(f3, fa, fb, dv),
                                  _impl_py.fp_apply(f3, fa, fb, dv))
            lower, diag, upper = spd_tridiag(rng, nv)
            rhs = rng.uniform(0.0, 1.0, size=(nx, nv))
            assert np.array_equal(
                _impl_c.thomas_shared(lower, diag, upper, rhs),
                _impl_py.thomas_shared(lower, diag, upper, rhs))

    def test_inputs_left_untouched(self):
        rng = np.random.default_rng(12)
        f = rng.uniform(0.0, 1.0, size=(5, 8))
        snapshot = f.copy()
        _impl_c.advect_x(f, rng.uniform(-1.0, 1.0, size=8))
        _impl_c.advect_v(f, rng.uniform(-1.0, 1.0, size=5))
        np.testing.assert_array_equal(f, snapshot)


class TestPivotGuard:
    @pytest.mark.parametrize("impl", [
        _impl_py,
        pytest.param(_impl_c, marks=needs_c, id="_impl_c"),
    ])
    def test_nonpositive_pivot_is_reported(self, impl):
        lower = np.array([-2.0])
        upper = np.array([-2.0])
        diag = np.array([1.0, 1.0])
        rhs = np.ones((1, 2))
        with pytest.raises(RuntimeError, match="non-positive pivot at cell"):
            impl.thomas_shared(lower, diag, upper, rhs)


class TestSelection:
    def test_backend_label_is_consistent(self):
        assert kernels.BACKEND in ("c", "py")
        if _impl_c is not None:
            assert kernels.BACKEND == "c"

    def test_env_var_forces_python_backend(self):
        env = dict(os.environ, VPFPLAB_KERNELS="py")
        code = ("from vpfplab import kernels; "
                "print(kernels.BACKEND)")
        got = subprocess.run([sys.executable, "-c", code], env=env,
                             capture_output=True, text=True, check=True)
        assert got.stdout.strip() == "py"

    @needs_c
    def test_env_var_forces_compiled_backend(self):
        env = dict(os.environ, VPFPLAB_KERNELS="c")
        code = ("from vpfplab import kernels; "
                "print(kernels.BACKEND)")
        got = subprocess.run([sys.executable, "-c", code], env=env,
                             capture_output=True, text=True, check=True)
        assert got.stdout.strip() == "c"

    def test_unknown_env_value_fails_fast(self):
        env = dict(os.environ, VPFPLAB_KERNELS="turbo")
        code = "import vpfplab.kernels"
        got = subprocess.run([sys.executable, "-c", code], env=env,
                             capture_output=True, text=True)
        assert got.returncode != 0
        assert "VPFPLAB_KERNELS" in got.stderr
