import os
import subprocess
import sys

import numpy as np
import pytest

from quasispline import kernels
from quasispline.bsplines import derivative_tables

needs_compiled = pytest.mark.skipif(kernels.BACKEND != "cython", reason="compiled kernels not built")


@needs_compiled
@pytest.mark.parametrize("m", range(5))
def test_bspline_kernels_agree(m, rng):
    t = rng.uniform(-2, m + 3, 5000)
    for deriv, table in enumerate(derivative_tables(m, m)):
        a = kernels.bspline_eval(table, t, backend="python")
        b = kernels.bspline_eval(table, t, backend="cython")
        np.testing.assert_allclose(a, b, rtol=1e-13, atol=1e-13)


def test_unknown_backend_is_rejected():
    with pytest.raises(ValueError):
        kernels.bspline_eval(derivative_tables(1, 0)[0], np.zeros(3), backend="fortran")


def test_environment_switch_selects_pure_python(tmp_path):
    env = {**os.environ, "QUASISPLINE_PURE_PYTHON": "1"}
    code = "import quasispline; print(quasispline.BACKEND)"
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


def test_selftest_passes_on_pure_python_backend(tmp_path):
    env = {**os.environ, "QUASISPLINE_PURE_PYTHON": "1"}
    proc = subprocess.run(
        [sys.executable, "-m", "quasispline.cli", "selftest", "--out", str(tmp_path)],
        env=env, capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0, proc.stdout + proc.stderr
