"""Compiled superoperator kernel versus the pure-numpy fallback."""

import os
import subprocess
import sys

import numpy as np
import pytest

from qca_tasep import kernels
from qca_tasep import _kernels_py


def random_case(rng, dim_left, phys, dim_right):
    d = dim_left * phys * dim_right
    data = rng.normal(size=d * d) + 1j * rng.normal(size=d * d)
    sup = rng.normal(size=(phys**2, phys**2)) + 1j * rng.normal(size=(phys**2, phys**2))
    return data, sup


def reference_apply(data, sup, dim_left, phys, dim_right):
    t = data.reshape(dim_left, phys, dim_right, dim_left, phys, dim_right)
    s4 = sup.reshape(phys, phys, phys, phys)
    return np.einsum("KBkb,LkRMbS->LKRMBS", s4, t).reshape(-1)


# (dim_left, phys, dim_right) Hilbert-space factor sizes; phys is the factor
# the superoperator acts on (4 = a two-site block).
SHAPES = [(1, 4, 1), (2, 4, 2), (1, 2, 8), (8, 2, 1), (4, 4, 4), (2, 16, 2)]


@pytest.mark.parametrize("shape", SHAPES)
def test_fallback_matches_reference(shape):
    rng = np.random.default_rng(11)
    data, sup = random_case(rng, *shape)
    expected = reference_apply(data, sup, *shape)
    out = data.copy()
    _kernels_py.apply_superop(out, sup, *shape)
    np.testing.assert_allclose(out, expected, atol=1e-12)


@pytest.mark.skipif(not kernels.COMPILED, reason="compiled extension unavailable")
@pytest.mark.parametrize("shape", SHAPES)
def test_compiled_matches_fallback(shape):
    from qca_tasep import _kernels

    rng = np.random.default_rng(5)
    data, sup = random_case(rng, *shape)
    a, b = data.copy(), data.copy()
    _kernels.apply_superop(a, sup, *shape)
    _kernels_py.apply_superop(b, sup, *shape)
    np.testing.assert_allclose(a, b, atol=1e-12)


def test_apply_superop_in_place():
    rng = np.random.default_rng(3)
    data, sup = random_case(rng, 2, 4, 2)
    out = data.copy()
    result = kernels.apply_superop(out, sup, 2, 4, 2)
    assert result is out
    assert not np.allclose(out, data)


def test_identity_superop_is_noop():
    rng = np.random.default_rng(4)
    data, _ = random_case(rng, 2, 4, 4)
    out = data.copy()
    kernels.apply_superop(out, np.eye(16, dtype=complex), 2, 4, 4)
    np.testing.assert_allclose(out, data, atol=1e-15)


def test_rejects_wrong_length():
    data = np.zeros(10, dtype=complex)
    with pytest.raises(ValueError):
        kernels.apply_superop(data, np.eye(4, dtype=complex), 1, 2, 1)


def test_env_var_forces_fallback():
    env = dict(os.environ, QCA_TASEP_PURE_PYTHON="1")
    code = "import qca_tasep.kernels as k; print(k.COMPILED)"
    out = subprocess.run(
        [sys.executable, "-c", code], env=env, capture_output=True, text=True
    )
    assert out.returncode == 0, out.stderr
    assert out.stdout.strip() == "False"


def test_module_reports_backend_flag():
    assert isinstance(kernels.COMPILED, bool)
