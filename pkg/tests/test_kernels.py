import os
import subprocess
import sys

import numpy as np
import pytest

from upcint import _pykernels, kernels

try:
    from upcint import _ckernels
except ImportError:
    _ckernels = None

needs_ext = pytest.mark.skipif(_ckernels is None, reason="compiled extension not built")


def test_backend_selected():
    assert kernels.BACKEND in ("cython", "python")
    if _ckernels is not None:
        assert kernels.BACKEND == "cython"


def test_pure_python_switch():
    env = dict(os.environ, UPCINT_PURE_PYTHON="1")
    out = subprocess.run(
        [sys.executable, "-c", "from upcint import kernels; print(kernels.BACKEND)"],
        env=env, capture_output=True, text=True, check=True,
    )
    assert out.stdout.strip() == "python"


@pytest.fixture(scope="module")
def data():
    rng = np.random.default_rng(42)
    return {
        "x": np.concatenate([rng.uniform(1e-6, 2.0, 500), rng.uniform(2.0, 200.0, 500)]),
        "k": rng.uniform(1.0, 5000.0, 1000),
        "b": rng.uniform(0.1, 3000.0, 1000),
        "pt": rng.uniform(0.0, 300.0, 1000),
        "phi": rng.uniform(0.0, 2 * np.pi, 1000),
    }


@needs_ext
def test_bessel_agree(data):
    for name in ("bessel_k0", "bessel_k1"):
        a = getattr(_pykernels, name)(data["x"])
        b = getattr(_ckernels, name)(data["x"])
        assert b == pytest.approx(a, rel=1e-13)


@needs_ext
def test_flux_shape_agree(data):
    a = _pykernels.flux_shape(data["k"], data["b"], 107.35)
    b = _ckernels.flux_shape(data["k"], data["b"], 107.35)
    assert b == pytest.approx(a, rel=1e-12, abs=1e-300)


@needs_ext
@pytest.mark.parametrize("kind, value", [(0, 0.3), (1, 0.0), (2, 0.0)])
def test_eta_agree(data, kind, value):
    pt = data["pt"].copy()
    pt[:5] = 0.0
    a = _pykernels.eta_values(kind, value, data["b"], pt, 3096.9, 1.3, 2248.4)
    b = _ckernels.eta_values(kind, value, data["b"], pt, 3096.9, 1.3, 2248.4)
    assert b == pytest.approx(a, rel=1e-13, abs=1e-15)


@needs_ext
def test_point_rate_agree(data):
    args = (data["pt"], data["b"], data["phi"], 0.8, 0.1, 0.2, 2.5)
    assert _ckernels.point_rate(*args) == pytest.approx(_pykernels.point_rate(*args), rel=1e-12, abs=1e-12)


@needs_ext
@pytest.mark.parametrize("kind", [0, 1, 2])
def test_coherent_sums_agree(kind):
    pt = np.linspace(0.0, 200.0, 41)
    nodes = np.geomspace(14.0, 600.0, 700)
    w = np.exp(-nodes / 80.0)
    a = _pykernels.coherent_b_sums(pt, nodes, w, kind, 0.25, 775.26, 1.0, 1.2)
    b = _ckernels.coherent_b_sums(pt, nodes, w, kind, 0.25, 775.26, 1.0, 1.2)
    assert b == pytest.approx(a, rel=1e-11, abs=1e-12 * np.abs(a).max())


def test_coherent_sums_chunk_independent():
    pt = np.linspace(0.0, 200.0, 40)
    nodes = np.geomspace(14.0, 600.0, 500)
    w = 1.0 / nodes
    whole = kernels.coherent_b_sums(pt, nodes, w, 0, 0.0, 775.26, 1.0, 1.2)
    parts = np.concatenate([kernels.coherent_b_sums(c, nodes, w, 0, 0.0, 775.26, 1.0, 1.2) for c in np.array_split(pt, 7)])
    assert np.array_equal(whole, parts)


def test_shapes_preserved():
    x = np.ones((3, 4))
    assert kernels.bessel_k0(x).shape == (3, 4)
    assert kernels.flux_shape(np.ones((2, 1)), np.ones((1, 5)), 10.0).shape == (2, 5)
    assert np.ndim(kernels.bessel_k1(1.0)) == 0
