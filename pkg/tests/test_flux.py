import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad

from upcint import _pykernels, kernels
from upcint.constants import HBARC, NucleusSpec, rhic_beams
from upcint.flux import flux_cutoff_energy, flux_density, flux_grid_csv


def bessel_k_integral(nu, x):
    """K_nu(x) = int_0^inf exp(-x cosh t) cosh(nu t) dt."""
    t_max = math.acosh(800.0 / x + 1.0)  # integrand below e^-800 beyond
    val, _ = quad(lambda t: math.exp(-x * math.cosh(t)) * math.cosh(nu * t), 0, t_max, epsabs=0, epsrel=1e-13, limit=400)
    return val


X_GRID = np.concatenate([np.geomspace(1e-6, 2.0, 60), np.linspace(2.0, 60.0, 80)[1:], [100.0, 300.0, 700.0]])


@pytest.mark.parametrize("backend", ["active", "python"])
def test_bessel_vs_mpmath(backend):
    mod = kernels if backend == "active" else _pykernels
    k0 = mod.bessel_k0(X_GRID)
    k1 = mod.bessel_k1(X_GRID)
    for x, a, b in zip(X_GRID, k0, k1):
        assert a == pytest.approx(float(mpmath.besselk(0, x)), rel=1e-9)
        assert b == pytest.approx(float(mpmath.besselk(1, x)), rel=1e-9)


@pytest.mark.parametrize("x", [0.01, 0.3, 1.0, 1.99, 2.01, 5.0, 20.0])
def test_bessel_vs_integral(x):
    assert float(kernels.bessel_k0(x)) == pytest.approx(bessel_k_integral(0, x), rel=1e-9)
    assert float(kernels.bessel_k1(x)) == pytest.approx(bessel_k_integral(1, x), rel=1e-9)


def test_flux_reference_value():
    # Au at sqrt(s) = 200 GeV, k = 387.63 MeV, b = 40 fm: 30-digit evaluation
    au = rhic_beams().nucleus
    assert flux_density(387.63, 40.0, au) == pytest.approx(3.86218688863239631e-06, rel=1e-9)


def test_flux_z_scaling():
    a = NucleusSpec("A", 79, 197, 7.0, gamma_beam=107.4)
    p = NucleusSpec("p", 1, 1, 7.0, gamma_beam=107.4)
    assert flux_density(300.0, 30.0, a) / flux_density(300.0, 30.0, p) == pytest.approx(6241.0, rel=1e-13)


def test_flux_cutoff_suppression():
    nuc = NucleusSpec("A", 79, 197, 7.0, gamma_beam=107.4)
    b = 20.0
    k_of = lambda x: x * nuc.gamma_beam * HBARC / b  # noqa: E731
    deep, soft = flux_density(k_of(5.0), b, nuc), flux_density(k_of(0.1), b, nuc)
    assert deep / soft < math.exp(-10)


def test_flux_monotone_in_b():
    nuc = rhic_beams().nucleus
    b = np.geomspace(7.0, 5000.0, 2000)
    for k in (50.0, 387.63, 3000.0):
        n = flux_density(k, b, nuc)
        assert np.all(np.isfinite(n)) and np.all(n >= 0)
        live = n[1:] > 0  # deep in the cutoff the flux underflows to zero
        assert live.sum() > 100
        assert np.all(np.diff(n)[live] < 0)


def test_k0_term_negligible():
    nuc = rhic_beams().nucleus
    g = nuc.gamma_beam
    for k in (10.0, 387.63, 2000.0):
        for b in (14.0, 50.0, 400.0):
            x = k * b / (g * HBARC)
            k0, k1 = float(kernels.bessel_k0(x)), float(kernels.bessel_k1(x))
            assert (k0**2 / g**2) / (k1**2 + k0**2 / g**2) < 1e-3


@pytest.mark.parametrize("k, b", [(0.0, 10.0), (-1.0, 10.0), (10.0, 0.0), (10.0, 0.05), (np.nan, 10.0)])
def test_flux_domain(k, b):
    with pytest.raises(ValueError):
        flux_density(k, b, rhic_beams().nucleus)


def test_flux_cutoff_energy():
    assert flux_cutoff_energy(7.0, 107.4) == pytest.approx(3027.5, rel=1e-4)
    assert flux_cutoff_energy(5.0, 1.0) == HBARC / 5.0
    assert flux_cutoff_energy(10.0, 50.0) == pytest.approx(flux_cutoff_energy(5.0, 50.0) / 2)
    with pytest.raises(ValueError):
        flux_cutoff_energy(0.0, 1.0)


@given(st.floats(1.0, 1e4), st.floats(0.1, 1e4))
def test_flux_positive_finite(k, b):
    v = flux_density(k, b, rhic_beams().nucleus)
    assert v >= 0 and math.isfinite(v)


def test_flux_grid_csv():
    text = flux_grid_csv(rhic_beams().nucleus, [100.0, 200.0], [20.0, 40.0, 80.0])
    lines = text.splitlines()
    assert lines[0] == "k_mev,b_fm,n_per_mev_fm2"
    assert len(lines) == 7
    k, b, n = lines[1].split(",")
    assert float(n) == pytest.approx(flux_density(100.0, 20.0, rhic_beams().nucleus), rel=1e-11)
