import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad_vec

from upcint import kernels

from upcint.constants import HBARC
from upcint.interference import (
    DecoherenceModel,
    KinematicPoint,
    azimuth_average,
    azimuth_averaged_rate,
    b_weight,
    eta,
    median_impact_parameter,
    point_rate,
)

D = DecoherenceModel


def test_variants_and_labels():
    assert D.fixed(0.3).label == "fixed(0.3)"
    assert D.full_coherence().kernel_args() == (0, 0.0)
    assert D.full_decoherence().kernel_args() == (0, 1.0)
    with pytest.raises(ValueError):
        D.fixed(1.5)
    with pytest.raises(ValueError):
        D("partial")


@pytest.mark.parametrize("pt, b, phi", [(-1.0, 10.0, 0.0), (1.0, 0.0, 0.0), (1.0, 10.0, 2 * math.pi), (1.0, 1.0, -0.1)])
def test_kinematic_point_validation(pt, b, phi):
    with pytest.raises(ValueError):
        KinematicPoint(0.0, pt, phi, b)


def test_eta_fixed_variants(rho):
    assert eta(30.0, rho, 800.0, 10.0, D.full_coherence()) == 0.0
    assert eta(30.0, rho, 800.0, 10.0, D.full_decoherence()) == 1.0
    assert eta(30.0, rho, 800.0, 10.0, D.fixed(0.4)) == 0.4


def test_eta_zero_b(rho, jpsi):
    for m in (rho, jpsi):
        assert eta(0.0, m, m.mass, 50.0, D.survival_light_speed()) == 0.0
        assert eta(0.0, m, m.mass, 50.0, D.survival_meson_velocity()) == 0.0


def test_eta_rho_light_speed(rho):
    # exponent = b / (c tau) at omega = M: 40 / 1.1992 = 33.36
    e = eta(40.0, rho, rho.mass, 0.0, D.survival_light_speed())
    assert e == pytest.approx(1.0 - math.exp(-40.0 / rho.ctau), rel=1e-15)
    assert e > 0.999


def test_eta_jpsi_meson_velocity(jpsi):
    # closed form at 30 digits: 1 - exp(-50 * 3096.9 / (56.4 * 2248.44))
    e = eta(50.0, jpsi, jpsi.mass, 56.4, D.survival_meson_velocity())
    assert e == pytest.approx(0.705081874451534823, rel=1e-13)


def test_eta_meson_velocity_at_rest(jpsi):
    assert eta(50.0, jpsi, jpsi.mass, 0.0, D.survival_meson_velocity()) == 1.0
    # a meson at rest never transits, even at b = 0
    assert eta(0.0, jpsi, jpsi.mass, 0.0, D.survival_meson_velocity()) == 1.0


@pytest.mark.parametrize("variant", [D.survival_light_speed(), D.survival_meson_velocity()])
def test_eta_monotone_bounded(jpsi, variant):
    b = np.linspace(0, 5e4, 2001)
    e = eta(b, jpsi, 3200.0, 60.0, variant)
    assert np.all((e >= 0) & (e <= 1))
    assert np.all(np.diff(e) >= 0)
    live = 1.0 - e[1:] > 1e-12  # saturated values round to 1
    assert np.all(np.diff(e)[live] > 0)
    assert e[-1] == pytest.approx(1.0, abs=1e-6)


def test_eta_rejects_negative_b(rho):
    with pytest.raises(ValueError):
        eta(-1.0, rho, 800.0, 1.0, D.full_coherence())


def test_point_rate_null_and_max():
    assert point_rate(KinematicPoint(0.0, 0.0, 0.3, 40.0), (1.0, 0.0), 0.0, 2.0) == 0.0
    kp = KinematicPoint(0.0, math.pi * HBARC / 40.0, 0.0, 40.0)
    assert point_rate(kp, (1.0, 0.0), 0.0, 2.0) == pytest.approx(8.0, rel=1e-15)


def test_point_rate_incoherent():
    rates = [point_rate(KinematicPoint(0.0, 30.0, phi, 40.0), (0.6, 0.2), 1.0, 3.0) for phi in np.linspace(0, 6, 7)]
    assert rates == pytest.approx([3.0 * 1.36] * 7, rel=1e-15)


def test_point_rate_rejects_bad_eta():
    with pytest.raises(ValueError):
        point_rate(KinematicPoint(0.0, 1.0, 0.0, 1.0), (1.0, 0.0), 1.2, 1.0)


@settings(max_examples=200, deadline=None)
@given(
    st.floats(0, 500), st.floats(0.5, 2000), st.floats(0, 2 * math.pi, exclude_max=True),
    st.floats(0.01, 10), st.floats(-math.pi, math.pi), st.floats(0, 1), st.floats(1e-6, 1e6),
)
def test_point_rate_bounds(pt, b, phi, c, delta, e, a1):
    r = point_rate(KinematicPoint(0.0, pt, phi, b), (c, delta), e, a1)
    assert -1e-12 * a1 * (1 + c) ** 2 <= r <= a1 * (1 + c) ** 2 * (1 + 1e-12)


def test_azimuth_bessel_zero():
    z0 = 2.404825557695773
    b = 40.0
    r = azimuth_average(1.5, 0.7, 0.0, 0.0, z0 * HBARC / b, b)
    assert r == pytest.approx(1.5 * 1.49, rel=1e-12)


def test_azimuth_pt_zero_null():
    b = np.geomspace(14, 3000, 50)
    assert np.all(azimuth_average(1.0, 1.0, 0.0, 0.0, 0.0, b) == 0.0)


def test_azimuth_vs_phi_quadrature():
    """Bessel form against adaptive quadrature over phi on a 50 x 50 grid."""
    c, delta, e, a1 = 0.8, 0.3, 0.15, 1.0
    pt, b = np.meshgrid(np.linspace(0.0, 250.0, 50), np.geomspace(14.0, 600.0, 50), indexing="ij")
    pt, b = pt.ravel(), b.ravel()

    def integrand(phi):
        return kernels.point_rate(pt, b, phi, c, delta, e, a1)

    val, _ = quad_vec(integrand, 0.0, 2 * math.pi, epsabs=0, epsrel=1e-12, limit=2000)
    ref = val / (2 * math.pi)
    got = azimuth_average(a1, c, delta, e, pt, b)
    assert np.max(np.abs(got - ref) / ref) < 1e-8
    # spot-check the vectorized integrand against the scalar API
    kp = KinematicPoint(0.0, pt[777], 1.1, b[777])
    assert point_rate(kp, (c, delta), e, a1) == pytest.approx(float(integrand(1.1)[777]), rel=1e-15)


def test_azimuth_averaged_rate_null(rhic_rho):
    b = np.geomspace(14, 500, 30)
    rates = azimuth_averaged_rate(0.0, b, 0.0, rhic_rho, D.full_coherence())
    scale = azimuth_averaged_rate(0.0, b, 0.0, rhic_rho, D.full_decoherence())
    assert np.all(np.abs(rates) <= 1e-12 * scale)


def test_b_weight_window(rhic_rho):
    assert b_weight(10.0, 0.0, rhic_rho) == 0.0
    assert b_weight(20.0, 0.0, rhic_rho) > 0.0
    assert b_weight(20.0, 0.8, rhic_rho) == pytest.approx(b_weight(20.0, -0.8, rhic_rho), rel=1e-14)


def test_median_b_fixed_y(rhic_rho, rhic_jpsi):
    # at a single rapidity the softest photon sets the tail; J/psi sits at smaller b
    assert median_impact_parameter(rhic_jpsi, 0.0) < median_impact_parameter(rhic_rho, 0.0)
