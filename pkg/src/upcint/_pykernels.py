"""Pure numpy implementations of the numerical kernels.

This module is the reference path; ``_ckernels`` must agree with it to
rounding.  Both are selected through :mod:`upcint.kernels`.
"""

import numpy as np
from scipy.special import j0 as _j0

from ._bessel_coeffs import K0_ASYMPTOTIC, K1_ASYMPTOTIC

HBARC = 197.3269804
EULER_GAMMA = 0.57721566490153286061

# series length for x <= 2; terms fall like 1/(k!)^2
_NSERIES = 22

ETA_FIXED = 0
ETA_LIGHT_SPEED = 1
ETA_MESON_VELOCITY = 2

_C0 = np.array(K0_ASYMPTOTIC)
_C1 = np.array(K1_ASYMPTOTIC)


def _clenshaw(coeffs, s):
    b1 = np.zeros_like(s)
    b2 = np.zeros_like(s)
    for c in coeffs[:0:-1]:
        b1, b2 = 2.0 * s * b1 - b2 + c, b1
    return s * b1 - b2 + coeffs[0]


def _k0_small(x):
    h = 0.25 * x * x
    term = np.ones_like(x)
    i0 = np.ones_like(x)
    reg = np.zeros_like(x)
    harmonic = 0.0
    for k in range(1, _NSERIES):
        term = term * h / (k * k)
        harmonic += 1.0 / k
        i0 = i0 + term
        reg = reg + term * harmonic
    return -(np.log(0.5 * x) + EULER_GAMMA) * i0 + reg


def _k1_small(x):
    h = 0.25 * x * x
    term = np.ones_like(x)  # (x^2/4)^k / (k! (k+1)!)
    i1 = np.ones_like(x)
    psi_sum = np.full_like(x, 1.0 - 2.0 * EULER_GAMMA)  # psi(1) + psi(2)
    acc = psi_sum * term
    harmonic = 0.0
    for k in range(1, _NSERIES):
        term = term * h / (k * (k + 1))
        harmonic += 1.0 / k
        psi_sum = 2.0 * harmonic + 1.0 / (k + 1) - 2.0 * EULER_GAMMA
        i1 = i1 + term
        acc = acc + psi_sum * term
    i1 = 0.5 * x * i1
    return 1.0 / x + np.log(0.5 * x) * i1 - 0.25 * x * acc


def _large(coeffs, x):
    return _clenshaw(coeffs, 4.0 / x - 1.0) * np.exp(-x) / np.sqrt(x)


def _split(small, coeffs, x):
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    lo = x <= 2.0
    if np.any(lo):
        out[lo] = small(x[lo])
    hi = ~lo
    if np.any(hi):
        out[hi] = _large(coeffs, x[hi])
    return out


def bessel_k0(x):
    return _split(_k0_small, _C0, x)


def bessel_k1(x):
    return _split(_k1_small, _C1, x)


def flux_shape(k, b, gamma):
    """x^2/(k b^2) [K1(x)^2 + K0(x)^2/gamma^2] with x = k b / (gamma hbar c)."""
    k, b = np.broadcast_arrays(np.asarray(k, dtype=float), np.asarray(b, dtype=float))
    x = k * b / (gamma * HBARC)
    flat = x.ravel()
    k1 = bessel_k1(flat).reshape(x.shape)
    k0 = bessel_k0(flat).reshape(x.shape)
    return x * x / (k * b * b) * (k1 * k1 + k0 * k0 / (gamma * gamma))


def eta_values(kind, value, b, pt, mass, cosh_y, ctau):
    b = np.asarray(b, dtype=float)
    if kind == ETA_FIXED:
        return np.full(np.broadcast(b, pt).shape, value)
    if kind == ETA_LIGHT_SPEED:
        omega = np.sqrt(mass * mass + np.asarray(pt, dtype=float) ** 2) * cosh_y
        return -np.expm1(-mass * b / (omega * ctau))
    pt = np.asarray(pt, dtype=float)
    with np.errstate(divide="ignore"):
        expo = np.where(pt > 0.0, mass * b / np.where(pt > 0.0, pt, 1.0) / ctau, np.inf)
    return -np.expm1(-expo)


def point_rate(pt, b, phi, cmag, delta, eta, a1sq):
    phase = pt * b * np.cos(phi) / HBARC + delta
    return a1sq * (1.0 + cmag * cmag - 2.0 * cmag * (1.0 - eta) * np.cos(phase))


def coherent_b_sums(pt, bnodes, weights, kind, value, mass, cosh_y, ctau):
    """For each pt, sum_j weights_j (1 - eta(b_j, pt)) J0(pt b_j / hbar c)."""
    pt = np.ascontiguousarray(pt, dtype=float)
    bnodes = np.ascontiguousarray(bnodes, dtype=float)
    weights = np.ascontiguousarray(weights, dtype=float)
    out = np.empty(pt.shape[0])
    for i, p in enumerate(pt):
        coh = 1.0 - eta_values(kind, value, bnodes, p, mass, cosh_y, ctau)
        out[i] = np.sum(weights * coh * _j0(p * bnodes / HBARC))
    return out
