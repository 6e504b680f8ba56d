"""Two-source interference rate and decoherence models.

Sign convention: the two source amplitudes enter with a relative minus sign
(the electric field is odd under parity), so at pT = 0 with |c| = 1,
delta = 0 and eta = 0 the rate vanishes:

    rate = |A1|^2 [1 + |c|^2 - 2 |c| (1 - eta) cos(pT b cos(phi) / hbar c + delta)]

The impact parameter points along the y axis; ``phi`` is the azimuth of the
meson transverse momentum measured from that axis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_trapezoid
from scipy.special import j0

from . import kernels
from .constants import HBARC, MesonSpec
from .photoproduction import Photoproduction, form_factor

FULL_COHERENCE = "full_coherence"
FULL_DECOHERENCE = "full_decoherence"
FIXED = "fixed"
SURVIVAL_LIGHT_SPEED = "survival_light_speed"
SURVIVAL_MESON_VELOCITY = "survival_meson_velocity"

VARIANTS = (FULL_COHERENCE, FULL_DECOHERENCE, FIXED, SURVIVAL_LIGHT_SPEED, SURVIVAL_MESON_VELOCITY)


@dataclass(frozen=True)
class DecoherenceModel:
    """Which fraction eta of the two-source rate is incoherent.

    eta = 0 is full coherence, eta = 1 no interference at all.  The two
    survival variants differ only in the transit speed assumed for the
    amplitude crossing the distance b: light speed (M b / (omega tau)) or
    the meson's own transverse velocity (M b / (pT tau)).
    """

    variant: str
    value: float = 0.0

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown decoherence variant {self.variant!r}")
        if self.variant == FIXED and not 0.0 <= self.value <= 1.0:
            raise ValueError("fixed eta must lie in [0, 1]")

    @classmethod
    def full_coherence(cls):
        return cls(FULL_COHERENCE)

    @classmethod
    def full_decoherence(cls):
        return cls(FULL_DECOHERENCE)

    @classmethod
    def fixed(cls, value: float):
        return cls(FIXED, float(value))

    @classmethod
    def survival_light_speed(cls):
        return cls(SURVIVAL_LIGHT_SPEED)

    @classmethod
    def survival_meson_velocity(cls):
        return cls(SURVIVAL_MESON_VELOCITY)

    def kernel_args(self) -> tuple[int, float]:
        if self.variant == FULL_COHERENCE:
            return kernels.ETA_FIXED, 0.0
        if self.variant == FULL_DECOHERENCE:
            return kernels.ETA_FIXED, 1.0
        if self.variant == FIXED:
            return kernels.ETA_FIXED, self.value
        if self.variant == SURVIVAL_LIGHT_SPEED:
            return kernels.ETA_LIGHT_SPEED, 0.0
        return kernels.ETA_MESON_VELOCITY, 0.0

    @property
    def label(self) -> str:
        return f"{self.variant}({self.value:g})" if self.variant == FIXED else self.variant


@dataclass(frozen=True)
class KinematicPoint:
    y: float
    pt: float
    phi: float
    b: float

    def __post_init__(self):
        if self.pt < 0:
            raise ValueError("pT must be non-negative")
        if not self.b > 0:
            raise ValueError("b must be positive")
        if not 0.0 <= self.phi < 2.0 * math.pi:
            raise ValueError("phi must lie in [0, 2 pi)")


def eta(b, meson: MesonSpec, omega, pt, model: DecoherenceModel):
    """Decoherence parameter at impact parameter b [fm].

    ``omega`` [MeV] is only used by the light-speed survival variant.
    """
    b = np.asarray(b, dtype=float)
    if np.any(b < 0):
        raise ValueError("b must be non-negative")
    kind, value = model.kernel_args()
    if kind == kernels.ETA_FIXED:
        out = np.full(np.broadcast(b, pt, omega).shape, value)
    elif kind == kernels.ETA_LIGHT_SPEED:
        out = -np.expm1(-meson.mass * b / (np.asarray(omega, dtype=float) * meson.ctau))
    else:
        pt = np.asarray(pt, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            expo = np.where(pt > 0, meson.mass * b / (np.where(pt > 0, pt, 1.0) * meson.ctau), np.inf)
        out = -np.expm1(-expo)
    return float(out) if out.ndim == 0 else out


def _eta_at(model: DecoherenceModel, meson: MesonSpec, b, pt, y: float):
    kind, value = model.kernel_args()
    out = kernels.eta_values(kind, value, b, pt, meson.mass, math.cosh(y), meson.ctau)
    return out


def point_rate(kp: KinematicPoint, c: tuple[float, float], eta_value: float, a1_sq: float) -> float:
    """Rate density at a fixed impact-parameter vector."""
    if not 0.0 <= eta_value <= 1.0:
        raise ValueError("eta must lie in [0, 1]")
    cmag, delta = c
    return float(kernels.point_rate(kp.pt, kp.b, kp.phi, cmag, delta, eta_value, a1_sq))


def azimuth_average(a1_sq, cmag, delta, eta_value, pt, b):
    """Exact azimuthal average of :func:`point_rate` over the b orientation."""
    z = np.asarray(pt, dtype=float) * np.asarray(b, dtype=float) / HBARC
    return a1_sq * (1.0 + cmag * cmag - 2.0 * cmag * (1.0 - eta_value) * math.cos(delta) * j0(z))


def azimuth_averaged_rate(pt, b, y: float, model: Photoproduction, decoherence: DecoherenceModel):
    """Rate density at (pT, b, y) averaged over the unmeasured direction of b."""
    w1, w2 = model.source_weights(b, y)
    f2 = np.asarray(form_factor(pt, model.formfactor)) ** 2
    a1_sq = w1 * f2
    cmag = np.sqrt(w2 / w1)
    eta_value = _eta_at(decoherence, model.meson, b, pt, y)
    out = azimuth_average(a1_sq, cmag, model.delta, eta_value, pt, b)
    return float(out) if np.ndim(out) == 0 else out


def b_weight(b, y: float, model: Photoproduction):
    """Un-normalized production density w(b) = w1(b) + w2(b), zero outside the window."""
    b = np.asarray(b, dtype=float)
    inside = model.in_window(b)
    out = np.zeros(b.shape)
    if np.any(inside):
        w1, w2 = model.source_weights(b[inside], y)
        out[inside] = w1 + w2
    return float(out) if out.ndim == 0 else out


def default_b_max(model: Photoproduction, y: float = 0.0) -> float:
    """Upper b limit: the configured one, else ten flux cutoff lengths of the softer photon."""
    if model.beams.b_max is not None:
        return model.beams.b_max
    k_soft = 0.5 * model.meson.mass * math.exp(-abs(y))
    return max(10.0 * model.beams.gamma * HBARC / k_soft, 10.0 * model.beams.b_min)


def beam_rapidity(model: Photoproduction) -> float:
    return math.acosh(model.beams.gamma)


def b_distribution(model: Photoproduction, y: float | None = 0.0, n_b: int = 4000, n_y: int = 321):
    """Tabulated production density per unit b, i.e. 2 pi b w(b).

    With ``y=None`` the density is integrated over rapidity up to the beam
    rapidity.  Returns (b_grid, density).
    """
    if y is None:
        ymax = beam_rapidity(model)
        ys = np.linspace(-ymax, ymax, n_y)
        b_hi = default_b_max(model, ymax)
    else:
        ys = np.array([y])
        b_hi = default_b_max(model, y)
    bg = np.geomspace(model.beams.b_min, b_hi, n_b)
    dens = np.zeros_like(bg)
    for i, yy in enumerate(ys):
        w = b_weight(bg, float(yy), model)
        if len(ys) > 1:
            wt = 0.5 if i in (0, len(ys) - 1) else 1.0
            w = w * wt * (ys[1] - ys[0])
        dens += w
    return bg, 2.0 * np.pi * bg * dens


def median_impact_parameter(model: Photoproduction, y: float | None = 0.0, **kw) -> float:
    bg, dens = b_distribution(model, y, **kw)
    cdf = cumulative_trapezoid(dens, bg, initial=0.0)
    return float(np.interp(0.5, cdf / cdf[-1], bg))


def mean_impact_parameter(model: Photoproduction, y: float | None = 0.0, **kw) -> float:
    bg, dens = b_distribution(model, y, **kw)
    return float(np.trapezoid(bg * dens, bg) / np.trapezoid(dens, bg))
