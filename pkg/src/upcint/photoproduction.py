"""Single-nucleus vector-meson production: form factors and gamma-A cross section.

The rate of production on one nucleus at rapidity y and impact parameter b
is taken as

    |A1|^2 = k1 n(k1, b) sigma_gA(k1) |F(pT)|^2

i.e. photons per unit rapidity times the photonuclear cross section, with
the transverse-momentum shape set entirely by the nuclear form factor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .constants import HBARC, NUCLEON_MASS_MEV, BeamConfig, MesonSpec, NucleusSpec, photon_energies_for_rapidity
from .flux import flux_density

HARDSPHERE_YUKAWA = "hardsphere_yukawa"
WOODS_SAXON = "woods_saxon_fft"


# 3 (sin x - x cos x) / x^3 = 3 sum_{n>=1} (-1)^(n+1) 2n x^(2n-2) / (2n+1)!
_HS_SERIES = tuple(3.0 * (-1) ** (n + 1) * 2 * n / math.factorial(2 * n + 1) for n in range(1, 10))
_HS_SWITCH = 0.5


def _hard_sphere(x):
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    small = x < _HS_SWITCH
    # the closed form cancels catastrophically at small x
    out[small] = np.polynomial.polynomial.polyval(x[small] ** 2, _HS_SERIES)
    xl = x[~small]
    out[~small] = 3.0 * (np.sin(xl) - xl * np.cos(xl)) / xl**3
    return out


@dataclass(frozen=True)
class FormFactorModel:
    """Nuclear form factor F(q), normalized to F(0) = 1.

    ``hardsphere_yukawa`` is the analytic hard sphere of radius ``R_A``
    folded with a Yukawa of range ``yukawa_range``.  ``woods_saxon_fft``
    transforms a Woods-Saxon density numerically and exists to check shape
    sensitivity.
    """

    R_A: float
    yukawa_range: float = 0.7
    model: str = HARDSPHERE_YUKAWA
    ws_radius: float | None = None
    ws_diffuseness: float = 0.54

    def __post_init__(self):
        if self.model not in (HARDSPHERE_YUKAWA, WOODS_SAXON):
            raise ValueError(f"unknown form factor model {self.model!r}")

    @classmethod
    def for_nucleus(cls, nucleus: NucleusSpec, model: str = HARDSPHERE_YUKAWA) -> FormFactorModel:
        ws_radius = 1.12 * nucleus.A ** (1 / 3) - 0.86 * nucleus.A ** (-1 / 3)
        return cls(nucleus.R_A, nucleus.yukawa_range, model, ws_radius)

    def __call__(self, q):
        return form_factor(q, self)

    @cached_property
    def _ws_table(self):
        radius = self.ws_radius if self.ws_radius is not None else self.R_A
        a = self.ws_diffuseness
        r = np.linspace(0.0, radius + 20.0 * a, 4001)
        rho = 1.0 / (1.0 + np.exp((r - radius) / a))
        return r, rho, np.trapezoid(r * r * rho, r)

    def _woods_saxon(self, q):
        r, rho, norm = self._ws_table
        q = np.atleast_1d(np.asarray(q, dtype=float))
        qr = np.outer(q / HBARC, r)
        # sin(qr)/(qr) with the q -> 0 limit
        kernel = np.sinc(qr / np.pi)
        return np.trapezoid(kernel * (r * r * rho), r, axis=1) / norm

    @cached_property
    def _coherence_table(self):
        q = np.concatenate([np.linspace(0.0, 400.0, 16001)[:-1], np.linspace(400.0, 4000.0, 7201)])
        f2 = np.asarray(form_factor(q, self)) ** 2
        # integral of |F|^2 dt with t = q^2
        cum = cumulative_trapezoid(2.0 * q * f2, q, initial=0.0)
        return q, cum / cum[-1]

    def coherent_fraction(self, q_min):
        """Fraction of the integral of |F(t)|^2 dt lying above t = q_min^2."""
        q, cdf = self._coherence_table
        return 1.0 - np.interp(q_min, q, cdf, right=1.0)


def form_factor(q, model: FormFactorModel):
    """Form factor at momentum transfer ``q`` [MeV]."""
    q_arr = np.asarray(q, dtype=float)
    if np.any(q_arr < 0):
        raise ValueError("momentum transfer must be non-negative")
    if model.model == WOODS_SAXON:
        out = model._woods_saxon(q_arr.ravel()).reshape(q_arr.shape)
    else:
        out = _hard_sphere(q_arr * model.R_A / HBARC) / (1.0 + (model.yukawa_range * q_arr / HBARC) ** 2)
    return float(out) if out.ndim == 0 else out


# gamma p -> V p parameterization sigma = X W^eps + Y W^-eta [mb, W in GeV]
DEFAULT_SIGMA = {
    "rho0": (5.0e-3, 0.22, 26.0e-3, 1.23),
    "omega": (0.55e-3, 0.22, 18.0e-3, 1.92),
    "phi": (0.34e-3, 0.22, 0.0, 0.0),
    "jpsi": (4.06e-6, 0.65, 0.0, 0.0),
}
GENERIC_SIGMA = (1.0e-3, 0.22, 0.0, 0.0)


def photon_nucleon_w(k, gamma: float):
    """gamma-nucleon centre-of-mass energy [GeV] for photon energy k [MeV]."""
    k = np.asarray(k, dtype=float)
    beta = math.sqrt(max(0.0, 1.0 - 1.0 / gamma**2))
    e_n = gamma * NUCLEON_MASS_MEV
    return np.sqrt(NUCLEON_MASS_MEV**2 + 2.0 * k * e_n * (1.0 + beta)) / 1000.0


@dataclass(frozen=True)
class GammaACrossSection:
    """Coherent gamma A -> V A cross section in mb as a function of photon energy.

    sigma_gA(k) = a_scale * sigma_gp(W) * C(k), where C is the coherent
    fraction of |F(t)|^2 above the longitudinal minimum momentum transfer
    q_L = M^2 / (4 k gamma) seen by the target.
    """

    meson: MesonSpec
    pomeron_norm: float
    pomeron_eps: float
    meson_norm: float = 0.0
    meson_eta: float = 0.0
    phase_delta: float = 0.0
    a_scale: float = 1.0
    coherence: bool = True
    formfactor: FormFactorModel | None = field(default=None, compare=False)

    @classmethod
    def default(cls, meson: MesonSpec, nucleus: NucleusSpec, formfactor: FormFactorModel | None = None, **over):
        x, eps, y, eta = DEFAULT_SIGMA.get(meson.name, GENERIC_SIGMA)
        params = dict(
            pomeron_norm=x,
            pomeron_eps=eps,
            meson_norm=y,
            meson_eta=eta,
            a_scale=nucleus.A ** (4.0 / 3.0),
            formfactor=formfactor or FormFactorModel.for_nucleus(nucleus),
        )
        params.update(over)
        return cls(meson, **params)

    def sigma_gp(self, w):
        """gamma p -> V p cross section in mb, zero below the V + N threshold."""
        w = np.asarray(w, dtype=float)
        thr = (self.meson.mass + NUCLEON_MASS_MEV) / 1000.0
        safe = np.where(w > thr, w, thr)
        val = self.pomeron_norm * safe**self.pomeron_eps + self.meson_norm * safe ** (-self.meson_eta)
        return np.where(w > thr, val, 0.0)

    def __call__(self, k, gamma: float):
        k = np.asarray(k, dtype=float)
        sigma = self.a_scale * self.sigma_gp(photon_nucleon_w(k, gamma))
        if self.coherence and self.formfactor is not None:
            q_min = self.meson.mass**2 / (4.0 * k * gamma)
            sigma = sigma * self.formfactor.coherent_fraction(q_min)
        return float(sigma) if sigma.ndim == 0 else sigma


@dataclass(frozen=True)
class Photoproduction:
    """Production model for one beam setup and meson."""

    beams: BeamConfig
    meson: MesonSpec
    xsec: GammaACrossSection
    formfactor: FormFactorModel

    @classmethod
    def default(cls, beams: BeamConfig, meson: MesonSpec, formfactor_model: str = HARDSPHERE_YUKAWA, **sigma_over):
        ff = FormFactorModel.for_nucleus(beams.nucleus, formfactor_model)
        xs = GammaACrossSection.default(meson, beams.nucleus, ff, **sigma_over)
        return cls(beams, meson, xs, ff)

    @property
    def delta(self) -> float:
        return self.xsec.phase_delta

    def photon_rate(self, k, b):
        """k n(k, b) sigma_gA(k): production per unit rapidity per fm^2."""
        k = np.asarray(k, dtype=float)
        return k * flux_density(k, b, self.beams.nucleus) * self.xsec(k, self.beams.gamma)

    def source_weights(self, b, y: float):
        """Per-source production densities (w1, w2) at impact parameter b."""
        k1, k2 = photon_energies_for_rapidity(y, self.meson.mass)
        return self.photon_rate(k1, b), self.photon_rate(k2, b)

    def in_window(self, b):
        b = np.asarray(b, dtype=float)
        ok = b >= self.beams.b_min
        if self.beams.b_max is not None:
            ok &= b <= self.beams.b_max
        return ok


def single_source_amplitude_sq(pt, y: float, b, model: Photoproduction, source: int = 1):
    """Production rate density |A_i|^2 for the nucleus labelled ``source``."""
    if np.any(np.asarray(pt) < 0):
        raise ValueError("pT must be non-negative")
    if not np.all(model.in_window(b)):
        raise ValueError("impact parameter outside the configured window")
    w1, w2 = model.source_weights(b, y)
    w = w1 if source == 1 else w2
    return w * np.asarray(form_factor(pt, model.formfactor)) ** 2


def amplitude_ratio_c(y: float, b, model: Photoproduction):
    """(|c|, delta) with |c| = |A2/A1| at rapidity y; |c| = 1 at y = 0."""
    w1, w2 = model.source_weights(b, y)
    return np.sqrt(w2 / w1), model.delta
