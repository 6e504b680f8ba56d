"""Equivalent-photon (Weizsaecker-Williams) flux of a point nucleus."""

from __future__ import annotations

import numpy as np

from . import kernels
from .constants import ALPHA_EM, HBARC, NucleusSpec

# below this the point-charge form is meaningless
MIN_B_FM = 0.1


def flux_density(k, b, nucleus: NucleusSpec):
    """Photons per MeV per fm^2 at energy ``k`` [MeV] and distance ``b`` [fm].

    n(k, b) = Z^2 alpha / pi^2 * x^2 / (k b^2) * [K1(x)^2 + K0(x)^2 / gamma^2],
    x = k b / (gamma hbar c).  Accepts scalars or broadcastable arrays.
    """
    k_arr = np.asarray(k, dtype=float)
    b_arr = np.asarray(b, dtype=float)
    if np.any(~(k_arr > 0)):
        raise ValueError("photon energy must be positive")
    if np.any(~(b_arr > 0)):
        raise ValueError("distance must be positive")
    if np.any(b_arr < MIN_B_FM):
        raise ValueError(f"b below {MIN_B_FM} fm is outside the point-charge flux model")
    pref = nucleus.Z**2 * ALPHA_EM / np.pi**2
    out = pref * kernels.flux_shape(k_arr, b_arr, nucleus.gamma_beam)
    return float(out) if out.ndim == 0 else out


def flux_cutoff_energy(b: float, gamma: float) -> float:
    """Characteristic maximum photon energy hbar c gamma / b in MeV."""
    if not b > 0:
        raise ValueError("distance must be positive")
    return HBARC * gamma / b


def flux_grid_csv(nucleus: NucleusSpec, k_values, b_values) -> str:
    """(k, b, n) table as CSV text, one row per grid point."""
    kk, bb = np.meshgrid(np.asarray(k_values, float), np.asarray(b_values, float), indexing="ij")
    n = flux_density(kk, bb, nucleus)
    lines = ["k_mev,b_fm,n_per_mev_fm2"]
    lines += [f"{k:.9g},{b:.9g},{v:.12e}" for k, b, v in zip(kk.ravel(), bb.ravel(), np.ravel(n))]
    return "\n".join(lines) + "\n"
