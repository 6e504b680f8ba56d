"""Backend selection for the numerical kernels.

The compiled ``_ckernels`` extension is used when it imports; otherwise the
numpy implementation in ``_pykernels`` is used.  Setting the environment
variable ``UPCINT_PURE_PYTHON=1`` forces the fallback.
"""

import os

from . import _pykernels

ETA_FIXED = _pykernels.ETA_FIXED
ETA_LIGHT_SPEED = _pykernels.ETA_LIGHT_SPEED
ETA_MESON_VELOCITY = _pykernels.ETA_MESON_VELOCITY

if os.environ.get("UPCINT_PURE_PYTHON", "") not in ("", "0"):
    _impl = _pykernels
else:
    try:
        from . import _ckernels as _impl
    except ImportError:
        _impl = _pykernels

BACKEND = "cython" if _impl is not _pykernels else "python"

bessel_k0 = _impl.bessel_k0
bessel_k1 = _impl.bessel_k1
flux_shape = _impl.flux_shape
eta_values = _impl.eta_values
point_rate = _impl.point_rate
coherent_b_sums = _impl.coherent_b_sums
