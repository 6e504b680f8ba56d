"""Impact-parameter-integrated pT spectra with and without interference."""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .constants import HBARC
from .interference import FULL_DECOHERENCE, DecoherenceModel, default_b_max
from .photoproduction import Photoproduction, form_factor

QUAD_RTOL = 1e-4
_GL_ORDER = 8
_GL_X, _GL_W = np.polynomial.legendre.leggauss(_GL_ORDER)

CSV_COLUMNS = ("pt_mev", "rate_interf", "rate_no_interf", "ratio")


class QuadratureError(RuntimeError):
    """The b integral did not reach the requested accuracy."""


@dataclass(frozen=True)
class PtGrid:
    """Evaluation grid: ``n_bins`` equal bins on [pt_min, pt_max], evaluated at centres."""

    pt_min: float = 0.0
    pt_max: float = 200.0
    n_bins: int = 200

    def __post_init__(self):
        if self.pt_min < 0 or not self.pt_max > self.pt_min or self.n_bins < 1:
            raise ValueError("invalid pT grid")

    @property
    def edges(self) -> np.ndarray:
        return np.linspace(self.pt_min, self.pt_max, self.n_bins + 1)

    @property
    def centers(self) -> np.ndarray:
        e = self.edges
        return 0.5 * (e[1:] + e[:-1])


@dataclass
class SpectrumTable:
    """Rate densities d^2N/d^2pT at each evaluation point.

    ``rate_no_interference`` is the incoherent sum of both sources; with
    ``normalized`` set both columns are divided by its value at pT = 0.
    """

    pt: np.ndarray
    rate_interference: np.ndarray
    rate_no_interference: np.ndarray
    edges: np.ndarray | None = None
    normalized: bool = False
    model_label: str = ""
    quad_error: float = 0.0
    meta: dict = field(default_factory=dict)

    @property
    def ratio(self) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(self.rate_no_interference > 0, self.rate_interference / self.rate_no_interference, 1.0)

    def dip_depth(self, pt_cut: float | None = None) -> float:
        """D = 1 - interf/no-interf at the lowest evaluated pT (or summed below ``pt_cut``)."""
        if pt_cut is None:
            return float(1.0 - self.ratio[0])
        sel = self.pt <= pt_cut
        return float(1.0 - self.rate_interference[sel].sum() / self.rate_no_interference[sel].sum())

    def to_csv(self, comment: str | None = None) -> str:
        buf = io.StringIO()
        if comment is not None:
            buf.write(f"# {comment}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for p, a, b, r in zip(self.pt, self.rate_interference, self.rate_no_interference, self.ratio):
            w.writerow([f"{p:.6f}", f"{a:.12e}", f"{b:.12e}", f"{r:.12e}"])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> SpectrumTable:
        rows = [r for r in csv.reader(io.StringIO(text)) if r and not r[0].startswith("#")]
        if tuple(rows[0]) != CSV_COLUMNS:
            raise ValueError(f"unexpected spectrum header {rows[0]}")
        data = np.array([[float(v) for v in r] for r in rows[1:]]).reshape(-1, 4)
        return cls(data[:, 0], data[:, 1], data[:, 2])


def b_panels(b_lo: float, b_hi: float, pt_max: float, max_log_width: float = 0.05, phase_width: float = 0.5 * math.pi):
    """Panel boundaries: log-spaced, and no wider than ``phase_width`` in pT b / hbar c."""
    n_log = max(1, math.ceil(math.log(b_hi / b_lo) / max_log_width))
    edges = np.geomspace(b_lo, b_hi, n_log + 1)
    if pt_max <= 0:
        return edges
    max_db = phase_width * HBARC / pt_max
    out = [edges[:1]]
    for lo, hi in zip(edges[:-1], edges[1:]):
        m = max(1, math.ceil((hi - lo) / max_db))
        out.append(np.linspace(lo, hi, m + 1)[1:])
    return np.concatenate(out)


def gauss_nodes(edges: np.ndarray):
    """Gauss-Legendre nodes and weights (for integrals in b) over the panels."""
    lo, hi = edges[:-1, None], edges[1:, None]
    half = 0.5 * (hi - lo)
    nodes = (lo + hi) * 0.5 + half * _GL_X[None, :]
    weights = half * _GL_W[None, :]
    return nodes.ravel(), weights.ravel()


def _refine(edges: np.ndarray) -> np.ndarray:
    mids = 0.5 * (edges[1:] + edges[:-1])
    out = np.empty(2 * len(edges) - 1)
    out[0::2] = edges
    out[1::2] = mids
    return out


@dataclass
class _BIntegrals:
    incoherent: float
    cross: np.ndarray


def _chunked(fn, pts: np.ndarray, threads: int):
    if threads <= 1 or len(pts) < 2:
        return fn(pts)
    chunks = np.array_split(pts, min(threads * 4, len(pts)))
    with ThreadPoolExecutor(max_workers=threads) as pool:
        parts = list(pool.map(fn, chunks))
    return np.concatenate(parts)


def _b_integrals(model: Photoproduction, y: float, decoherence: DecoherenceModel, pts, edges, threads):
    nodes, qw = gauss_nodes(edges)
    w1, w2 = model.source_weights(nodes, y)
    # measure b db
    incoherent = float(np.sum(qw * nodes * (w1 + w2)))
    cross_w = qw * nodes * np.sqrt(w1 * w2)
    kind, value = decoherence.kernel_args()
    meson = model.meson
    cosh_y = math.cosh(y)

    def run(chunk):
        return kernels.coherent_b_sums(chunk, nodes, cross_w, kind, value, meson.mass, cosh_y, meson.ctau)

    return _BIntegrals(incoherent, _chunked(run, pts, threads))


def pt_spectrum(
    model: Photoproduction,
    y: float,
    decoherence: DecoherenceModel,
    grid: PtGrid | np.ndarray | None = None,
    normalize_fig2: bool = False,
    threads: int = 1,
    rtol: float = QUAD_RTOL,
    max_refinements: int = 3,
) -> SpectrumTable:
    """b-integrated spectrum for the given decoherence model and its incoherent reference.

    The b integral runs over the beam window with measure b db.  Its error
    is estimated by halving every quadrature panel and comparing; the
    estimate is taken relative to the incoherent b integral, which sets the
    local rate scale.  Raises :class:`QuadratureError` if ``rtol`` is not
    reached after ``max_refinements`` halvings.
    """
    if grid is None:
        grid = PtGrid()
    if isinstance(grid, PtGrid):
        pts, edges_pt = grid.centers, grid.edges
    else:
        pts, edges_pt = np.asarray(grid, dtype=float), None
    if np.any(pts < 0):
        raise ValueError("pT must be non-negative")

    b_lo = model.beams.b_min
    b_hi = default_b_max(model, y)
    eval_pts = np.concatenate([pts, [0.0]]) if normalize_fig2 else pts
    pt_max = float(eval_pts.max()) if len(eval_pts) else 0.0

    incoherent_only = decoherence.variant == FULL_DECOHERENCE
    edges = b_panels(b_lo, b_hi, pt_max)
    coarse = _b_integrals(model, y, decoherence, np.zeros(0) if incoherent_only else eval_pts, edges, threads)
    err = math.inf
    for _ in range(max_refinements):
        edges = _refine(edges)
        fine = _b_integrals(model, y, decoherence, np.zeros(0) if incoherent_only else eval_pts, edges, threads)
        scale = fine.incoherent
        err_inc = abs(fine.incoherent - coarse.incoherent) / scale
        err_cross = float(np.max(np.abs(fine.cross - coarse.cross))) / scale if len(fine.cross) else 0.0
        err = max(err_inc, 2.0 * err_cross)
        coarse = fine
        if err <= rtol:
            break
    else:
        raise QuadratureError(f"b integral relative error {err:.3g} exceeds {rtol:g}")

    f2 = np.asarray(form_factor(eval_pts, model.formfactor), dtype=float) ** 2
    no_int = f2 * coarse.incoherent
    if incoherent_only:
        interf = no_int.copy()
    else:
        interf = f2 * (coarse.incoherent - 2.0 * math.cos(model.delta) * coarse.cross)
        # cancellation at the null can leave -1e-17 scale residue
        interf = np.maximum(interf, 0.0)

    if normalize_fig2:
        norm = no_int[-1]
        interf, no_int = interf[:-1] / norm, no_int[:-1] / norm
    return SpectrumTable(
        pt=pts.copy(),
        rate_interference=interf,
        rate_no_interference=no_int,
        edges=edges_pt,
        normalized=normalize_fig2,
        model_label=decoherence.label,
        quad_error=err,
        meta={"y": y, "b_min": b_lo, "b_max": b_hi, "n_b_nodes": int((len(edges) - 1) * _GL_ORDER)},
    )


def pt_fraction_below(model: Photoproduction, pt_cut: float, pt_max: float = 2000.0, n: int = 40001) -> float:
    """Fraction of the pT-integrated no-interference rate (with the 2 pi pT Jacobian) below ``pt_cut``."""
    q = np.linspace(0.0, pt_max, n)
    dens = q * np.asarray(form_factor(q, model.formfactor)) ** 2
    cum = np.concatenate([[0.0], np.cumsum(0.5 * (dens[1:] + dens[:-1]) * np.diff(q))])
    return float(np.interp(pt_cut, q, cum) / cum[-1])
