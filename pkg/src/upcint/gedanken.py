"""Which-nucleus pointing, flight-time decoherence and the dual-detector protocol.

Geometry: the ion trajectories are straight lines parallel to z through
(0, +b/2) (source 1) and (0, -b/2) (source 2).  Products travel in straight
lines from the decay vertex to ideal cylindrical detector surfaces of
radius L.  The event's generated source is used as the classical truth.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, replace

import numpy as np
from scipy.stats import ks_2samp

from . import rng as rng_mod
from .constants import C_LIGHT, HBARC
from .events import Event, EventGenerator, GeneratorConfig
from .interference import DecoherenceModel, default_b_max, median_impact_parameter
from .photoproduction import Photoproduction
from .spectrum import pt_spectrum

SOURCE1 = "source1"
SOURCE2 = "source2"
AMBIGUOUS = "ambiguous"

LOCALIZING = "localizing"
NON_LOCALIZING = "non-localizing"

COLLAPSE_AT_MEASUREMENT = "collapse_at_measurement"
COLLAPSE_AT_DECAY = "collapse_at_decay"
SCENARIOS = (COLLAPSE_AT_MEASUREMENT, COLLAPSE_AT_DECAY)

MIN_PROTOCOL_EVENTS = 1000


@dataclass(frozen=True)
class DetectorLayout:
    """Two cylindrical arms at transverse radius ``radius`` (fm).

    ``time_resolution`` defaults to infinity, i.e. no timing information.
    """

    radius: float = 500.0
    position_resolution: float = 0.0
    time_resolution: float = math.inf

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("detector radius must be positive")
        if self.position_resolution < 0 or self.time_resolution < 0:
            raise ValueError("resolutions must be non-negative")


@dataclass
class PointingResult:
    reconstructable: bool
    hits: tuple[np.ndarray, np.ndarray] | None = None
    d_source1: float = math.nan
    d_source2: float = math.nan
    verdict: str = AMBIGUOUS
    true_source: int = 0

    @property
    def miss(self) -> float:
        """Closest approach of the chord to the trajectory of the generating nucleus."""
        return self.d_source1 if self.true_source == 1 else self.d_source2

    @property
    def correct(self) -> bool:
        return self.verdict == (SOURCE1 if self.true_source == 1 else SOURCE2)


def _cylinder_hit(origin: np.ndarray, p: np.ndarray, radius: float) -> np.ndarray | None:
    """Point where the ray origin + s p (s > 0) leaves the cylinder of the given radius."""
    pt2 = p[0] * p[0] + p[1] * p[1]
    if pt2 == 0.0:
        return None
    r2 = origin[0] ** 2 + origin[1] ** 2
    if r2 >= radius * radius:
        return None
    half_b = (origin[0] * p[0] + origin[1] * p[1]) / pt2
    s = -half_b + math.sqrt(half_b * half_b + (radius * radius - r2) / pt2)
    return origin + s * p


def _line_distance(h1: np.ndarray, h2: np.ndarray, point: np.ndarray) -> float:
    dx, dy = h2[0] - h1[0], h2[1] - h1[1]
    norm = math.hypot(dx, dy)
    if norm == 0.0:
        return math.hypot(point[0] - h1[0], point[1] - h1[1])
    return abs(dx * (point[1] - h1[1]) - dy * (point[0] - h1[0])) / norm


def detector_hits(event: Event, layout: DetectorLayout):
    """Hit points of the first two products on the detector surface, or None."""
    if len(event.products) < 2:
        return None
    hits = []
    for pr in event.products[:2]:
        h = _cylinder_hit(np.asarray(pr.origin, dtype=float), np.asarray(pr.p4[1:], dtype=float), layout.radius)
        if h is None:
            return None
        hits.append(h)
    return hits


def pointing_reconstruction(event: Event, layout: DetectorLayout, rng=None) -> PointingResult:
    """Chord through the two hits and its miss distance to each ion trajectory.

    With ``rng`` and a non-zero position resolution each hit is smeared by
    a Gaussian of that width along the surface (azimuthal and z directions).
    """
    hits = detector_hits(event, layout)
    if hits is None:
        return PointingResult(False, true_source=event.source)
    if rng is not None and layout.position_resolution > 0:
        smeared = []
        for h in hits:
            n = np.array([-h[1], h[0], 0.0]) / math.hypot(h[0], h[1])
            du, dz = rng.normal(0.0, layout.position_resolution, 2)
            smeared.append(h + du * n + np.array([0.0, 0.0, dz]))
        hits = smeared
    half = 0.5 * event.b
    d1 = _line_distance(hits[0], hits[1], np.array([0.0, half]))
    d2 = _line_distance(hits[0], hits[1], np.array([0.0, -half]))
    if abs(d1 - d2) <= layout.position_resolution:
        verdict = AMBIGUOUS
    else:
        verdict = SOURCE1 if d1 < d2 else SOURCE2
    return PointingResult(True, (hits[0], hits[1]), d1, d2, verdict, event.source)


def flight_time_difference_at(point, b: float) -> float:
    """|t1 - t2| in seconds for light from (0, +-b/2, 0) to ``point`` (fm)."""
    x, y, z = (float(v) for v in point)
    r1 = math.sqrt(x * x + (y - 0.5 * b) ** 2 + z * z)
    r2 = math.sqrt(x * x + (y + 0.5 * b) ** 2 + z * z)
    # never more than b by the triangle inequality; clip rounding
    return min(abs(r1 - r2), b) / C_LIGHT


def flight_time_difference(event: Event, layout: DetectorLayout) -> float:
    """Light travel time difference from the two candidate sources to the first hit."""
    hits = detector_hits(event, layout)
    if hits is None:
        raise ValueError("event is not reconstructable in this layout")
    return flight_time_difference_at(hits[0], event.b)


def timing_decoherence_flag(layout: DetectorLayout, b: float) -> str:
    return LOCALIZING if layout.time_resolution < b / C_LIGHT else NON_LOCALIZING


def localizing_b(layout: DetectorLayout) -> float | None:
    """Impact parameter above which the layout's timing resolves the source."""
    if math.isinf(layout.time_resolution):
        return None
    return layout.time_resolution * C_LIGHT


# -- ensembles --------------------------------------------------------------------


@dataclass
class PointingSummary:
    n_events: int
    n_reconstructable: int
    n_selected: int
    median_miss: float
    accuracy: float
    accuracy_selected: float
    ambiguous_fraction: float


def perpendicular(event: Event, cut: float) -> bool:
    """First product's transverse momentum within acos(cut) of perpendicular to b."""
    p = event.products[0].p4
    pt = math.hypot(p[1], p[2])
    return pt > 0 and abs(p[2]) / pt < cut


def pointing_summary(events, layout: DetectorLayout, perp_cut: float = 0.26, rng=None) -> PointingSummary:
    """Median miss over decays with the product momentum roughly perpendicular to b; accuracy over all."""
    results = [pointing_reconstruction(ev, layout, rng) for ev in events]
    ok = [(ev, r) for ev, r in zip(events, results) if r.reconstructable]
    sel = [r for ev, r in ok if perpendicular(ev, perp_cut)]
    misses = np.array([r.miss for r in sel])
    return PointingSummary(
        n_events=len(results),
        n_reconstructable=len(ok),
        n_selected=len(sel),
        median_miss=float(np.median(misses)) if len(misses) else math.nan,
        accuracy=float(np.mean([r.correct for _, r in ok])) if ok else math.nan,
        accuracy_selected=float(np.mean([r.correct for r in sel])) if sel else math.nan,
        ambiguous_fraction=float(np.mean([r.verdict == AMBIGUOUS for _, r in ok])) if ok else math.nan,
    )


# -- dual-detector protocol -------------------------------------------------------

MODES = ("P", "M")


def arm_modes_for(seed: int, index: int) -> np.ndarray:
    """Modes of (arm 1, arm 2) for one event: 0 = position, 1 = momentum."""
    return (rng_mod.transient_stream(seed, index, rng_mod.PROTOCOL).random(2) < 0.5).astype(np.int8)


def arm_modes(seed: int, n: int) -> np.ndarray:
    """(n, 2) mode array for events 0..n-1."""
    return np.array([arm_modes_for(seed, i) for i in range(n)], dtype=np.int8).reshape(n, 2)


@dataclass
class ProtocolReport:
    scenario: str
    decoherence: str
    n_events: int
    counts: dict
    pt_cut: float
    mm_histogram: dict
    dip_depth: float
    dip_depth_sigma: float
    dip_depth_expected: float
    pp_accuracy: float
    pp_ambiguous: float
    pp_unreconstructable: float
    marginal_pvalues: dict
    spacelike_fraction: float
    localizing_fraction: float
    meta: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True, allow_nan=True) + "\n"

    def to_text(self) -> str:
        lines = [
            f"scenario            {self.scenario} ({self.decoherence})",
            f"events              {self.n_events}",
            "pairings            " + "  ".join(f"{k}={v}" for k, v in self.counts.items()),
            f"MM dip depth        D = {self.dip_depth:.4f} +- {self.dip_depth_sigma:.4f}"
            f"  (expected {self.dip_depth_expected:.4f}, pT < {self.pt_cut:.3g} MeV)",
            f"PP which-nucleus    accuracy {self.pp_accuracy:.4f}, ambiguous {self.pp_ambiguous:.4f},"
            f" unreconstructable {self.pp_unreconstructable:.4f}",
            "marginal KS p       " + "  ".join(f"{k}={v:.3g}" for k, v in self.marginal_pvalues.items()),
            f"space-like hits     {self.spacelike_fraction:.4f}",
            f"timing-localized    {self.localizing_fraction:.4f}",
        ]
        return "\n".join(lines) + "\n"


def _arm_outcome(event: Event, arm: int, mode: int, layout: DetectorLayout) -> float:
    """Position mode: azimuth of the hit; momentum mode: product transverse momentum."""
    p = event.products[arm].p4
    if mode == 1:
        return math.hypot(p[1], p[2])
    h = _cylinder_hit(np.asarray(event.products[arm].origin, dtype=float), np.asarray(p[1:], dtype=float), layout.radius)
    return math.nan if h is None else math.atan2(h[1], h[0])


def _hit_time(event: Event, arm: int, layout: DetectorLayout):
    pr = event.products[arm]
    h = _cylinder_hit(np.asarray(pr.origin, dtype=float), np.asarray(pr.p4[1:], dtype=float), layout.radius)
    if h is None:
        return None, None
    v = math.sqrt(float(np.dot(pr.p4[1:], pr.p4[1:]))) / pr.p4[0] * C_LIGHT
    return h, event.t_decay + float(np.linalg.norm(h - pr.origin)) / v


def spacelike(event: Event, layout: DetectorLayout) -> bool | None:
    """Whether the two detection events are space-like separated."""
    h1, t1 = _hit_time(event, 0, layout)
    h2, t2 = _hit_time(event, 1, layout)
    if h1 is None or h2 is None:
        return None
    return abs(t1 - t2) * C_LIGHT < float(np.linalg.norm(h1 - h2))


def dual_detector_protocol(
    model: Photoproduction,
    n_events: int,
    scenario: str,
    layout: DetectorLayout,
    seed: int,
    decoherence: DecoherenceModel | None = None,
    config: GeneratorConfig | None = None,
    pt_cut: float | None = None,
    threads: int = 1,
    hist_bins: int = 50,
    events: list[Event] | None = None,
) -> ProtocolReport:
    """Random position/momentum choice per arm over a generated ensemble.

    ``collapse_at_measurement`` generates with ``decoherence`` (default
    full coherence); ``collapse_at_decay`` with eta = 1.  Events whose
    impact parameter the layout's timing can resolve are generated with
    eta = 1 in either case.  Pre-generated ``events`` may be passed
    instead; they are then used as they are.
    """
    if scenario not in SCENARIOS:
        raise ValueError(f"unknown scenario {scenario!r}")
    if events is not None:
        n_events = len(events)
    if n_events < MIN_PROTOCOL_EVENTS:
        raise ValueError(f"the protocol needs at least {MIN_PROTOCOL_EVENTS} events")
    if decoherence is None:
        decoherence = DecoherenceModel.full_coherence()
    if scenario == COLLAPSE_AT_DECAY:
        decoherence = DecoherenceModel.full_decoherence()
    base = config or GeneratorConfig(seed=seed, n_events=n_events, decoherence=decoherence)
    cfg = replace(base, seed=seed, n_events=n_events, decoherence=decoherence, localize_above_b=localizing_b(layout))
    gen = EventGenerator(model, cfg)
    if events is None:
        events = gen.generate(threads)
    two_body = [ev for ev in events if len(ev.products) >= 2]
    modes = np.array([arm_modes_for(seed, ev.index) for ev in two_body]).reshape(-1, 2)

    names = {(0, 0): "PP", (0, 1): "PM", (1, 0): "MP", (1, 1): "MM"}
    groups = {name: [] for name in names.values()}
    for ev, m in zip(two_body, modes):
        groups[names[(int(m[0]), int(m[1]))]].append(ev)
    counts = {k: len(v) for k, v in groups.items()}

    y_mid = 0.5 * (cfg.y_min + cfg.y_max)
    if pt_cut is None:
        pt_cut = 2.0 * HBARC / median_impact_parameter(model, y_mid)
    sampler = gen.sampler
    f_ref = float(np.interp(pt_cut, sampler.pt_grid, sampler.pt_cdf))

    mm_pt = np.array([ev.pt for ev in groups["MM"]])
    n_mm = len(mm_pt)
    f_obs = float(np.mean(mm_pt < pt_cut)) if n_mm else math.nan
    dip = 1.0 - f_obs / f_ref
    sigma = math.sqrt(max(f_obs * (1.0 - f_obs), 1.0 / n_mm) / n_mm) / f_ref if n_mm else math.nan
    expected = _expected_dip(model, y_mid, decoherence, cfg, pt_cut, f_ref, localizing_b(layout))
    counts_mm, edges = np.histogram(mm_pt, bins=hist_bins, range=(cfg.pt_min, min(cfg.pt_max, 10.0 * pt_cut)))

    pp = [pointing_reconstruction(ev, layout) for ev in groups["PP"]]
    pp_ok = [r for r in pp if r.reconstructable]
    acc = float(np.mean([r.correct for r in pp_ok])) if pp_ok else math.nan
    amb = float(np.mean([r.verdict == AMBIGUOUS for r in pp_ok])) if pp_ok else math.nan
    unreco = 1.0 - len(pp_ok) / len(pp) if pp else math.nan

    pvalues = {}
    for arm in (0, 1):
        for own in (0, 1):
            samples = []
            for other in (0, 1):
                key = names[(own, other)] if arm == 0 else names[(other, own)]
                vals = np.array([_arm_outcome(ev, arm, own, layout) for ev in groups[key]])
                samples.append(vals[np.isfinite(vals)])
            label = f"arm{arm + 1}_{MODES[own]}"
            if min(len(s) for s in samples) > 0:
                pvalues[label] = float(ks_2samp(samples[0], samples[1]).pvalue)
            else:
                pvalues[label] = math.nan

    sl = [spacelike(ev, layout) for ev in two_body]
    sl = [s for s in sl if s is not None]
    loc_b = localizing_b(layout)
    loc = float(np.mean([ev.b > loc_b for ev in events])) if loc_b is not None else 0.0

    return ProtocolReport(
        scenario=scenario,
        decoherence=decoherence.label,
        n_events=len(events),
        counts=counts,
        pt_cut=float(pt_cut),
        mm_histogram={"edges": [float(e) for e in edges], "counts": [int(c) for c in counts_mm]},
        dip_depth=float(dip),
        dip_depth_sigma=float(sigma),
        dip_depth_expected=float(expected),
        pp_accuracy=acc,
        pp_ambiguous=amb,
        pp_unreconstructable=float(unreco),
        marginal_pvalues=pvalues,
        spacelike_fraction=float(np.mean(sl)) if sl else math.nan,
        localizing_fraction=loc,
        meta={"seed": seed, "layout": asdict(layout), "meson": model.meson.name, "y": y_mid},
    )


def _expected_dip(model, y, decoherence, cfg, pt_cut, f_ref, loc_b=None, bin_width: float = 0.5) -> float:
    """D predicted by the quadrature spectrum at the window's central rapidity.

    Impact parameters above ``loc_b`` contribute without interference.
    """
    n = max(1, math.ceil((cfg.pt_max - cfg.pt_min) / bin_width))
    grid = np.linspace(cfg.pt_min, cfg.pt_max, n + 1)
    b_lo, b_hi = model.beams.b_min, default_b_max(model, y)
    if loc_b is None or loc_b >= b_hi:
        rate = pt_spectrum(model, y, decoherence, grid).rate_interference
    elif loc_b <= b_lo:
        rate = pt_spectrum(model, y, DecoherenceModel.full_decoherence(), grid).rate_interference
    else:
        beams = model.beams
        inner = replace(model, beams=replace(beams, b_min=b_lo, b_max=loc_b))
        outer = replace(model, beams=replace(beams, b_min=loc_b, b_max=b_hi))
        rate = (
            pt_spectrum(inner, y, decoherence, grid).rate_interference
            + pt_spectrum(outer, y, DecoherenceModel.full_decoherence(), grid).rate_interference
        )
    dens = grid * rate
    cum = np.concatenate([[0.0], np.cumsum(0.5 * (dens[1:] + dens[:-1]) * np.diff(grid))])
    return 1.0 - float(np.interp(pt_cut, grid, cum / cum[-1])) / f_ref
