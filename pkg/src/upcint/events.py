"""Monte Carlo generation of interfering vector-meson events.

Kinematics (y, b, pT, phi) are drawn from w(b) x point rate by rejection
against the incoherent sum of the two sources, inflated by
(|A1| + |A2|)^2 / (|A1|^2 + |A2|^2) so that the envelope always dominates.
Each event is also assigned a classical production source (probability
proportional to that source's rate); the pointing analyses use it as the
geometric truth.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import rng as rng_mod
from .constants import C_LIGHT, HBARC, DecayChannel, MesonSpec
from .interference import DecoherenceModel, default_b_max, eta
from .photoproduction import Photoproduction, form_factor

_BLOCK = 16
_MAX_BLOCKS = 4096
MIN_ACCEPTANCE = 1e-4


class SamplingError(RuntimeError):
    """The rejection sampler cannot make progress in the requested window."""


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class GeneratorConfig:
    seed: int
    n_events: int
    decoherence: DecoherenceModel
    y_min: float = 0.0
    y_max: float = 0.0
    pt_min: float = 0.0
    pt_max: float = 500.0
    b_min: float | None = None
    b_max: float | None = None
    channels: tuple[str, ...] | None = None
    y_cells: int = 41
    chunk_size: int = 1024
    # impact parameters above this are resolved by detector timing: eta forced to 1
    localize_above_b: float | None = None

    def __post_init__(self):
        if self.n_events < 0:
            raise ConfigError("n_events must be non-negative")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        if self.y_max < self.y_min:
            raise ConfigError("empty rapidity window")
        if self.pt_min < 0 or not self.pt_max > self.pt_min:
            raise ConfigError("empty pT window")
        if self.b_min is not None and self.b_max is not None and not self.b_max > self.b_min:
            raise ConfigError("empty impact-parameter window")


@dataclass
class Product:
    mass: float
    p4: np.ndarray  # (E, px, py, pz) in MeV
    origin: np.ndarray  # straight-line origin (decay vertex) in fm


@dataclass
class Event:
    index: int
    y: float
    pt: float
    phi: float
    b: float
    source: int
    cmag: float
    delta: float
    omega: float
    p: np.ndarray  # (px, py, pz); b points along +y
    t_decay: float  # lab frame, s
    t_proper: float
    x_decay: np.ndarray  # displacement from the production point, fm
    channel: str
    products: list[Product] = field(default_factory=list)
    a1: complex = 0j
    a2: complex = 0j

    @property
    def production_point(self) -> np.ndarray:
        sign = 1.0 if self.source == 1 else -1.0
        return np.array([0.0, sign * 0.5 * self.b, 0.0])

    @property
    def vertex(self) -> np.ndarray:
        return self.production_point + self.x_decay

    @property
    def p4(self) -> np.ndarray:
        return np.array([self.omega, *self.p])

    def to_dict(self) -> dict:
        return {
            "evt": self.index,
            "y": self.y,
            "pt_mev": self.pt,
            "phi": self.phi,
            "b_fm": self.b,
            "source": self.source,
            "cmag": self.cmag,
            "delta": self.delta,
            "omega_mev": self.omega,
            "p_mev": [float(v) for v in self.p],
            "a1": [self.a1.real, self.a1.imag],
            "a2": [self.a2.real, self.a2.imag],
            "tdec_s": self.t_decay,
            "tproper_s": self.t_proper,
            "x_decay_fm": [float(v) for v in self.x_decay],
            "vertex_fm": [float(v) for v in self.vertex],
            "channel": self.channel,
            "products": [
                {"mass_mev": pr.mass, "p4_mev": [float(v) for v in pr.p4], "origin_fm": [float(v) for v in pr.origin]}
                for pr in self.products
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> Event:
        ev = cls(
            index=d["evt"],
            y=d["y"],
            pt=d["pt_mev"],
            phi=d["phi"],
            b=d["b_fm"],
            source=d["source"],
            cmag=d["cmag"],
            delta=d["delta"],
            omega=d["omega_mev"],
            p=np.array(d["p_mev"]),
            t_decay=d["tdec_s"],
            t_proper=d["tproper_s"],
            x_decay=np.array(d["x_decay_fm"]),
            channel=d["channel"],
            products=[Product(pr["mass_mev"], np.array(pr["p4_mev"]), np.array(pr["origin_fm"])) for pr in d["products"]],
            a1=complex(*d["a1"]),
            a2=complex(*d["a2"]),
        )
        return ev


# -- decay kinematics ----------------------------------------------------------


def two_body_momentum(M: float, m1: float, m2: float) -> float:
    """Rest-frame momentum of either product in M -> m1 m2."""
    s = (M * M - (m1 + m2) ** 2) * (M * M - (m1 - m2) ** 2)
    if s < 0:
        raise ValueError("decay below threshold")
    return math.sqrt(s) / (2.0 * M)


def boost(p4: np.ndarray, beta: np.ndarray) -> np.ndarray:
    """Boost 4-vectors (E, px, py, pz) from a frame moving with velocity ``beta``."""
    p4 = np.array(p4, dtype=float, ndmin=2)
    bx, by, bz = (float(v) for v in beta)
    b2 = bx * bx + by * by + bz * bz
    if b2 == 0.0:
        return p4
    gamma = 1.0 / math.sqrt(1.0 - b2)
    for row in p4:
        e, px, py, pz = row
        bp = bx * px + by * py + bz * pz
        coef = (gamma - 1.0) * bp / b2 + gamma * e
        row[0] = gamma * (e + bp)
        row[1] = px + coef * bx
        row[2] = py + coef * by
        row[3] = pz + coef * bz
    return p4


def _isotropic(rng, p: float) -> np.ndarray:
    cos_t = 2.0 * rng.random() - 1.0
    sin_t = math.sqrt(max(0.0, 1.0 - cos_t * cos_t))
    ph = 2.0 * math.pi * rng.random()
    return np.array([p * sin_t * math.cos(ph), p * sin_t * math.sin(ph), p * cos_t])


def _two_body_rest(rng, M, m1, m2):
    q = two_body_momentum(M, m1, m2)
    v = _isotropic(rng, q)
    return (
        np.array([math.sqrt(m1 * m1 + q * q), *v]),
        np.array([math.sqrt(m2 * m2 + q * q), *(-v)]),
    )


_WMAX_CACHE: dict[tuple[float, float, float, float], float] = {}


def _three_body_wmax(M, m1, m2, m3):
    key = (M, m1, m2, m3)
    if key not in _WMAX_CACHE:
        m12 = np.linspace(m1 + m2, M - m3, 4001)
        w = [two_body_momentum(M, x, m3) * two_body_momentum(x, m1, m2) for x in m12]
        _WMAX_CACHE[key] = 1.01 * max(w)
    return _WMAX_CACHE[key]


def _three_body_rest(rng, M, m1, m2, m3):
    lo, hi = m1 + m2, M - m3
    wmax = _three_body_wmax(M, m1, m2, m3)
    while True:
        m12 = lo + (hi - lo) * rng.random()
        w = two_body_momentum(M, m12, m3) * two_body_momentum(m12, m1, m2)
        if rng.random() * wmax < w:
            break
    p12, p3 = _two_body_rest(rng, M, m12, m3)
    q1, q2 = _two_body_rest(rng, m12, m1, m2)
    pair = boost(np.array([q1, q2]), p12[1:] / p12[0])
    return pair[0], pair[1], p3


@dataclass(frozen=True)
class MesonState:
    mass: float
    p4: np.ndarray
    vertex: np.ndarray


def decay_event(state: MesonState, channel: DecayChannel, rng) -> list[Product]:
    """Decay products, isotropic (two-body) or flat in phase space (three-body)."""
    masses = channel.product_masses
    if not masses:
        return []
    if sum(masses) >= state.mass:
        raise ConfigError(f"channel {channel.id} is below threshold")
    if len(masses) == 2:
        rest = _two_body_rest(rng, state.mass, *masses)
    elif len(masses) == 3:
        rest = _three_body_rest(rng, state.mass, *masses)
    else:
        raise ConfigError(f"channel {channel.id}: only two- and three-body decays are supported")
    beta = np.asarray(state.p4[1:], dtype=float) / state.p4[0]
    lab = boost(np.array(rest), beta)
    return [Product(m, lab[i], np.array(state.vertex, dtype=float)) for i, m in enumerate(masses)]


def sample_decay_time(meson: MesonSpec, omega: float, rng) -> float:
    """Lab-frame decay time: exponential with mean (omega / M) tau."""
    if omega < meson.mass * (1.0 - 1e-12):
        raise ValueError("omega must be at least the meson mass")
    return float(rng.exponential(omega / meson.mass * meson.lifetime))


def entangled_phase(event: Event) -> tuple[complex, complex]:
    """Normalized source amplitudes (a1, a2).

    a1 a2* = |c| exp[i (p.b / hbar c + delta)] / (1 + |c|^2); the observable
    amplitude is a1 - a2, which vanishes at p = 0 for |c| = 1, delta = 0.
    Independent of the decay time and displacement.
    """
    pb = event.p[1] * event.b / HBARC
    norm = math.sqrt(1.0 + event.cmag**2)
    a1 = complex(math.cos(0.5 * pb), math.sin(0.5 * pb)) / norm
    ph2 = -(0.5 * pb + event.delta)
    a2 = event.cmag * complex(math.cos(ph2), math.sin(ph2)) / norm
    return a1, a2


# -- kinematics sampler --------------------------------------------------------


class KinematicsSampler:
    """Tabulated proposals and the rejection step for (y, b, pT, phi)."""

    def __init__(self, model: Photoproduction, config: GeneratorConfig, n_b: int = 4000, n_pt: int = 20001):
        self.model = model
        self.config = config
        self.meson = model.meson
        b_lo = model.beams.b_min if config.b_min is None else max(model.beams.b_min, config.b_min)
        y_ext = max(abs(config.y_min), abs(config.y_max))
        b_hi = default_b_max(model, y_ext)
        if config.b_max is not None:
            b_hi = min(b_hi, config.b_max)
        if not b_hi > b_lo:
            raise ConfigError("empty impact-parameter window")
        self.b_lo, self.b_hi = b_lo, b_hi

        if config.y_max == config.y_min:
            self.y_edges = np.array([config.y_min, config.y_min])
        else:
            self.y_edges = np.linspace(config.y_min, config.y_max, config.y_cells + 1)
        y_mid = 0.5 * (self.y_edges[1:] + self.y_edges[:-1])
        widths = np.diff(self.y_edges) if config.y_max > config.y_min else np.ones(1)
        self.b_grid = np.geomspace(b_lo, b_hi, n_b)
        cdfs, totals = [], []
        for ym in y_mid:
            w1, w2 = model.source_weights(self.b_grid, float(ym))
            dens = self.b_grid * (w1 + w2)
            cum = np.concatenate([[0.0], np.cumsum(0.5 * (dens[1:] + dens[:-1]) * np.diff(self.b_grid))])
            totals.append(cum[-1])
            cdfs.append(cum / cum[-1] if cum[-1] > 0 else cum)
        self.b_cdfs = cdfs
        cell_w = np.asarray(totals) * widths
        if not cell_w.sum() > 0:
            raise SamplingError("no production inside the kinematic window")
        self.cell_cdf = np.cumsum(cell_w) / cell_w.sum()

        self.pt_grid = np.linspace(config.pt_min, config.pt_max, n_pt)
        dens = self.pt_grid * np.asarray(form_factor(self.pt_grid, model.formfactor)) ** 2
        cum = np.concatenate([[0.0], np.cumsum(0.5 * (dens[1:] + dens[:-1]) * np.diff(self.pt_grid))])
        if not cum[-1] > 0:
            raise SamplingError("no production inside the pT window")
        self.pt_cdf = cum / cum[-1]

    @cached_property
    def pilot_acceptance(self) -> float:
        u = np.random.Generator(np.random.Philox(key=0xACCE, counter=[0, 0, 0, 0])).random((4000, 7))
        return float(self._evaluate(u)[0].mean())

    def check(self):
        acc = self.pilot_acceptance
        if acc < MIN_ACCEPTANCE:
            raise SamplingError(f"rejection acceptance {acc:.2e} below {MIN_ACCEPTANCE:g}; widen the kinematic window")
        return acc

    def _evaluate(self, u: np.ndarray):
        """Map uniforms (n, 7) to candidates; returns (accepted, y, b, pt, phi, source, cmag)."""
        cell = np.searchsorted(self.cell_cdf, u[:, 0], side="right")
        cell = np.minimum(cell, len(self.cell_cdf) - 1)
        lo, hi = self.y_edges[cell], self.y_edges[cell + 1]
        y = lo + (hi - lo) * u[:, 1]
        b = np.empty(len(u))
        for j in np.unique(cell):
            sel = cell == j
            b[sel] = np.interp(u[sel, 2], self.b_cdfs[j], self.b_grid)
        pt = np.interp(u[:, 3], self.pt_cdf, self.pt_grid)
        phi = 2.0 * math.pi * u[:, 4]
        k1 = 0.5 * self.meson.mass * np.exp(y)
        k2 = 0.5 * self.meson.mass * np.exp(-y)
        w1 = self.model.photon_rate(k1, b)
        w2 = self.model.photon_rate(k2, b)
        omega = np.sqrt(self.meson.mass**2 + pt**2) * np.cosh(y)
        e = eta(b, self.meson, omega, pt, self.config.decoherence)
        if self.config.localize_above_b is not None:
            e = np.where(b > self.config.localize_above_b, 1.0, e)
        cross = np.sqrt(w1 * w2)
        phase = pt * b * np.cos(phi) / HBARC + self.model.delta
        rate = w1 + w2 - 2.0 * cross * (1.0 - e) * np.cos(phase)
        envelope = (np.sqrt(w1) + np.sqrt(w2)) ** 2
        accepted = u[:, 6] * envelope < rate
        source = np.where(u[:, 5] * (w1 + w2) < w1, 1, 2)
        return accepted, y, b, pt, phi, source, np.sqrt(w2 / w1)

    def _accept_rows(self, u: np.ndarray, n: int):
        acc, y, b, pt, phi, src, cm = self._evaluate(u)
        out = []
        for n_i in range(n):
            rows = np.flatnonzero(acc[n_i * _BLOCK : (n_i + 1) * _BLOCK])
            if len(rows):
                r = n_i * _BLOCK + rows[0]
                out.append((float(y[r]), float(pt[r]), float(phi[r]), float(b[r]), int(src[r]), float(cm[r])))
            else:
                out.append(None)
        return out

    def sample_from(self, gen) -> tuple:
        """Draw blocks from ``gen`` until a candidate is accepted."""
        for _ in range(_MAX_BLOCKS):
            res = self._accept_rows(gen.random((_BLOCK, 7)), 1)[0]
            if res is not None:
                return res
        raise SamplingError(f"no candidate accepted after {_MAX_BLOCKS * _BLOCK} trials")

    def sample_indices(self, seed: int, indices) -> list[tuple]:
        """One accepted candidate per event index, each from its own kinematics stream."""
        indices = list(indices)
        if not indices:
            return []
        u = np.concatenate(
            [rng_mod.transient_stream(seed, i, rng_mod.KINEMATICS).random((_BLOCK, 7)) for i in indices]
        )
        out = self._accept_rows(u, len(indices))
        for n_i, i in enumerate(indices):
            if out[n_i] is None:
                gen = rng_mod.stream(seed, i, rng_mod.KINEMATICS)
                gen.random((_BLOCK, 7))  # already used above
                out[n_i] = self.sample_from(gen)
        return out


def sample_kinematics(sampler: KinematicsSampler, rng) -> tuple:
    """(y, pT, phi, b, source, |c|) for one event from the given stream."""
    return sampler.sample_from(rng)


# -- generation driver -----------------------------------------------------------


class EventGenerator:
    def __init__(self, model: Photoproduction, config: GeneratorConfig):
        self.model = model
        self.config = config
        self.meson = model.meson
        self.sampler = KinematicsSampler(model, config)
        channels = self.meson.channels_with_other()
        if config.channels is not None:
            unknown = set(config.channels) - {c.id for c in channels}
            if unknown:
                raise ConfigError(f"unknown channel(s) {sorted(unknown)} for {self.meson.name}")
            channels = tuple(c for c in channels if c.id in config.channels)
        for ch in channels:
            if ch.product_masses and ch.threshold >= self.meson.mass:
                raise ConfigError(f"channel {ch.id} is below threshold")
        self.channels = channels
        fr = np.array([c.fraction for c in channels])
        self.channel_cdf = np.cumsum(fr) / fr.sum()

    def choose_channel(self, index: int) -> DecayChannel:
        u = rng_mod.transient_stream(self.config.seed, index, rng_mod.CHANNEL).random()
        return self.channels[min(int(np.searchsorted(self.channel_cdf, u, side="right")), len(self.channels) - 1)]

    def _chunk(self, indices: range) -> list[Event]:
        seed = self.config.seed
        kin = self.sampler.sample_indices(seed, indices)
        events = []
        M = self.meson.mass
        for i, (y, pt, phi, b, src, cmag) in zip(indices, kin):
            mt = math.sqrt(M * M + pt * pt)
            omega = mt * math.cosh(y)
            p = np.array([pt * math.sin(phi), pt * math.cos(phi), mt * math.sinh(y)])
            t_lab = sample_decay_time(self.meson, omega, rng_mod.transient_stream(seed, i, rng_mod.DECAY_TIME))
            t_proper = t_lab * M / omega
            x_decay = p / M * C_LIGHT * t_proper
            ch = self.choose_channel(i)
            ev = Event(i, y, pt, phi, b, src, cmag, self.model.delta, omega, p, t_lab, t_proper, x_decay, ch.id)
            state = MesonState(M, ev.p4, ev.vertex)
            ev.products = decay_event(state, ch, rng_mod.transient_stream(seed, i, rng_mod.DECAY))
            ev.a1, ev.a2 = entangled_phase(ev)
            events.append(ev)
        return events

    def generate(self, threads: int = 1, start: int = 0, n: int | None = None) -> list[Event]:
        n = self.config.n_events if n is None else n
        if n == 0:
            return []
        self.sampler.check()
        size = self.config.chunk_size
        chunks = [range(s, min(s + size, start + n)) for s in range(start, start + n, size)]
        if threads <= 1:
            parts = [self._chunk(c) for c in chunks]
        else:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                parts = list(pool.map(self._chunk, chunks))
        return [ev for part in parts for ev in part]


def generate_events(model: Photoproduction, config: GeneratorConfig, threads: int = 1) -> list[Event]:
    return EventGenerator(model, config).generate(threads)


# -- output ------------------------------------------------------------------------

MAX_CSV_PRODUCTS = 3


def events_to_ndjson(events: list[Event], header: dict | None = None) -> str:
    """One JSON object per line; an optional leading ``{"header": ...}`` record."""
    lines = [json.dumps({"header": header}, separators=(",", ":"), sort_keys=True)] if header is not None else []
    lines += [json.dumps(ev.to_dict(), separators=(",", ":")) for ev in events]
    return "".join(line + "\n" for line in lines)


def events_from_ndjson(text: str) -> list[Event]:
    out = []
    for line in text.splitlines():
        if not line.strip():
            continue
        rec = json.loads(line)
        if "header" not in rec:
            out.append(Event.from_dict(rec))
    return out


def csv_header() -> list[str]:
    cols = ["evt", "y", "pt_mev", "phi", "b_fm", "tdec_s", "channel"]
    for i in range(1, MAX_CSV_PRODUCTS + 1):
        cols += [f"prod_{i}_px", f"prod_{i}_py", f"prod_{i}_pz", f"prod_{i}_E"]
    return cols


def events_to_csv(events: list[Event], comment: str | None = None) -> str:
    buf = io.StringIO()
    if comment is not None:
        buf.write(f"# {comment}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(csv_header())
    for ev in events:
        row = [ev.index, repr(ev.y), repr(ev.pt), repr(ev.phi), repr(ev.b), repr(ev.t_decay), ev.channel]
        for i in range(MAX_CSV_PRODUCTS):
            if i < len(ev.products):
                e, px, py, pz = (float(v) for v in ev.products[i].p4)
                row += [repr(px), repr(py), repr(pz), repr(e)]
            else:
                row += ["", "", "", ""]
        w.writerow(row)
    return buf.getvalue()
