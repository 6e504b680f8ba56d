"""Physical constants, particle/nucleus catalogs and kinematics helpers.

Units throughout the package: energies and momenta in MeV, lengths in fm,
times in seconds.  Beam energies (``sqrt_s_nn``) are the one exception and
are quoted in GeV per nucleon pair.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path


@dataclass(frozen=True)
class PhysicalConstants:
    hbar_c: float = 197.3269804  # MeV fm
    alpha_em: float = 1.0 / 137.035999
    c_light: float = 2.99792458e23  # fm / s


CONST = PhysicalConstants()
HBARC = CONST.hbar_c
ALPHA_EM = CONST.alpha_em
C_LIGHT = CONST.c_light

# atomic mass unit; the convention behind "GeV per nucleon" is not pinned down
NUCLEON_MASS_GEV = 0.9315
NUCLEON_MASS_MEV = 1000.0 * NUCLEON_MASS_GEV


class CatalogError(ValueError):
    """Malformed or inconsistent catalog entry."""


@dataclass(frozen=True)
class NucleusSpec:
    name: str
    Z: int
    A: int
    R_A: float
    yukawa_range: float = 0.7
    gamma_beam: float = 1.0

    def __post_init__(self):
        if self.Z < 1 or self.A < self.Z:
            raise CatalogError(f"{self.name}: need Z >= 1 and A >= Z (got Z={self.Z}, A={self.A})")
        if not self.R_A > 0:
            raise CatalogError(f"{self.name}: radius must be positive")
        if self.yukawa_range < 0:
            raise CatalogError(f"{self.name}: Yukawa range must be non-negative")
        if not self.gamma_beam >= 1.0:
            raise CatalogError(f"{self.name}: gamma_beam must be >= 1")


@dataclass(frozen=True)
class DecayChannel:
    id: str
    fraction: float
    product_masses: tuple[float, ...]

    @property
    def threshold(self) -> float:
        return sum(self.product_masses)


@dataclass(frozen=True)
class MesonSpec:
    name: str
    mass: float
    lifetime: float
    decay_channels: tuple[DecayChannel, ...] = field(default=())

    def __post_init__(self):
        if not self.mass > 0:
            raise CatalogError(f"{self.name}: mass must be positive")
        if self.lifetime < 0:
            raise CatalogError(f"{self.name}: lifetime must be non-negative")
        total = 0.0
        for ch in self.decay_channels:
            if not 0.0 < ch.fraction <= 1.0:
                raise CatalogError(f"{self.name}/{ch.id}: branching fraction outside (0, 1]")
            if ch.product_masses and ch.threshold >= self.mass:
                raise CatalogError(f"{self.name}/{ch.id}: channel is below threshold")
            total += ch.fraction
        if total > 1.0 + 1e-9:
            raise CatalogError(f"{self.name}: branching fractions sum to {total:.6g} > 1")

    @property
    def ctau(self) -> float:
        """Proper decay length c*tau in fm."""
        return C_LIGHT * self.lifetime

    @property
    def other_fraction(self) -> float:
        return max(0.0, 1.0 - sum(ch.fraction for ch in self.decay_channels))

    def channels_with_other(self) -> tuple[DecayChannel, ...]:
        """Catalog channels plus the lumped remainder, if any."""
        rest = self.other_fraction
        if rest > 1e-12:
            return self.decay_channels + (DecayChannel("other", rest, ()),)
        return self.decay_channels

    def channel(self, channel_id: str) -> DecayChannel:
        for ch in self.channels_with_other():
            if ch.id == channel_id:
                return ch
        raise KeyError(f"{self.name} has no decay channel {channel_id!r}")


def lorentz_gamma(sqrt_s_nn: float, nucleon_mass: float = NUCLEON_MASS_GEV) -> float:
    """Per-beam Lorentz factor for symmetric collider beams."""
    if not sqrt_s_nn >= 2.0 * nucleon_mass:
        raise ValueError(f"sqrt_s_NN = {sqrt_s_nn} GeV is below the 2 m_N threshold")
    return sqrt_s_nn / (2.0 * nucleon_mass)


@dataclass(frozen=True)
class BeamConfig:
    """Symmetric collider beams plus the impact-parameter window.

    ``b_max=None`` lets the spectrum engine choose the upper limit from the
    photon-flux cutoff.
    """

    nucleus: NucleusSpec
    sqrt_s_nn: float
    b_min: float | None = None
    b_max: float | None = None
    hadronic_exclusion: bool = True

    def __post_init__(self):
        gamma = lorentz_gamma(self.sqrt_s_nn)
        if self.nucleus.gamma_beam != gamma:
            object.__setattr__(self, "nucleus", replace(self.nucleus, gamma_beam=gamma))
        if self.b_min is None:
            object.__setattr__(self, "b_min", 2.0 * self.nucleus.R_A if self.hadronic_exclusion else 0.1)
        if self.hadronic_exclusion and self.b_min < 2.0 * self.nucleus.R_A - 1e-12:
            raise ValueError(f"b_min = {self.b_min} fm is inside 2 R_A with hadronic exclusion on")
        if self.b_min < 0.1:
            raise ValueError("b_min below 0.1 fm is outside the flux model")
        if self.b_max is not None and not self.b_max > self.b_min:
            raise ValueError("empty impact-parameter window")

    @property
    def gamma(self) -> float:
        return self.nucleus.gamma_beam


def decay_distance(meson: MesonSpec, nucleus: NucleusSpec) -> float:
    """Median decay length in fm for a meson at typical p_T = 2 hbar c / R_A and y = 0."""
    return 2.0 * HBARC * meson.ctau / (nucleus.R_A * meson.mass)


def photon_energies_for_rapidity(y: float, mass: float) -> tuple[float, float]:
    """Photon energies (k1, k2) that produce a meson at rapidity y from either beam."""
    if not math.isfinite(y):
        raise ValueError("rapidity must be finite")
    half = 0.5 * mass
    return half * math.exp(y), half * math.exp(-y)


# -- catalog file ------------------------------------------------------------


def _parse_channel(text: str, where: str) -> DecayChannel:
    parts = text.split(":")
    if len(parts) != 3:
        raise CatalogError(f"{where}: channel must look like id:fraction:m1,m2,...")
    cid, frac, masses = (p.strip() for p in parts)
    try:
        fraction = float(frac)
        product_masses = tuple(float(m) for m in masses.split(",") if m.strip())
    except ValueError as exc:
        raise CatalogError(f"{where}: {exc}") from None
    if len(product_masses) < 2:
        raise CatalogError(f"{where}: a channel needs at least two products")
    return DecayChannel(cid, fraction, product_masses)


def _blocks(text: str):
    block, start = [], None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            if block:
                yield start, block
                block = []
            continue
        if "=" not in line:
            raise CatalogError(f"line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if not block:
            start = lineno
        block.append((lineno, key, value))
    if block:
        yield start, block


@dataclass(frozen=True)
class Catalog:
    mesons: dict[str, MesonSpec]
    nuclei: dict[str, NucleusSpec]

    def meson(self, name: str) -> MesonSpec:
        try:
            return self.mesons[name]
        except KeyError:
            raise KeyError(f"unknown meson {name!r}; known: {sorted(self.mesons)}") from None

    def nucleus(self, name: str) -> NucleusSpec:
        try:
            return self.nuclei[name]
        except KeyError:
            raise KeyError(f"unknown nucleus {name!r}; known: {sorted(self.nuclei)}") from None

    def merged(self, other: Catalog) -> Catalog:
        return Catalog({**self.mesons, **other.mesons}, {**self.nuclei, **other.nuclei})


def parse_catalog(text: str) -> Catalog:
    mesons, nuclei = {}, {}
    for start, block in _blocks(text):
        fields, channels = {}, []
        for lineno, key, value in block:
            if key == "channel":
                channels.append(_parse_channel(value, f"line {lineno}"))
            elif key in fields:
                raise CatalogError(f"line {lineno}: duplicate key {key!r}")
            else:
                fields[key] = value
        kind = fields.pop("kind", None)
        try:
            if kind == "meson":
                m = MesonSpec(
                    name=fields["name"],
                    mass=float(fields["mass_mev"]),
                    lifetime=float(fields["lifetime_s"]),
                    decay_channels=tuple(channels),
                )
                mesons[m.name] = m
            elif kind == "nucleus":
                n = NucleusSpec(
                    name=fields["name"],
                    Z=int(fields["Z"]),
                    A=int(fields["A"]),
                    R_A=float(fields["radius_fm"]),
                    yukawa_range=float(fields.get("yukawa_fm", 0.7)),
                )
                nuclei[n.name] = n
            else:
                raise CatalogError(f"block at line {start}: kind must be 'meson' or 'nucleus'")
        except KeyError as exc:
            raise CatalogError(f"block at line {start}: missing key {exc}") from None
        except ValueError as exc:
            if isinstance(exc, CatalogError):
                raise
            raise CatalogError(f"block at line {start}: {exc}") from None
    return Catalog(mesons, nuclei)


def load_catalog(path: str | Path | None = None) -> Catalog:
    """Load the shipped catalog, optionally extended by a user file."""
    text = resources.files("upcint").joinpath("data/catalog.txt").read_text()
    base = parse_catalog(text)
    if path is None:
        return base
    return base.merged(parse_catalog(Path(path).read_text()))


DEFAULT_CATALOG = load_catalog()


def rhic_beams(**kw) -> BeamConfig:
    """Au+Au at sqrt(s_NN) = 200 GeV."""
    return BeamConfig(DEFAULT_CATALOG.nucleus("Au"), 200.0, **kw)


def lhc_beams(**kw) -> BeamConfig:
    """Pb+Pb at sqrt(s_NN) = 5.5 TeV."""
    return BeamConfig(DEFAULT_CATALOG.nucleus("Pb"), 5500.0, **kw)
