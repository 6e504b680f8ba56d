"""Run configuration: a flat ``key = value`` file with dotted keys.

Blank lines and ``#`` comments are ignored.  Every key has a default (see
``DEFAULTS``); unknown keys are an error.  Empty values mean "automatic"
where the default is empty.
"""

from __future__ import annotations

import hashlib
import math
import os
from dataclasses import dataclass
from pathlib import Path

from .constants import DEFAULT_CATALOG, BeamConfig, Catalog, load_catalog
from .events import GeneratorConfig
from .gedanken import SCENARIOS, DetectorLayout
from .interference import VARIANTS, DecoherenceModel
from .photoproduction import HARDSPHERE_YUKAWA, WOODS_SAXON, Photoproduction
from .spectrum import QUAD_RTOL, PtGrid

OUT_DIR_ENV = "UPCINT_OUT_DIR"

COLLIDERS = {"rhic": ("Au", 200.0), "lhc": ("Pb", 5500.0)}

# key: (default, description)
DEFAULTS: dict[str, tuple[str, str]] = {
    "beam.collider": ("rhic", "rhic (Au+Au, 200 GeV) or lhc (Pb+Pb, 5.5 TeV)"),
    "beam.nucleus": ("", "nucleus name from the catalog; empty = collider default"),
    "beam.sqrt_s_nn_gev": ("", "per-nucleon-pair energy in GeV; empty = collider default"),
    "beam.b_min_fm": ("", "lower impact parameter; empty = 2 R_A"),
    "beam.b_max_fm": ("", "upper impact parameter; empty = ten flux cutoff lengths"),
    "catalog.path": ("", "extra catalog file merged over the built-in one"),
    "meson": ("rho0", "vector meson id"),
    "y": ("0.0", "rapidity for spectra"),
    "model": ("full_coherence", "decoherence variant: " + ", ".join(VARIANTS)),
    "model.eta": ("0.0", "eta for the fixed variant"),
    "formfactor.model": (HARDSPHERE_YUKAWA, f"{HARDSPHERE_YUKAWA} or {WOODS_SAXON}"),
    "sigma.pomeron_norm": ("", "X in sigma_gp = X W^eps + Y W^-eta [mb]; empty = meson default"),
    "sigma.pomeron_eps": ("", "eps; empty = meson default"),
    "sigma.meson_norm": ("", "Y [mb]; empty = meson default"),
    "sigma.meson_eta": ("", "eta exponent; empty = meson default"),
    "phase.delta_rad": ("0.0", "phase delta of the amplitude ratio c"),
    "grid.pt_min_mev": ("0.0", "spectrum pT range lower edge"),
    "grid.pt_max_mev": ("200.0", "spectrum pT range upper edge"),
    "grid.n_bins": ("200", "number of pT bins (evaluated at centres)"),
    "quad.rtol": (repr(QUAD_RTOL), "relative accuracy of the b integral"),
    "generator.seed": ("1", "64-bit seed"),
    "generator.n_events": ("10000", "number of events"),
    "generator.y_min": ("0.0", "rapidity window"),
    "generator.y_max": ("0.0", "rapidity window"),
    "generator.pt_min_mev": ("0.0", "pT window"),
    "generator.pt_max_mev": ("500.0", "pT window"),
    "generator.b_min_fm": ("", "extra impact-parameter cut; empty = beam window"),
    "generator.b_max_fm": ("", "extra impact-parameter cut; empty = beam window"),
    "generator.channels": ("", "comma-separated channel ids; empty = all"),
    "generator.format": ("ndjson", "event file format: ndjson or csv"),
    "detector.radius_fm": ("500.0", "detector surface radius L; required by gedanken"),
    "detector.position_resolution_fm": ("0.0", "position resolution"),
    "detector.time_resolution_s": ("inf", "time resolution; inf = no timing"),
    "gedanken.scenario": ("collapse_at_measurement", " or ".join(SCENARIOS)),
    "gedanken.pt_cut_mev": ("", "pT cut for the dip statistic; empty = 2 hbar c / median b"),
    "gedanken.perp_cut": ("0.26", "|cos| cut selecting products perpendicular to b for the miss median"),
    "scan.parameter": ("eta", "eta, b_window or y"),
    "scan.values": ("0,0.5,1", "comma list; b_window entries are lo:hi in fm"),
    "output.dir": ("out", f"output directory (overridden by ${OUT_DIR_ENV})"),
}


class ConfigParseError(ValueError):
    def __init__(self, message: str, line: int | None = None, key: str | None = None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if key is not None:
            where.append(f"key {key!r}")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)
        self.line = line
        self.key = key


def parse_config(text: str) -> dict[str, str]:
    values = {k: v for k, (v, _) in DEFAULTS.items()}
    seen: dict[str, int] = {}
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigParseError("expected 'key = value'", n)
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in DEFAULTS:
            raise ConfigParseError("unknown key", n, key)
        if key in seen:
            raise ConfigParseError(f"duplicate key (first set on line {seen[key]})", n, key)
        seen[key] = n
        values[key] = value
    return values


@dataclass
class RunConfig:
    values: dict[str, str]
    lines: dict[str, int]
    text: str = ""

    @classmethod
    def from_text(cls, text: str) -> RunConfig:
        values = parse_config(text)
        lines = {}
        for n, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0]
            if "=" in line:
                lines[line.split("=", 1)[0].strip()] = n
        cfg = cls(values, lines, text)
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path: str | Path | None) -> RunConfig:
        if path is None:
            return cls.from_text("")
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigParseError(f"cannot read config: {exc}") from exc
        return cls.from_text(text)

    def with_overrides(self, **over: str) -> RunConfig:
        vals = dict(self.values)
        for k, v in over.items():
            if k not in DEFAULTS:
                raise ConfigParseError("unknown key", key=k)
            vals[k] = v
        cfg = RunConfig(vals, self.lines, self.text)
        cfg.validate()
        return cfg

    # -- typed access --------------------------------------------------------

    def _err(self, key, msg):
        return ConfigParseError(msg, self.lines.get(key), key)

    def raw(self, key: str) -> str:
        return self.values[key]

    def float(self, key: str, optional: bool = False):
        v = self.values[key]
        if optional and v == "":
            return None
        try:
            out = float(v)
        except ValueError:
            raise self._err(key, f"expected a number, got {v!r}") from None
        if math.isnan(out):
            raise self._err(key, "NaN is not allowed")
        return out

    def int(self, key: str) -> int:
        v = self.values[key]
        try:
            return int(v)
        except ValueError:
            raise self._err(key, f"expected an integer, got {v!r}") from None

    def choice(self, key: str, options) -> str:
        v = self.values[key]
        if v not in options:
            raise self._err(key, f"expected one of {', '.join(options)}, got {v!r}")
        return v

    def floats(self, key: str) -> list[float]:
        try:
            return [float(s) for s in self.values[key].split(",") if s.strip()]
        except ValueError:
            raise self._err(key, "expected a comma-separated list of numbers") from None

    # -- derived objects -------------------------------------------------------

    def validate(self):
        """Build every derived object once so that errors surface at load time."""
        self.catalog()
        self.model()
        self.decoherence()
        self.grid()
        self.generator_config()
        self.layout()
        self.choice("gedanken.scenario", SCENARIOS)
        self.choice("generator.format", ("ndjson", "csv"))
        self.scan_points()
        self.float("quad.rtol")
        self.float("y")
        self.float("gedanken.pt_cut_mev", optional=True)
        self.float("gedanken.perp_cut")

    def catalog(self) -> Catalog:
        path = self.values["catalog.path"]
        if not path:
            return DEFAULT_CATALOG
        try:
            return load_catalog(path)
        except (OSError, ValueError) as exc:
            raise self._err("catalog.path", str(exc)) from None

    def beams(self) -> BeamConfig:
        collider = self.choice("beam.collider", tuple(COLLIDERS))
        nucleus_name, sqrt_s = COLLIDERS[collider]
        nucleus_name = self.values["beam.nucleus"] or nucleus_name
        sqrt_s = self.float("beam.sqrt_s_nn_gev", optional=True) or sqrt_s
        try:
            nucleus = self.catalog().nucleus(nucleus_name)
        except KeyError:
            raise self._err("beam.nucleus", f"unknown nucleus {nucleus_name!r}") from None
        try:
            return BeamConfig(
                nucleus,
                sqrt_s,
                b_min=self.float("beam.b_min_fm", optional=True),
                b_max=self.float("beam.b_max_fm", optional=True),
            )
        except ValueError as exc:
            raise self._err("beam.b_min_fm", str(exc)) from None

    def meson(self):
        try:
            return self.catalog().meson(self.values["meson"])
        except KeyError:
            raise self._err("meson", f"unknown meson {self.values['meson']!r}") from None

    def model(self) -> Photoproduction:
        over = {}
        for key, name in (
            ("sigma.pomeron_norm", "pomeron_norm"),
            ("sigma.pomeron_eps", "pomeron_eps"),
            ("sigma.meson_norm", "meson_norm"),
            ("sigma.meson_eta", "meson_eta"),
        ):
            v = self.float(key, optional=True)
            if v is not None:
                over[name] = v
        over["phase_delta"] = self.float("phase.delta_rad")
        ff = self.choice("formfactor.model", (HARDSPHERE_YUKAWA, WOODS_SAXON))
        return Photoproduction.default(self.beams(), self.meson(), ff, **over)

    def decoherence(self, eta_value: float | None = None) -> DecoherenceModel:
        variant = self.choice("model", VARIANTS)
        value = self.float("model.eta") if eta_value is None else eta_value
        try:
            return DecoherenceModel(variant, value)
        except ValueError as exc:
            raise self._err("model.eta", str(exc)) from None

    def grid(self) -> PtGrid:
        try:
            return PtGrid(self.float("grid.pt_min_mev"), self.float("grid.pt_max_mev"), self.int("grid.n_bins"))
        except ValueError as exc:
            raise self._err("grid.n_bins", str(exc)) from None

    def generator_config(self, seed: int | None = None) -> GeneratorConfig:
        channels = tuple(s.strip() for s in self.values["generator.channels"].split(",") if s.strip()) or None
        try:
            return GeneratorConfig(
                seed=self.int("generator.seed") if seed is None else seed,
                n_events=self.int("generator.n_events"),
                decoherence=self.decoherence(),
                y_min=self.float("generator.y_min"),
                y_max=self.float("generator.y_max"),
                pt_min=self.float("generator.pt_min_mev"),
                pt_max=self.float("generator.pt_max_mev"),
                b_min=self.float("generator.b_min_fm", optional=True),
                b_max=self.float("generator.b_max_fm", optional=True),
                channels=channels,
            )
        except ValueError as exc:
            raise self._err("generator.n_events", str(exc)) from None

    def layout(self) -> DetectorLayout | None:
        if self.values["detector.radius_fm"] == "":
            return None
        try:
            return DetectorLayout(
                self.float("detector.radius_fm"),
                self.float("detector.position_resolution_fm"),
                self.float("detector.time_resolution_s"),
            )
        except ValueError as exc:
            raise self._err("detector.radius_fm", str(exc)) from None

    def scan_points(self) -> list:
        param = self.choice("scan.parameter", ("eta", "b_window", "y"))
        key = "scan.values"
        if param == "b_window":
            out = []
            for item in self.values[key].split(","):
                try:
                    lo, hi = (float(s) for s in item.split(":"))
                except ValueError:
                    raise self._err(key, f"b_window entries are lo:hi, got {item!r}") from None
                if not hi > lo:
                    raise self._err(key, f"empty b window {item!r}")
                out.append((lo, hi))
            return out
        vals = self.floats(key)
        if not vals:
            raise self._err(key, "no scan values")
        if param == "eta" and any(not 0.0 <= v <= 1.0 for v in vals):
            raise self._err(key, "eta values must lie in [0, 1]")
        return vals

    def out_dir(self, cli_value: str | None = None) -> Path:
        env = os.environ.get(OUT_DIR_ENV)
        return Path(cli_value or env or self.values["output.dir"])

    def canonical(self) -> str:
        return "".join(f"{k} = {self.values[k]}\n" for k in sorted(self.values))

    @property
    def hash(self) -> str:
        """sha256 of the fully defaulted configuration (independent of layout and comments)."""
        return hashlib.sha256(self.canonical().encode()).hexdigest()


def defaults_table() -> str:
    """Markdown table of every key, its default and meaning."""
    rows = ["| key | default | meaning |", "|---|---|---|"]
    rows += [f"| `{k}` | `{v}` | {d} |" for k, (v, d) in DEFAULTS.items()]
    return "\n".join(rows) + "\n"
