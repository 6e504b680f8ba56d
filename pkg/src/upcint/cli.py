"""Command-line entry point: ``upcint {spectrum,events,gedanken,scan}``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import asdict, replace
from pathlib import Path

from . import __version__
from .config import ConfigParseError, RunConfig
from .constants import BeamConfig
from .events import EventGenerator, SamplingError, events_from_ndjson, events_to_csv, events_to_ndjson
from .gedanken import dual_detector_protocol, pointing_summary
from .interference import DecoherenceModel
from .photoproduction import Photoproduction
from .spectrum import QuadratureError, pt_spectrum

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_QUADRATURE = 3
EXIT_SAMPLING = 4

TOOL = f"upcint {__version__}"


def _stamp(cfg: RunConfig) -> str:
    return f"tool={TOOL} config_sha256={cfg.hash}"


def _sidecar(cfg: RunConfig, kind: str, **extra) -> str:
    meta = {"tool": TOOL, "config_sha256": cfg.hash, "kind": kind, "config": cfg.values, **extra}
    return json.dumps(meta, indent=2, sort_keys=True) + "\n"


def _write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(text)


def run_spectrum(cfg: RunConfig, out: Path, threads: int = 1, normalize_fig2: bool = False) -> list[Path]:
    model = cfg.model()
    table = pt_spectrum(
        model,
        cfg.float("y"),
        cfg.decoherence(),
        cfg.grid(),
        normalize_fig2=normalize_fig2,
        threads=threads,
        rtol=cfg.float("quad.rtol"),
    )
    csv_path, meta_path = out / "spectrum.csv", out / "spectrum.json"
    _write(csv_path, table.to_csv(_stamp(cfg)))
    _write(
        meta_path,
        _sidecar(
            cfg,
            "spectrum",
            normalized=normalize_fig2,
            model=table.model_label,
            quad_error=table.quad_error,
            b_min_fm=table.meta["b_min"],
            b_max_fm=table.meta["b_max"],
            dip_depth=table.dip_depth(),
        ),
    )
    return [csv_path, meta_path]


def run_events(cfg: RunConfig, out: Path, threads: int = 1, seed: int | None = None) -> list[Path]:
    gcfg = cfg.generator_config(seed)
    gen = EventGenerator(cfg.model(), gcfg)
    events = gen.generate(threads)
    fmt = cfg.raw("generator.format")
    header = {"tool": TOOL, "config_sha256": cfg.hash, "seed": gcfg.seed, "n_events": gcfg.n_events}
    if fmt == "csv":
        path = out / "events.csv"
        _write(path, events_to_csv(events, _stamp(cfg) + f" seed={gcfg.seed}"))
    else:
        path = out / "events.ndjson"
        _write(path, events_to_ndjson(events, header))
    meta = out / "events.json"
    acceptance = gen.sampler.pilot_acceptance if gcfg.n_events else None
    _write(meta, _sidecar(cfg, "events", seed=gcfg.seed, n_events=len(events), format=fmt, pilot_acceptance=acceptance))
    return [path, meta]


def run_gedanken(
    cfg: RunConfig, out: Path, threads: int = 1, seed: int | None = None, events_path: str | None = None
) -> list[Path]:
    layout = cfg.layout()
    if layout is None:
        raise cfg._err("detector.radius_fm", "the gedanken protocols need a detector layout")
    model = cfg.model()
    gcfg = cfg.generator_config(seed)
    events = events_from_ndjson(Path(events_path).read_text()) if events_path else None
    report = dual_detector_protocol(
        model,
        gcfg.n_events,
        cfg.raw("gedanken.scenario"),
        layout,
        gcfg.seed,
        decoherence=gcfg.decoherence,
        config=gcfg,
        pt_cut=cfg.float("gedanken.pt_cut_mev", optional=True),
        threads=threads,
        events=events,
    )
    if events is None:
        events = EventGenerator(model, replace(gcfg, localize_above_b=None)).generate(threads)
    ps = pointing_summary(events, layout, cfg.float("gedanken.perp_cut"))
    payload = json.loads(report.to_json())
    payload["pointing"] = asdict(ps)
    payload["tool"] = TOOL
    payload["config_sha256"] = cfg.hash
    text = report.to_text() + (
        f"pointing            median miss {ps.median_miss:.3f} fm over {ps.n_selected} perpendicular decays,"
        f" accuracy {ps.accuracy:.4f}\n"
        f"# {_stamp(cfg)}\n"
    )
    jpath, tpath = out / "gedanken_report.json", out / "gedanken_report.txt"
    _write(jpath, json.dumps(payload, indent=2, sort_keys=True) + "\n")
    _write(tpath, text)
    return [jpath, tpath]


SCAN_COLUMNS = ("point", "parameter", "value", "dip_depth", "quad_error", "file")


def run_scan(cfg: RunConfig, out: Path, threads: int = 1, normalize_fig2: bool = False) -> list[Path]:
    param = cfg.raw("scan.parameter")
    base = cfg.model()
    grid = cfg.grid()
    rtol = cfg.float("quad.rtol")
    rows, paths = [], []
    for i, point in enumerate(cfg.scan_points()):
        model, y, deco = base, cfg.float("y"), cfg.decoherence()
        if param == "eta":
            deco = DecoherenceModel.fixed(point)
            label = repr(point)
        elif param == "y":
            y = point
            label = repr(point)
        else:
            beams = BeamConfig(base.beams.nucleus, base.beams.sqrt_s_nn, b_min=point[0], b_max=point[1])
            model = Photoproduction(beams, base.meson, base.xsec, base.formfactor)
            label = f"{point[0]!r}:{point[1]!r}"
        table = pt_spectrum(model, y, deco, grid, normalize_fig2=normalize_fig2, threads=threads, rtol=rtol)
        path = out / f"scan_{param}_{i:03d}.csv"
        _write(path, table.to_csv(_stamp(cfg) + f" {param}={label}"))
        paths.append(path)
        rows.append((i, param, label, f"{table.dip_depth():.12e}", f"{table.quad_error:.3e}", path.name))
    buf = io.StringIO()
    buf.write(f"# {_stamp(cfg)}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SCAN_COLUMNS)
    w.writerows(rows)
    summary = out / "scan_summary.csv"
    _write(summary, buf.getvalue())
    return [summary, *paths]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="run configuration file")
    common.add_argument("--seed", type=int, help="override generator.seed")
    common.add_argument("--threads", type=int, default=1, help="worker threads")
    common.add_argument("--out", metavar="DIR", help="output directory")
    common.add_argument("--normalize-fig2", action="store_true", help="divide spectra by the pT = 0 reference value")

    parser = argparse.ArgumentParser(prog="upcint", description=__doc__)
    parser.add_argument("--version", action="version", version=TOOL)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("spectrum", parents=[common], help="b-integrated pT spectrum")
    sub.add_parser("events", parents=[common], help="generate events")
    g = sub.add_parser("gedanken", parents=[common], help="pointing and dual-detector protocol")
    g.add_argument("--events", metavar="PATH", help="use events from an NDJSON file instead of generating")
    sub.add_parser("scan", parents=[common], help="spectra over eta, b window or y")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.threads < 1:
            raise ConfigParseError("--threads must be at least 1")
        if args.seed is not None and not 0 <= args.seed < 2**64:
            raise ConfigParseError("--seed must be a 64-bit unsigned integer")
        cfg = RunConfig.load(args.config)
        if args.seed is not None:
            cfg = cfg.with_overrides(**{"generator.seed": str(args.seed)})
        out = cfg.out_dir(args.out)
        if args.command == "spectrum":
            paths = run_spectrum(cfg, out, args.threads, args.normalize_fig2)
        elif args.command == "events":
            paths = run_events(cfg, out, args.threads, args.seed)
        elif args.command == "gedanken":
            paths = run_gedanken(cfg, out, args.threads, args.seed, args.events)
        else:
            paths = run_scan(cfg, out, args.threads, args.normalize_fig2)
    except ConfigParseError as exc:
        print(f"upcint: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except QuadratureError as exc:
        print(f"upcint: quadrature did not converge: {exc}", file=sys.stderr)
        return EXIT_QUADRATURE
    except SamplingError as exc:
        print(f"upcint: sampling failed: {exc}", file=sys.stderr)
        return EXIT_SAMPLING
    except ValueError as exc:
        print(f"upcint: invalid input: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    for p in paths:
        print(p)
    return EXIT_OK
