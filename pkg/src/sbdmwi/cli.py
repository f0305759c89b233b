"""Command-line entry point: ``sbdmwi simulate|invert|metrics|export``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from sbdmwi.errors import ImagingError
from sbdmwi.io.config import load_config, parse_length
from sbdmwi.io.formats import read_gridmap, read_meas
from sbdmwi.io.pipeline import (
    compute_metrics,
    export_map,
    invert,
    read_keyvalue,
    simulate,
    write_inversion,
    write_keyvalue,
    write_simulation,
)

log = logging.getLogger("sbdmwi")


def _config(args):
    cfg = load_config(args.config) if getattr(args, "config", None) else load_config()
    return cfg.override(seed=getattr(args, "seed", None), method=getattr(args, "method", None), out=getattr(args, "out", None))


def cmd_simulate(args) -> int:
    cfg = _config(args)
    sim = simulate(cfg)
    paths = write_simulation(sim, cfg.out)
    for name, p in paths.items():
        print(f"{name}: {p}")
    return 0


def cmd_invert(args) -> int:
    cfg = _config(args)
    meas = read_meas(args.meas)
    reference, ref_freq = read_gridmap(args.reference)
    report, recon = invert(cfg, meas, reference, reference_frequency=ref_freq)
    paths = write_inversion(report, recon, meas.frequency, cfg.out)
    print(f"best cost {report.best_cost:.6g} after {report.full_wave} full-wave evaluations")
    for name, p in paths.items():
        print(f"{name}: {p}")
    return 0


def cmd_metrics(args) -> int:
    cfg = _config(args)
    recon, _ = read_gridmap(args.reconstructed)
    reference, _ = read_gridmap(args.reference)
    actual, _ = read_gridmap(args.actual)
    truth = read_keyvalue(args.truth)
    if truth.get("tumor", "none") == "none":
        raise ImagingError("truth file describes no tumor")
    summary = read_keyvalue(args.summary) if args.summary else None
    chi = parse_length(args.chi) if args.chi else cfg.chi
    metrics = compute_metrics(cfg.setup, recon, reference, actual, truth, chi, summary=summary)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    write_keyvalue(out / "metrics.txt", metrics)
    for k, v in metrics.items():
        print(f"{k} = {v}")
    return 0


def cmd_export(args) -> int:
    for p in export_map(args.gridmap, args.out or "."):
        print(p)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sbdmwi", description="Differential microwave breast imaging.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, method=False):
        p.add_argument("--config", help="run configuration file")
        p.add_argument("--seed", type=int, help="random seed (overrides the config)")
        p.add_argument("--out", help="output directory (overrides the config)")
        if method:
            p.add_argument("--method", choices=("sbd", "ea"), help="optimiser (overrides the config)")

    p = sub.add_parser("simulate", help="synthesise differential measurements and truth maps")
    common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("invert", help="reconstruct a tumor from differential measurements")
    common(p, method=True)
    p.add_argument("meas", help="measurement file")
    p.add_argument("reference", help="reference grid-map file (inverse grid)")
    p.set_defaults(func=cmd_invert)

    p = sub.add_parser("metrics", help="error and detection metrics of a reconstruction")
    common(p)
    p.add_argument("reconstructed")
    p.add_argument("reference")
    p.add_argument("actual")
    p.add_argument("--truth", required=True, help="truth file written by simulate")
    p.add_argument("--summary", help="summary file written by invert (barycentre, B_I, eta)")
    p.add_argument("--chi", help="detection tolerance, e.g. '0.5 cm' (default from config)")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("export", help="write a grid map as eps/sigma CSV matrices")
    p.add_argument("gridmap")
    p.add_argument("--out", help="output directory")
    p.set_defaults(func=cmd_export)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ImagingError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
