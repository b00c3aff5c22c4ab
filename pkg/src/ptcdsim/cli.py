"""Command-line front end.

    ptcdsim sweep     --config configs/bound_vs_sim.toml --out runs/bound-vs-sim --plot
    ptcdsim diversity --config configs/diversity_rayleigh.toml --out runs/diversity --plot
    ptcdsim compare   --config configs/benchmarks.toml --out runs/benchmarks --plot
    ptcdsim bound     --config configs/bound_vs_sim.toml --out runs/bound

Exit codes: 0 ok, 2 configuration error, 3 output I/O error, 4 degenerate
operating point under ``--strict``, 5 config file unreadable.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from .benchmarks import BenchmarkScheme
from .config import ConfigFileError, read_document, parse_config
from .engine import (PtcdScheme, SweepConfig, SweepResult, curve_to_dict,
                     reference_bound_curve, run_sweep)
from .errors import ConfigurationError
from .fading import FadingKind
from .outage import diversity_slope, validate_operating_point

log = logging.getLogger("ptcdsim")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_DEGENERATE = 4
EXIT_UNREADABLE = 5

CSV_HEADER = ("scheme", "snr_db", "outage", "trials", "ci_half_width", "bound")
DIVERSITY_RATE_BPCU = 0.5


class DegenerateAbort(Exception):
    pass


@dataclass
class RunManifest:
    config_path: str
    output_dir: str
    emitted_files: list = field(default_factory=list)

    def add(self, path: Path, kind: str) -> None:
        self.emitted_files.append((str(path), kind))

    def to_dict(self) -> dict:
        return {"config_path": self.config_path, "output_dir": self.output_dir,
                "emitted_files": [{"path": p, "kind": k} for p, k in self.emitted_files],
                "version": __version__}


def fmt(x: float) -> str:
    return "%.10e" % x


def csv_rows(curves):
    for curve in curves:
        for i, p in enumerate(curve.points):
            bound = "" if curve.bound is None else fmt(curve.bound[i])
            yield (curve.scheme_label, fmt(p.snr_db), fmt(p.outage), str(p.trials),
                   fmt(p.ci_half_width), bound)


def write_results_csv(curves, path: Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        writer.writerows(csv_rows(curves))


def write_json(obj, path: Path) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _prepare_out(out: str) -> Path:
    path = Path(out)
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {path}: {exc.strerror or exc}") from exc
    if not os.access(path, os.W_OK):
        raise OSError(f"output directory {path} is not writable")
    return path


def _load(args, default_rate=1.0, require_schemes=True) -> SweepConfig:
    doc = read_document(args.config)
    try:
        return parse_config(doc, default_rate=default_rate, trials=args.trials, seed=args.seed,
                            require_schemes=require_schemes)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigurationError):
            raise
        raise ConfigurationError(str(exc)) from exc


def _check_operating_points(config: SweepConfig, strict: bool) -> None:
    for scheme in config.schemes:
        if isinstance(scheme, PtcdScheme):
            op = validate_operating_point(scheme.weights, config.qos, warn=False)
            if not op.ok:
                msg = f"{scheme.label}: {op.message}"
                if strict:
                    raise DegenerateAbort(msg)
                log.warning(msg)


def _sweep_outputs(result: SweepResult, out: Path, manifest: RunManifest, plot: bool,
                   title: str, extra: dict | None = None) -> None:
    csv_path = out / "results.csv"
    write_results_csv(result.curves, csv_path)
    manifest.add(csv_path, "csv")
    payload = result.to_dict()
    if extra:
        payload.update(extra)
    json_path = out / "results.json"
    write_json(payload, json_path)
    manifest.add(json_path, "json")
    if plot:
        from .plotting import plot_outage
        svg = out / "outage.svg"
        plot_outage(result.curves, svg, title)
        manifest.add(svg, "svg")


def cmd_sweep(args) -> RunManifest:
    config = _load(args)
    _check_operating_points(config, args.strict)
    out = _prepare_out(args.out)
    manifest = RunManifest(str(args.config), str(out))
    result = run_sweep(config, args.workers)
    _sweep_outputs(result, out, manifest, args.plot, f"Outage, {config.model.label}")
    return manifest


def cmd_diversity(args) -> RunManifest:
    config = _load(args, default_rate=DIVERSITY_RATE_BPCU)
    if len(config.snr_grid_db) < 2:
        raise ConfigurationError("the diversity command needs at least two SNR points")
    _check_operating_points(config, args.strict)
    out = _prepare_out(args.out)
    manifest = RunManifest(str(args.config), str(out))
    result = run_sweep(config, args.workers)

    estimates = {}
    for scheme, curve in zip(config.schemes, result.curves):
        target = scheme.target_order(config.model_for(scheme))
        estimates[curve.scheme_label] = diversity_slope(curve, target,
                                                        min_events=args.min_events)
    slopes = {label: {"target_order": est.asymptote_claim,
                      "slopes": [{"snr_db_mid": m, "slope": s} for m, s in est.slopes],
                      "skipped_pairs": list(est.skipped)}
              for label, est in estimates.items()}
    _sweep_outputs(result, out, manifest, False, "", extra={"diversity": slopes})

    div_csv = out / "diversity.csv"
    with open(div_csv, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(("scheme", "snr_db_mid", "slope", "target_order"))
        for label, est in estimates.items():
            for m, s in est.slopes:
                writer.writerow((label, fmt(m), fmt(s), fmt(est.asymptote_claim)))
    manifest.add(div_csv, "csv")
    if args.plot:
        from .plotting import plot_diversity, plot_outage
        svg = out / "outage.svg"
        plot_outage(result.curves, svg, f"Outage, {config.model.label}")
        manifest.add(svg, "svg")
        svg = out / "diversity.svg"
        plot_diversity(estimates, svg, f"Diversity order, {config.model.label}")
        manifest.add(svg, "svg")
    return manifest


def comparison_schemes(config: SweepConfig) -> tuple:
    """PTCD schemes of the config plus, per branch count L, STBC with L antennas
    and cooperation with L - 1 relays, and one direct-transmission reference."""
    ptcd = [s for s in config.schemes if isinstance(s, PtcdScheme)]
    if not ptcd:
        raise ConfigurationError("compare needs at least one ptcd scheme")
    if any(not isinstance(s, PtcdScheme) for s in config.schemes):
        raise ConfigurationError("compare derives its benchmarks; list only ptcd schemes")
    schemes = [BenchmarkScheme.direct()]
    for s in ptcd:
        L = s.branch_count
        if L < 2:
            raise ConfigurationError("compare needs PTCD schemes with at least two branches")
        schemes += [s, BenchmarkScheme.stbc(L), BenchmarkScheme.cooperative(L - 1)]
    return tuple(schemes)


def ordering_report(result: SweepResult, min_snr_db: float = 10.0) -> dict:
    """Per point and branch count: schemes sorted by outage and the expected-order check.

    ``holds`` is true when no pair in STBC <= PTCD <= cooperative <= direct is
    reversed by more than the sum of the two 95% half-widths.
    """
    curves = {c.scheme_label: c for c in result.curves}
    direct = curves["Direct"]
    report = {"min_snr_db": min_snr_db, "groups": []}
    for scheme in result.config.schemes:
        if not isinstance(scheme, PtcdScheme):
            continue
        L = scheme.branch_count
        chain = [f"STBC Tx={L}", scheme.label, f"Cooperative L={L}", "Direct"]
        rows = []
        for i, db in enumerate(direct.snr_db):
            pts = [curves[name].points[i] for name in chain]
            order = sorted(chain, key=lambda n: curves[n].points[i].outage)
            violations = [f"{a} > {b}" for (a, pa), (b, pb) in zip(zip(chain, pts),
                                                                 zip(chain[1:], pts[1:]))
                          if pa.outage - pb.outage > pa.ci_half_width + pb.ci_half_width]
            rows.append({"snr_db": float(db), "order": order,
                         "outage": {n: p.outage for n, p in zip(chain, pts)},
                         "holds": not violations, "violations": violations,
                         "checked": bool(db >= min_snr_db)})
        report["groups"].append({
            "branches": L, "chain": chain, "points": rows,
            "all_hold": all(r["holds"] for r in rows if r["checked"]),
        })
    return report


def cmd_compare(args) -> RunManifest:
    base = _load(args)
    config = SweepConfig(base.snr_grid_db, base.trials_per_point, base.master_seed,
                         comparison_schemes(base), base.qos, base.model)
    _check_operating_points(config, args.strict)
    out = _prepare_out(args.out)
    manifest = RunManifest(str(args.config), str(out))
    result = run_sweep(config, args.workers)
    _sweep_outputs(result, out, manifest, args.plot, f"Benchmarks, {config.model.label}")
    ordering = out / "ordering.json"
    write_json(ordering_report(result), ordering)
    manifest.add(ordering, "json")
    return manifest


def cmd_bound(args) -> RunManifest:
    config = _load(args)
    if config.model.kind is not FadingKind.RAYLEIGH:
        raise ConfigurationError("the closed-form bound exists only for Rayleigh fading")
    ptcd = [s for s in config.schemes if isinstance(s, PtcdScheme)]
    if not ptcd:
        raise ConfigurationError("bound needs at least one ptcd scheme")
    _check_operating_points(config, args.strict)
    out = _prepare_out(args.out)
    manifest = RunManifest(str(args.config), str(out))
    curves = [reference_bound_curve(s.weights, config.qos, config.snr_grid_db,
                                    label=f"{s.label} bound") for s in ptcd]
    path = out / "bound.csv"
    write_results_csv(curves, path)
    manifest.add(path, "csv")
    path = out / "bound.json"
    write_json({"version": __version__, "config": config.describe(),
                "curves": [curve_to_dict(c) for c in curves]}, path)
    manifest.add(path, "json")
    if args.plot:
        from .plotting import plot_outage
        path = out / "bound.svg"
        plot_outage(curves, path, "Closed-form outage bound, Rayleigh")
        manifest.add(path, "svg")
    return manifest


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, metavar="PATH", help="TOML sweep config")
    common.add_argument("--out", default="results", metavar="DIR", help="output directory")
    common.add_argument("--trials", type=int, metavar="N", help="override trials per point")
    common.add_argument("--workers", type=int, default=os.cpu_count() or 1, metavar="N",
                        help="worker processes (default: CPU count)")
    common.add_argument("--seed", type=int, metavar="U64", help="override the master seed")
    common.add_argument("--plot", action="store_true", help="also write SVG figures")
    common.add_argument("--strict", action="store_true",
                        help="abort (exit 4) on a degenerate PTCD operating point")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(
        prog="ptcdsim", description="Outage simulation for power-time channel diversity.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("sweep", parents=[common], help="outage versus SNR for each scheme")
    div = sub.add_parser("diversity", parents=[common],
                         help="finite-SNR diversity slopes (default rate 0.5 BPCU)")
    div.add_argument("--min-events", type=int, default=1, metavar="N",
                     help="skip slope pairs whose points have fewer events (default 1)")
    sub.add_parser("compare", parents=[common],
                   help="PTCD against direct, STBC and cooperative benchmarks")
    sub.add_parser("bound", parents=[common], help="closed-form Rayleigh outage bound")
    return parser


COMMANDS = {"sweep": cmd_sweep, "diversity": cmd_diversity, "compare": cmd_compare,
            "bound": cmd_bound}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.workers is not None and args.workers < 1:
        print("error: --workers must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        manifest = COMMANDS[args.command](args)
        manifest_path = Path(manifest.output_dir) / "manifest.json"
        manifest.add(manifest_path, "json")
        write_json(manifest.to_dict(), manifest_path)
    except ConfigFileError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNREADABLE
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DegenerateAbort as exc:
        print(f"degenerate operating point: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    for path, kind in manifest.emitted_files:
        print(f"{kind}\t{path}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
