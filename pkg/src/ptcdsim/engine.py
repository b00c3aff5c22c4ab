"""SNR sweeps over several schemes with reproducible parallel Monte Carlo.

Work is cut into ``(scheme, point, chunk)`` tasks. Each task owns a stream
derived from the master seed and its key, and returns an event count; the
per-point totals are integer sums, so the result does not depend on how
tasks are distributed over workers or in what order they finish.
"""

from __future__ import annotations

import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import __version__
from .benchmarks import BenchmarkScheme, _model_dict
from .errors import ConfigurationError
from .fading import FadingKind, FadingModel
from .outage import (MIN_EVENTS, OutageCurve, OutagePoint, QosTarget, db_to_linear,
                     estimate_from_events, outage_bound_rayleigh, ptcd_outage_events,
                     validate_operating_point)
from .streams import CHUNK_TRIALS, chunk_sizes, derive_stream
from .transceiver import PowerWeights

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class PtcdScheme:
    """PTCD with the given power weights; ``model`` overrides the sweep's fading model."""

    weights: PowerWeights
    model: FadingModel | None = None
    name: str | None = None

    def __post_init__(self):
        if not isinstance(self.weights, PowerWeights):
            object.__setattr__(self, "weights", PowerWeights(self.weights))

    @property
    def branch_count(self) -> int:
        return self.weights.branch_count

    @property
    def label(self) -> str:
        if self.name:
            return self.name
        base = f"PTCD L={self.branch_count}"
        if self.model is not None:
            base += f" {self.model.label}"
        return base

    def target_order(self, model: FadingModel) -> float:
        return self.branch_count * model.diversity_per_branch

    def bound(self, qos: QosTarget, snr_linear: float, model: FadingModel) -> float | None:
        """Closed-form bound; only defined for Rayleigh fading and a positive threshold."""
        if model.kind is not FadingKind.RAYLEIGH or qos.threshold_linear <= 0:
            return None
        return outage_bound_rayleigh(self.weights, qos, snr_linear * model.mean_power)

    def count_outages(self, model, qos, snr_linear, trials, rng) -> int:
        return ptcd_outage_events(self.weights, model, qos.threshold_linear, snr_linear, trials, rng)

    def describe(self, qos: QosTarget | None = None) -> dict:
        d = {"kind": "ptcd", "label": self.label, "weights": list(self.weights.weights)}
        if qos is not None:
            d["threshold_linear"] = qos.threshold_linear
        if self.model is not None:
            d["model"] = _model_dict(self.model)
        return d


Scheme = PtcdScheme | BenchmarkScheme


@dataclass(frozen=True)
class SweepConfig:
    snr_grid_db: tuple
    trials_per_point: int
    master_seed: int
    schemes: tuple
    qos: QosTarget
    model: FadingModel = field(default_factory=FadingModel.rayleigh)

    def __post_init__(self):
        grid = tuple(float(x) for x in self.snr_grid_db)
        if not grid:
            raise ConfigurationError("the SNR grid is empty")
        if any(not np.isfinite(x) for x in grid):
            raise ConfigurationError("SNR grid values must be finite")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ConfigurationError("the SNR grid must be strictly ascending")
        object.__setattr__(self, "snr_grid_db", grid)
        if int(self.trials_per_point) != self.trials_per_point or self.trials_per_point < 1:
            raise ConfigurationError("trials_per_point must be a positive integer")
        object.__setattr__(self, "trials_per_point", int(self.trials_per_point))
        if not 0 <= int(self.master_seed) < 2 ** 64:
            raise ConfigurationError("master_seed must be an unsigned 64-bit integer")
        object.__setattr__(self, "master_seed", int(self.master_seed))
        schemes = tuple(self.schemes)
        if not schemes:
            raise ConfigurationError("at least one scheme is required")
        for s in schemes:
            if not isinstance(s, (PtcdScheme, BenchmarkScheme)):
                raise ConfigurationError(f"unsupported scheme descriptor {s!r}")
        labels = [s.label for s in schemes]
        if len(set(labels)) != len(labels):
            raise ConfigurationError(f"scheme labels must be unique, got {labels}")
        object.__setattr__(self, "schemes", schemes)

    def model_for(self, scheme) -> FadingModel:
        return scheme.model if scheme.model is not None else self.model

    def describe(self) -> dict:
        return {
            "snr_grid_db": list(self.snr_grid_db),
            "trials_per_point": self.trials_per_point,
            "master_seed": self.master_seed,
            "qos": {"rate_bpcu": self.qos.rate_bpcu, "threshold_linear": self.qos.threshold_linear},
            "model": _model_dict(self.model),
            "schemes": [s.describe(self.qos) for s in self.schemes],
        }


@dataclass
class SweepResult:
    curves: tuple
    config: SweepConfig
    diagnostics: list = field(default_factory=list)
    elapsed_s: float = 0.0

    def curve(self, label: str) -> OutageCurve:
        for c in self.curves:
            if c.scheme_label == label:
                return c
        raise KeyError(label)

    def to_dict(self, include_timing: bool = True) -> dict:
        d = {
            "version": __version__,
            "config": self.config.describe(),
            "curves": [curve_to_dict(c) for c in self.curves],
            "diagnostics": self.diagnostics,
        }
        if include_timing:
            d["elapsed_s"] = self.elapsed_s
        return d

    def canonical_bytes(self) -> bytes:
        """Serialisation of everything except wall-clock time."""
        return json.dumps(self.to_dict(include_timing=False), sort_keys=True).encode()


def curve_to_dict(curve: OutageCurve) -> dict:
    rows = []
    for i, p in enumerate(curve.points):
        rows.append({
            "snr_db": p.snr_db, "outage": p.outage, "trials": p.trials,
            "events": p.events, "ci_half_width": p.ci_half_width,
            "bound": None if curve.bound is None else curve.bound[i],
        })
    return {"scheme": curve.scheme_label, "points": rows}


def curve_from_dict(d: dict) -> OutageCurve:
    pts = tuple(OutagePoint(r["snr_db"], r["outage"], r["trials"], r["ci_half_width"],
                            r.get("events", 0)) for r in d["points"])
    bounds = [r.get("bound") for r in d["points"]]
    bound = None if all(b is None for b in bounds) else tuple(bounds)
    return OutageCurve(d["scheme"], pts, bound)


def _run_task(task) -> tuple:
    key, scheme, model, qos, snr_linear, trials, seed = task
    rng = derive_stream(seed, *key)
    return key[:2], scheme.count_outages(model, qos, snr_linear, trials, rng)


def _tasks(config: SweepConfig):
    snr = db_to_linear(config.snr_grid_db)
    for si, scheme in enumerate(config.schemes):
        model = config.model_for(scheme)
        for pi, rho in enumerate(snr):
            for ci, n in enumerate(chunk_sizes(config.trials_per_point, CHUNK_TRIALS)):
                yield ((si, pi, ci), scheme, model, config.qos, float(rho), n, config.master_seed)


def run_sweep(config: SweepConfig, worker_count: int = 1) -> SweepResult:
    """Estimate outage for every scheme at every grid point."""
    if worker_count < 1:
        raise ConfigurationError("worker_count must be >= 1")
    start = time.perf_counter()
    events = {}
    tasks = list(_tasks(config))
    if worker_count == 1:
        results = map(_run_task, tasks)
        for key, n in results:
            events[key] = events.get(key, 0) + n
    else:
        chunksize = max(1, len(tasks) // (4 * worker_count))
        with ProcessPoolExecutor(max_workers=worker_count) as pool:
            for key, n in pool.map(_run_task, tasks, chunksize=chunksize):
                events[key] = events.get(key, 0) + n

    diagnostics = []
    curves = []
    snr = db_to_linear(config.snr_grid_db)
    for si, scheme in enumerate(config.schemes):
        model = config.model_for(scheme)
        if isinstance(scheme, PtcdScheme):
            op = validate_operating_point(scheme.weights, config.qos, warn=False)
            if not op.ok:
                diagnostics.append({"scheme": scheme.label, "kind": "degenerate_regime",
                                    "branch": op.violating_branch, "message": op.message})
        points, bounds = [], []
        for pi, db in enumerate(config.snr_grid_db):
            est = estimate_from_events(events[(si, pi)], config.trials_per_point, warn=False)
            if est.events < MIN_EVENTS:
                diagnostics.append({"scheme": scheme.label, "kind": "low_event_count",
                                    "snr_db": db, "events": est.events})
            points.append(OutagePoint(db, est.outage, est.trials, est.ci_half_width, est.events))
            bounds.append(scheme.bound(config.qos, float(snr[pi]), model))
        bound = None if any(b is None for b in bounds) else tuple(bounds)
        curves.append(OutageCurve(scheme.label, tuple(points), bound))
    low = sum(d["kind"] == "low_event_count" for d in diagnostics)
    if low:
        log.info("%d sweep point(s) have fewer than %d outage events", low, MIN_EVENTS)
    return SweepResult(tuple(curves), config, diagnostics, time.perf_counter() - start)


def reference_bound_curve(weights: PowerWeights, qos: QosTarget,
                          snr_grid_db: Sequence[float], label: str | None = None) -> OutageCurve:
    """Closed-form Rayleigh bound sampled on a grid (trials and CI are zero)."""
    grid = [float(x) for x in snr_grid_db]
    values = np.atleast_1d(outage_bound_rayleigh(weights, qos, db_to_linear(grid)))
    points = tuple(OutagePoint(db, float(v), 0, 0.0) for db, v in zip(grid, values))
    label = label or f"PTCD L={weights.branch_count} bound"
    return OutageCurve(label, points, tuple(float(v) for v in values))
