"""Outage probability: Monte Carlo estimates, the Rayleigh product bound,
finite-SNR diversity slopes and the operating-point check."""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, DegenerateRegimeWarning, LowEventCountWarning
from .fading import FadingModel, sample_power
from .streams import as_generator, chunk_sizes
from .transceiver import PowerWeights

log = logging.getLogger(__name__)

Z_95 = 1.96
MIN_EVENTS = 100


@dataclass(frozen=True)
class QosTarget:
    """Rate target in bits per channel use and its SIINR threshold ``2**R - 1``."""

    rate_bpcu: float
    threshold_linear: float | None = None

    def __post_init__(self):
        if not np.isfinite(self.rate_bpcu) or self.rate_bpcu < 0:
            raise ConfigurationError(f"rate_bpcu must be non-negative, got {self.rate_bpcu}")
        exact = math.expm1(self.rate_bpcu * math.log(2.0))
        if self.threshold_linear is None:
            object.__setattr__(self, "threshold_linear", exact)
        elif abs(self.threshold_linear - exact) > 1e-12 * max(1.0, exact):
            raise ConfigurationError(
                f"threshold {self.threshold_linear} does not match rate {self.rate_bpcu} BPCU")

    @classmethod
    def from_threshold(cls, threshold_linear: float) -> "QosTarget":
        """Target with an exact SIINR threshold (the rate is derived from it)."""
        if not threshold_linear >= 0:
            raise ConfigurationError(f"threshold must be non-negative, got {threshold_linear}")
        return cls(math.log2(1.0 + threshold_linear), float(threshold_linear))

    def scaled(self, factor: float) -> "QosTarget":
        """Same target at ``factor`` times the rate (e.g. per-slot rate scaling)."""
        return QosTarget(self.rate_bpcu * factor)


@dataclass(frozen=True)
class OutageEstimate:
    """A Monte Carlo outage proportion with its 95% normal-approximation half-width."""

    events: int
    trials: int

    @property
    def outage(self) -> float:
        return self.events / self.trials

    @property
    def std_error(self) -> float:
        p = self.outage
        return math.sqrt(p * (1.0 - p) / self.trials)

    @property
    def ci_half_width(self) -> float:
        return Z_95 * self.std_error

    def __iter__(self):
        # unpacks as (outage, ci_half_width)
        yield self.outage
        yield self.ci_half_width


def estimate_from_events(events: int, trials: int, warn: bool = True) -> OutageEstimate:
    est = OutageEstimate(int(events), int(trials))
    if warn and est.events < MIN_EVENTS:
        warnings.warn(f"only {est.events} outage events in {est.trials} trials; "
                      "estimate is unreliable", LowEventCountWarning, stacklevel=3)
    return est


@dataclass(frozen=True)
class OutagePoint:
    snr_db: float
    outage: float
    trials: int
    ci_half_width: float
    events: int = 0

    @property
    def std_error(self) -> float:
        return self.ci_half_width / Z_95


@dataclass(frozen=True)
class OutageCurve:
    """Outage versus SNR for one scheme; ``trials == 0`` marks closed-form points."""

    scheme_label: str
    points: tuple
    bound: tuple | None = None

    def __post_init__(self):
        pts = tuple(self.points)
        snr = [p.snr_db for p in pts]
        if any(b <= a for a, b in zip(snr, snr[1:])):
            raise ConfigurationError("curve points must be strictly ascending in SNR")
        if any(not 0.0 <= p.outage <= 1.0 for p in pts):
            raise ConfigurationError("outage values must lie in [0, 1]")
        object.__setattr__(self, "points", pts)
        if self.bound is not None:
            object.__setattr__(self, "bound", tuple(float(b) for b in self.bound))

    @property
    def snr_db(self) -> np.ndarray:
        return np.array([p.snr_db for p in self.points])

    @property
    def outage(self) -> np.ndarray:
        return np.array([p.outage for p in self.points])

    @property
    def events(self) -> np.ndarray:
        return np.array([p.events for p in self.points])

    @property
    def std_error(self) -> np.ndarray:
        return np.array([p.std_error for p in self.points])

    def reliable(self, min_events: int = MIN_EVENTS) -> "OutageCurve":
        """Sub-curve of Monte Carlo points with at least ``min_events`` events.

        Closed-form points (zero trials) are always kept.
        """
        keep = [i for i, p in enumerate(self.points) if p.trials == 0 or p.events >= min_events]
        bound = None if self.bound is None else tuple(self.bound[i] for i in keep)
        return OutageCurve(self.scheme_label, tuple(self.points[i] for i in keep), bound)


def db_to_linear(db) -> np.ndarray | float:
    return 10.0 ** (np.asarray(db, dtype=float) / 10.0)


def ptcd_outage_events(weights: PowerWeights, model: FadingModel, threshold: float,
                       snr_linear: float, trials: int, rng) -> int:
    """Count trials whose total SIINR falls below ``threshold``.

    Each trial draws ``L`` independent channel powers: the direct one plus
    one per de-interleaved branch. Coordinated interleaving puts the copies
    of a symbol at distinct positions, and coefficients are i.i.d. across
    positions, so the joint law is a product of marginals.

    Branch powers are drawn one branch at a time, and only for trials whose
    partial sum is still below the threshold: every SIINR term is
    non-negative, so the others are already decided.
    """
    rng = as_generator(rng)
    w = weights.array
    s = weights.interference_sums
    # SIINR_1 < threshold  <=>  rho * g * (w_1 - s_1 * threshold) < threshold
    first_margin = snr_linear * (w[0] - s[0] * threshold)
    events = 0
    for n in chunk_sizes(trials):
        g = sample_power(model, n, rng)
        g = g[g * first_margin < threshold]
        rg = snr_linear * g
        partial = w[0] * rg / (s[0] * rg + 1.0)
        for i in range(1, weights.branch_count):
            if not partial.size:
                break
            rg = snr_linear * sample_power(model, partial.size, rng)
            partial += w[i] * rg / (s[i] * rg + 1.0)
            partial = partial[partial < threshold]
        events += partial.size
    return events


def outage_monte_carlo(weights: PowerWeights, model: FadingModel, qos: QosTarget,
                       snr_linear: float, trials: int, rng=None) -> OutageEstimate:
    """Monte Carlo PTCD outage probability at one SNR."""
    if trials < 1:
        raise ConfigurationError("trials must be >= 1")
    if snr_linear <= 0:
        raise ConfigurationError("snr_linear must be positive")
    events = ptcd_outage_events(weights, model, qos.threshold_linear, snr_linear, trials, rng)
    return estimate_from_events(events, trials)


def branch_outage_rayleigh(weights: PowerWeights, threshold: float, snr_linear) -> np.ndarray:
    """``P(SIINR_i < threshold)`` for each branch under unit-mean Rayleigh fading.

    Returns an array with branches on the last axis; ``snr_linear`` may be an
    array. Branches whose ceiling does not exceed the threshold return 1.
    """
    w = weights.array
    s = weights.interference_sums
    snr = np.asarray(snr_linear, dtype=float)[..., None]
    margin = w - s * threshold
    with np.errstate(divide="ignore", invalid="ignore"):
        p = -np.expm1(-threshold / (snr * margin))
    return np.where(margin > 0, p, 1.0)


def outage_bound_rayleigh(weights: PowerWeights, qos: QosTarget, snr_linear) -> float:
    """Product-form upper bound on PTCD outage over unit-mean Rayleigh fading."""
    threshold = qos.threshold_linear
    if threshold <= 0:
        raise ConfigurationError("the closed-form bound needs a positive threshold")
    if np.any(np.asarray(snr_linear) <= 0):
        raise ConfigurationError("snr_linear must be positive")
    per_branch = branch_outage_rayleigh(weights, threshold, snr_linear)
    if np.any(weights.array - weights.interference_sums * threshold <= 0):
        per_branch = np.ones_like(per_branch)
    bound = per_branch.prod(axis=-1)
    return float(bound) if np.ndim(bound) == 0 else bound


@dataclass(frozen=True)
class OperatingPoint:
    """Result of :func:`validate_operating_point`."""

    ok: bool
    ceilings: tuple
    threshold: float
    violating_branch: int | None = None

    @property
    def message(self) -> str:
        if self.ok:
            return "ok"
        i = self.violating_branch
        return (f"threshold {self.threshold:g} is not below the SIINR ceiling "
                f"{self.ceilings[i - 1]:g} of branch {i}; the product bound is 1 and "
                "full diversity is not guaranteed")


def validate_operating_point(weights: PowerWeights, qos: QosTarget,
                             warn: bool = True) -> OperatingPoint:
    """Check that every interfered branch can clear the threshold at high SNR."""
    threshold = qos.threshold_linear
    ceilings = tuple(float(c) for c in weights.ceilings)
    for i, c in enumerate(ceilings, start=1):
        if not threshold < c:
            result = OperatingPoint(False, ceilings, threshold, i)
            if warn:
                warnings.warn(result.message, DegenerateRegimeWarning, stacklevel=2)
            return result
    return OperatingPoint(True, ceilings, threshold)


@dataclass(frozen=True)
class DiversityEstimate:
    """Finite-SNR log-log slopes of an outage curve."""

    slopes: tuple
    asymptote_claim: float
    skipped: tuple = field(default=())

    @property
    def snr_db_midpoints(self) -> np.ndarray:
        return np.array([s[0] for s in self.slopes])

    @property
    def values(self) -> np.ndarray:
        return np.array([s[1] for s in self.slopes])

    @property
    def final(self) -> float:
        if not self.slopes:
            raise ValueError("no usable slope pairs")
        return self.slopes[-1][1]


def diversity_slope(curve: OutageCurve, asymptote_claim: float = float("nan"),
                    min_events: int = 1) -> DiversityEstimate:
    """Slope ``-dlog P / dlog rho`` between adjacent points.

    Pairs with a zero estimate, or a Monte Carlo point with fewer than
    ``min_events`` events, are skipped and reported in ``skipped``.
    """
    pts = curve.points
    if len(pts) < 2:
        raise ConfigurationError("a diversity slope needs at least two SNR points")
    slopes, skipped = [], []
    for a, b in zip(pts, pts[1:]):
        bad = [p for p in (a, b) if p.outage <= 0 or (p.trials and p.events < min_events)]
        if bad:
            skipped.append({"snr_db": [a.snr_db, b.snr_db],
                            "reason": "zero outage" if any(p.outage <= 0 for p in bad)
                            else f"fewer than {min_events} events"})
            continue
        slope = -(math.log10(b.outage) - math.log10(a.outage)) / ((b.snr_db - a.snr_db) / 10.0)
        slopes.append((0.5 * (a.snr_db + b.snr_db), slope))
    if skipped:
        log.info("%s: skipped %d slope pair(s) with starved estimates",
                 curve.scheme_label, len(skipped))
    return DiversityEstimate(tuple(slopes), float(asymptote_claim), tuple(skipped))
