"""Comparison schemes under equal total transmit power.

* Direct transmission: one link at full power and the original rate.
* Orthogonal STBC with ``Tx`` antennas: power split equally over antennas,
  rate scaled by ``1 / R_k`` to pay for the code rate.
* Decode-and-forward cooperation with ``L - 1`` relays: power split equally
  over source and relays, rate scaled by ``L`` for the ``L`` time slots,
  MRC at the destination over the direct link and every relay that decoded.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

import numpy as np

from .errors import ConfigurationError
from .fading import FadingModel, sample_power
from .outage import OutageEstimate, QosTarget, estimate_from_events
from .streams import as_generator, chunk_sizes

STBC_CODE_RATES = {2: Fraction(1), 3: Fraction(3, 4), 4: Fraction(3, 4)}


class BenchmarkKind(str, Enum):
    DIRECT = "direct"
    STBC = "stbc"
    COOPERATIVE = "cooperative"


def stbc_code_rate(tx_antennas: int) -> Fraction:
    try:
        return STBC_CODE_RATES[int(tx_antennas)]
    except (KeyError, ValueError, TypeError):
        raise ConfigurationError(
            f"STBC supports 2, 3 or 4 transmit antennas, got {tx_antennas}") from None


def stbc_threshold(qos: QosTarget, tx_antennas: int) -> float:
    """``2**(R / R_k) - 1``."""
    return qos.scaled(1.0 / float(stbc_code_rate(tx_antennas))).threshold_linear


def cooperative_threshold(qos: QosTarget, relay_count: int) -> float:
    """``2**(R L) - 1`` with ``L = relay_count + 1`` slots."""
    return qos.scaled(relay_count + 1).threshold_linear


def _check(snr_linear, trials):
    if trials < 1:
        raise ConfigurationError("trials must be >= 1")
    if snr_linear <= 0:
        raise ConfigurationError("snr_linear must be positive")


def direct_outage_events(model, qos, snr_linear, trials, rng) -> int:
    rng = as_generator(rng)
    threshold = qos.threshold_linear
    events = 0
    for n in chunk_sizes(trials):
        g = sample_power(model, n, rng)
        events += int(np.count_nonzero(snr_linear * g < threshold))
    return events


def stbc_outage_events(tx_antennas, model, qos, snr_linear, trials, rng) -> int:
    threshold = stbc_threshold(qos, tx_antennas)
    rng = as_generator(rng)
    per_antenna = snr_linear / tx_antennas
    events = 0
    for n in chunk_sizes(trials):
        g = sample_power(model, (n, tx_antennas), rng)
        events += int(np.count_nonzero(per_antenna * g.sum(axis=1) < threshold))
    return events


def cooperative_outage_from_gains(sr, sd, rd, node_snr: float, threshold: float) -> np.ndarray:
    """Outage indicator per trial for decode-and-forward with MRC.

    ``sr`` and ``rd`` are ``(trials, relays)`` channel powers for the
    source-relay and relay-destination links, ``sd`` the ``(trials,)``
    direct-link powers. A relay forwards only if its own link supports the
    per-slot rate; relays that fail stay silent.
    """
    sr = np.asarray(sr, dtype=float)
    rd = np.asarray(rd, dtype=float)
    decoded = node_snr * sr >= threshold
    combined = node_snr * (np.asarray(sd, dtype=float) + np.where(decoded, rd, 0.0).sum(axis=-1))
    return combined < threshold


def cooperative_outage_events(relay_count, model, qos, snr_linear, trials, rng) -> int:
    if relay_count < 1:
        raise ConfigurationError(f"cooperative diversity needs >= 1 relay, got {relay_count}")
    rng = as_generator(rng)
    slots = relay_count + 1
    node_snr = snr_linear / slots
    threshold = cooperative_threshold(qos, relay_count)
    events = 0
    for n in chunk_sizes(trials):
        g = sample_power(model, (n, 2 * relay_count + 1), rng)
        out = cooperative_outage_from_gains(g[:, 1:slots], g[:, 0], g[:, slots:], node_snr,
                                            threshold)
        events += int(np.count_nonzero(out))
    return events


def direct_outage(model: FadingModel, qos: QosTarget, snr_linear: float, trials: int,
                  rng=None) -> OutageEstimate:
    """Single-link outage at full power: ``rho |h|^2 < 2**R - 1``."""
    _check(snr_linear, trials)
    return estimate_from_events(direct_outage_events(model, qos, snr_linear, trials, rng), trials)


def stbc_outage(tx_antennas: int, model: FadingModel, qos: QosTarget, snr_linear: float,
                trials: int, rng=None) -> OutageEstimate:
    """Orthogonal STBC outage: ``(rho / Tx) sum |h_i|^2 < 2**(R / R_k) - 1``."""
    stbc_code_rate(tx_antennas)
    _check(snr_linear, trials)
    events = stbc_outage_events(int(tx_antennas), model, qos, snr_linear, trials, rng)
    return estimate_from_events(events, trials)


def cooperative_outage(relay_count: int, model: FadingModel, qos: QosTarget, snr_linear: float,
                       trials: int, rng=None) -> OutageEstimate:
    """Decode-and-forward outage with ``relay_count`` relays (symmetric links)."""
    _check(snr_linear, trials)
    events = cooperative_outage_events(int(relay_count), model, qos, snr_linear, trials, rng)
    return estimate_from_events(events, trials)


@dataclass(frozen=True)
class BenchmarkScheme:
    """A benchmark scheme descriptor usable by the sweep engine.

    ``branch_count`` is the antenna count for STBC and the total number of
    paths (direct + relays) for cooperation; it is 1 for direct transmission.
    """

    kind: BenchmarkKind
    branch_count: int = 1
    model: FadingModel | None = None
    name: str | None = None

    def __post_init__(self):
        try:
            kind = BenchmarkKind(self.kind)
        except ValueError:
            raise ConfigurationError(f"unknown benchmark scheme {self.kind!r}") from None
        object.__setattr__(self, "kind", kind)
        if kind is BenchmarkKind.DIRECT and self.branch_count != 1:
            raise ConfigurationError("direct transmission has exactly one branch")
        if kind is BenchmarkKind.STBC:
            stbc_code_rate(self.branch_count)
        if kind is BenchmarkKind.COOPERATIVE and self.branch_count < 2:
            raise ConfigurationError("cooperative diversity needs branch_count >= 2")

    @classmethod
    def direct(cls, **kw) -> "BenchmarkScheme":
        return cls(BenchmarkKind.DIRECT, 1, **kw)

    @classmethod
    def stbc(cls, tx_antennas: int, **kw) -> "BenchmarkScheme":
        return cls(BenchmarkKind.STBC, tx_antennas, **kw)

    @classmethod
    def cooperative(cls, relay_count: int, **kw) -> "BenchmarkScheme":
        return cls(BenchmarkKind.COOPERATIVE, relay_count + 1, **kw)

    @property
    def code_rate(self) -> Fraction:
        if self.kind is BenchmarkKind.STBC:
            return stbc_code_rate(self.branch_count)
        return Fraction(1)

    @property
    def label(self) -> str:
        if self.name:
            return self.name
        if self.kind is BenchmarkKind.DIRECT:
            return "Direct"
        if self.kind is BenchmarkKind.STBC:
            return f"STBC Tx={self.branch_count}"
        return f"Cooperative L={self.branch_count}"

    def target_order(self, model: FadingModel) -> float:
        return self.branch_count * model.diversity_per_branch

    def bound(self, qos: QosTarget, snr_linear: float, model: FadingModel) -> float | None:
        return None

    def count_outages(self, model: FadingModel, qos: QosTarget, snr_linear: float, trials: int,
                      rng) -> int:
        if self.kind is BenchmarkKind.DIRECT:
            return direct_outage_events(model, qos, snr_linear, trials, rng)
        if self.kind is BenchmarkKind.STBC:
            return stbc_outage_events(self.branch_count, model, qos, snr_linear, trials, rng)
        return cooperative_outage_events(self.branch_count - 1, model, qos, snr_linear, trials, rng)

    def threshold(self, qos: QosTarget) -> float:
        """Per-use SNR threshold this scheme must reach for ``qos``."""
        if self.kind is BenchmarkKind.STBC:
            return stbc_threshold(qos, self.branch_count)
        if self.kind is BenchmarkKind.COOPERATIVE:
            return cooperative_threshold(qos, self.branch_count - 1)
        return qos.threshold_linear

    def describe(self, qos: QosTarget | None = None) -> dict:
        d = {"kind": self.kind.value, "label": self.label, "branch_count": self.branch_count,
             "code_rate": str(self.code_rate)}
        if qos is not None:
            d["threshold_linear"] = self.threshold(qos)
        if self.model is not None:
            d["model"] = _model_dict(self.model)
        return d


def _model_dict(model: FadingModel) -> dict:
    return {"kind": model.kind.value, "m": model.shape_m, "mean_power": model.mean_power}
