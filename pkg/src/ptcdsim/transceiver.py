"""PTCD transmit/receive chain and the analytic SIINR expressions.

Branch 1 carries the modulator output directly. Branches 2..L carry copies
that went through coordinated interleavers, so every symbol is seen through
``L`` distinct channel coefficients. All branches are superposed with power
weights ``w_1 > ... > w_L`` and sent from one antenna. The receiver peels the
branches off by successive interference cancellation (strongest first),
de-interleaves, and combines with MRC.

Normalisation throughout: noise power ``N0 = 1`` and transmit power
``P = rho``, so ``rho`` is the only SNR quantity.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ConfigurationError
from .fading import ChannelRealization
from .streams import as_generator

WEIGHT_SUM_TOL = 1e-12


@dataclass(frozen=True)
class PowerWeights:
    """Strictly descending positive weights that sum to one."""

    weights: tuple

    def __post_init__(self):
        w = tuple(float(x) for x in np.ravel(self.weights))
        if not w:
            raise ConfigurationError("at least one power weight is required")
        if any(not np.isfinite(x) or x <= 0 for x in w):
            raise ConfigurationError(f"power weights must be positive, got {list(w)}")
        if any(a <= b for a, b in zip(w, w[1:])):
            raise ConfigurationError(f"power weights must be strictly descending, got {list(w)}")
        if abs(sum(w) - 1.0) > WEIGHT_SUM_TOL:
            raise ConfigurationError(f"power weights must sum to 1, got sum={sum(w)!r}")
        object.__setattr__(self, "weights", w)

    def __len__(self) -> int:
        return len(self.weights)

    @property
    def branch_count(self) -> int:
        return len(self.weights)

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.weights)

    @property
    def interference_sums(self) -> np.ndarray:
        """``sum_{j>i} w_j`` for each branch (zero for the last one)."""
        w = self.array
        tail = np.cumsum(w[::-1])[::-1]
        return np.append(tail[1:], 0.0)

    @property
    def ceilings(self) -> np.ndarray:
        """Limit of SIINR_i as rho grows, ``w_i / sum_{j>i} w_j``, for i < L."""
        return self.array[:-1] / self.interference_sums[:-1]


@dataclass(frozen=True)
class InterleaverSet:
    """``L - 1`` block permutations with pairwise-distinct images per position.

    ``permutations[b][k]`` is the position where branch ``b + 2`` transmits
    symbol ``k``; it is also where the de-interleaver reads it back.
    """

    permutations: np.ndarray
    block_len: int

    def __post_init__(self):
        p = np.asarray(self.permutations, dtype=np.intp).reshape(-1, self.block_len)
        n = self.block_len
        if p.size and (p.min() < 0 or p.max() >= n):
            raise ConfigurationError("interleaver entries must lie in [0, block_len)")
        for row in p:
            if np.unique(row).size != n:
                raise ConfigurationError("every interleaver must be a bijection")
        images = np.vstack([np.arange(n), p])
        for a in range(images.shape[0]):
            for b in range(a + 1, images.shape[0]):
                if np.any(images[a] == images[b]):
                    raise ConfigurationError(
                        "coordinated interleavers must map each position to distinct positions")
        p.setflags(write=False)
        object.__setattr__(self, "permutations", p)

    @property
    def branch_count(self) -> int:
        return self.permutations.shape[0] + 1

    def _perm(self, branch: int) -> np.ndarray:
        if not 2 <= branch <= self.branch_count:
            raise IndexError(f"branch {branch} has no interleaver (valid: 2..{self.branch_count})")
        return self.permutations[branch - 2]

    def interleave(self, seq, branch: int) -> np.ndarray:
        seq = np.asarray(seq)
        out = np.empty_like(seq)
        out[self._perm(branch)] = seq
        return out

    def deinterleave(self, seq, branch: int) -> np.ndarray:
        return np.asarray(seq)[self._perm(branch)]

    def deinterleave_channel(self, channel: ChannelRealization) -> list:
        """De-interleaved channel views for branches 2..L."""
        if len(channel) != self.block_len:
            raise ConfigurationError("channel length does not match the interleaver block")
        return [channel.view(p) for p in self.permutations]


def build_interleavers(block_len: int, branch_count: int) -> InterleaverSet:
    """Cyclic shifts ``p_i(k) = (k + i) mod N`` for ``i = 1..L-1``."""
    if branch_count < 1:
        raise ConfigurationError(f"branch_count must be >= 1, got {branch_count}")
    if block_len < branch_count:
        raise ConfigurationError(
            f"block_len ({block_len}) must be >= branch_count ({branch_count}) so that "
            "every symbol's copies occupy distinct positions")
    k = np.arange(block_len)
    perms = np.array([(k + i) % block_len for i in range(1, branch_count)], dtype=np.intp)
    return InterleaverSet(perms.reshape(branch_count - 1, block_len), block_len)


@dataclass(frozen=True)
class SiinrBreakdown:
    """Per-branch SIINR values (last axis) and their MRC total, linear scale."""

    per_branch: np.ndarray
    total: np.ndarray = field(default=None)

    def __post_init__(self):
        per = np.asarray(self.per_branch, dtype=float)
        object.__setattr__(self, "per_branch", per)
        if self.total is None:
            object.__setattr__(self, "total", per.sum(axis=-1))


def siinr_from_powers(powers, weights: PowerWeights, snr_linear: float) -> np.ndarray:
    """Per-branch SIINR for channel powers laid out with branches on the last axis.

    ``powers[..., 0]`` is ``|h(k)|^2``; ``powers[..., i]`` is the de-interleaved
    power seen by branch ``i + 1``.
    """
    g = np.asarray(powers, dtype=float)
    w = weights.array
    s = weights.interference_sums
    rg = snr_linear * g
    return w * rg / (s * rg + 1.0)


def total_siinr(powers, weights: PowerWeights, snr_linear: float) -> np.ndarray:
    return siinr_from_powers(powers, weights, snr_linear).sum(axis=-1)


def siinr_per_branch(channel: ChannelRealization, deinterleaved: Sequence[ChannelRealization],
                     weights: PowerWeights, snr_linear: float, position: int) -> SiinrBreakdown:
    """SIINR of every branch for the symbol at ``position``."""
    if snr_linear <= 0:
        raise ConfigurationError("snr_linear must be positive")
    if len(deinterleaved) != weights.branch_count - 1:
        raise ConfigurationError(
            f"expected {weights.branch_count - 1} de-interleaved views, got {len(deinterleaved)}")
    views = [channel, *deinterleaved]
    powers = np.array([abs(v.coefficients[position]) ** 2 for v in views])
    return SiinrBreakdown(siinr_from_powers(powers, weights, snr_linear))


def qpsk_symbols(n: int, rng) -> np.ndarray:
    """Unit-power Gray QPSK symbols."""
    rng = as_generator(rng)
    bits = rng.integers(0, 2, size=(2, n))
    return ((1 - 2 * bits[0]) + 1j * (1 - 2 * bits[1])) / np.sqrt(2.0)


def complex_noise(n: int, rng) -> np.ndarray:
    """Circularly-symmetric complex Gaussian samples with unit variance."""
    rng = as_generator(rng)
    return (rng.standard_normal(n) + 1j * rng.standard_normal(n)) / np.sqrt(2.0)


def superpose(frame_symbols, weights: PowerWeights) -> np.ndarray:
    """``x[k] = sum_i sqrt(w_i) s_i[k]``."""
    s = np.asarray(frame_symbols, dtype=complex)
    if s.ndim != 2 or s.shape[0] != weights.branch_count:
        raise ConfigurationError(
            f"expected {weights.branch_count} branch sequences, got array of shape {s.shape}")
    return np.sqrt(weights.array) @ s


def apply_channel(composite, channel: ChannelRealization, snr_linear: float,
                  rng=None, noise=None) -> np.ndarray:
    """``y[k] = sqrt(rho) x[k] h[k] + n[k]`` with unit-variance complex AWGN.

    Pass ``noise`` to fix the noise samples (e.g. zeros); otherwise they are
    drawn from ``rng``.
    """
    x = np.asarray(composite, dtype=complex)
    if snr_linear <= 0:
        raise ConfigurationError("snr_linear must be positive")
    if x.shape != channel.coefficients.shape:
        raise ConfigurationError(
            f"composite length {x.size} does not match channel length {len(channel)}")
    if noise is None:
        noise = complex_noise(x.size, rng)
    else:
        noise = np.broadcast_to(np.asarray(noise, dtype=complex), x.shape)
    return np.sqrt(snr_linear) * x * channel.coefficients + noise


@dataclass(frozen=True)
class WaveformFrame:
    """One transmitted block.

    ``branch_signals[i]`` is the unit-power copy carried by branch ``i + 1``
    (already interleaved for ``i >= 1``); ``composite`` is their weighted sum.
    """

    symbols: np.ndarray
    branch_signals: np.ndarray
    composite: np.ndarray

    @property
    def block_len(self) -> int:
        return self.symbols.size


def make_frame(symbols, weights: PowerWeights, interleavers: InterleaverSet) -> WaveformFrame:
    s = np.asarray(symbols, dtype=complex)
    if s.size != interleavers.block_len or interleavers.branch_count != weights.branch_count:
        raise ConfigurationError("symbols, interleavers and weights disagree on dimensions")
    branches = np.vstack([s] + [interleavers.interleave(s, b)
                                for b in range(2, weights.branch_count + 1)])
    return WaveformFrame(s, branches, superpose(branches, weights))


def random_frame(block_len: int, weights: PowerWeights, interleavers: InterleaverSet,
                 rng) -> WaveformFrame:
    return make_frame(qpsk_symbols(block_len, rng), weights, interleavers)


@dataclass(frozen=True)
class WaveformMeasurement:
    """Output of the genie-aided receive chain for one frame.

    ``siinr`` is indexed by symbol (after de-interleaving), branches on the
    last axis. ``residuals[i]`` is the received block after cancelling
    branches ``1..i``; ``leakage[i]`` is what remains of it once the desired
    branch, the not-yet-cancelled branches and the noise are removed (zero
    for exact cancellation). ``mrc_output`` is the conjugate-channel combiner
    output per symbol.
    """

    siinr: SiinrBreakdown
    residuals: np.ndarray
    leakage: np.ndarray
    desired: np.ndarray
    mrc_output: np.ndarray


def measure_waveform_siinr(frame: WaveformFrame, channel: ChannelRealization,
                           interleavers: InterleaverSet, weights: PowerWeights,
                           snr_linear: float, rng=None, noise=None) -> WaveformMeasurement:
    """Run SIC + de-interleaving + MRC on a waveform with known symbols.

    Cancellation is exact (the transmitted symbols are known), and each
    residual is split into desired, interference and noise parts. Powers of
    independent branches add, and the noise contributes its reference
    power ``N0 = 1``, giving signal / (interference + 1) per branch.
    """
    L = weights.branch_count
    n = frame.block_len
    if (frame.branch_signals.shape != (L, n) or len(channel) != n
            or interleavers.block_len != n or interleavers.branch_count != L):
        raise ConfigurationError("frame, channel, interleavers and weights disagree on dimensions")

    h = channel.coefficients
    if noise is None:
        noise = complex_noise(n, rng)
    noise = np.broadcast_to(np.asarray(noise, dtype=complex), (n,))
    received = apply_channel(frame.composite, channel, snr_linear, noise=noise)
    components = np.sqrt(snr_linear * weights.array)[:, None] * frame.branch_signals * h

    # cumulative[i] = sum of branches 1..i already cancelled before branch i+1
    cancelled = np.vstack([np.zeros(n, dtype=complex), np.cumsum(components, axis=0)[:-1]])
    residuals = received - cancelled
    interference = components[::-1].cumsum(axis=0)[::-1] - components
    leakage = residuals - components - interference - noise

    signal_power = np.abs(components) ** 2
    interference_power = (signal_power[::-1].cumsum(axis=0)[::-1]) - signal_power
    siinr_tx = signal_power / (interference_power + 1.0)

    per_symbol = np.empty((n, L))
    per_symbol[:, 0] = siinr_tx[0]
    combined = np.conj(h) * residuals[0]
    for b in range(2, L + 1):
        per_symbol[:, b - 1] = interleavers.deinterleave(siinr_tx[b - 1], b)
        combined = combined + (np.conj(interleavers.deinterleave(h, b))
                               * interleavers.deinterleave(residuals[b - 1], b))
    return WaveformMeasurement(SiinrBreakdown(per_symbol), residuals, leakage, components,
                               combined)
