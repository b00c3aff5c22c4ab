"""Flat-fading channel models.

Rayleigh coefficients are circularly-symmetric complex Gaussian. Nakagami-m
coefficients carry a Gamma-distributed power and an independent uniform
phase; only the power matters for any SIINR or outage figure.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import ConfigurationError
from .streams import as_generator

MIN_NAKAGAMI_M = 0.5


class FadingKind(str, Enum):
    RAYLEIGH = "rayleigh"
    NAKAGAMI = "nakagami"


@dataclass(frozen=True)
class FadingModel:
    """Distribution family of the channel coefficient ``h``.

    ``mean_power`` is E[|h|^2]. ``shape_m`` is ignored for Rayleigh.
    """

    kind: FadingKind = FadingKind.RAYLEIGH
    shape_m: float = 1.0
    mean_power: float = 1.0

    def __post_init__(self):
        if not isinstance(self.kind, FadingKind):
            try:
                object.__setattr__(self, "kind", FadingKind(str(self.kind).lower()))
            except ValueError:
                raise ConfigurationError(f"unknown fading model {self.kind!r}") from None
        if not np.isfinite(self.mean_power) or self.mean_power <= 0:
            raise ConfigurationError(f"mean_power must be positive, got {self.mean_power}")
        if self.kind is FadingKind.NAKAGAMI and not self.shape_m >= MIN_NAKAGAMI_M:
            raise ConfigurationError(
                f"Nakagami shape m must be >= {MIN_NAKAGAMI_M}, got {self.shape_m}")

    @classmethod
    def rayleigh(cls, mean_power: float = 1.0) -> "FadingModel":
        return cls(FadingKind.RAYLEIGH, 1.0, mean_power)

    @classmethod
    def nakagami(cls, m: float, mean_power: float = 1.0) -> "FadingModel":
        return cls(FadingKind.NAKAGAMI, m, mean_power)

    @property
    def diversity_per_branch(self) -> float:
        """Exponent of the power CDF near zero (1 for Rayleigh, m for Nakagami)."""
        return 1.0 if self.kind is FadingKind.RAYLEIGH else float(self.shape_m)

    @property
    def label(self) -> str:
        if self.kind is FadingKind.RAYLEIGH:
            return "Rayleigh"
        return f"Nakagami(m={self.shape_m:g})"


@dataclass(frozen=True)
class ChannelRealization:
    """Complex coefficients for one block, indexed by sample position."""

    coefficients: np.ndarray

    def __post_init__(self):
        h = np.asarray(self.coefficients, dtype=complex)
        if h.ndim != 1 or h.size == 0:
            raise ConfigurationError("a channel realization is a non-empty 1-D sequence")
        if not np.all(np.isfinite(h)):
            raise ConfigurationError("channel coefficients must be finite")
        object.__setattr__(self, "coefficients", h)

    def __len__(self) -> int:
        return self.coefficients.size

    @property
    def power(self) -> np.ndarray:
        return np.abs(self.coefficients) ** 2

    def view(self, permutation) -> "ChannelRealization":
        """Coefficients reordered so position ``k`` reads ``permutation[k]``."""
        return ChannelRealization(self.coefficients[np.asarray(permutation)])


def sample_power(model: FadingModel, size, rng) -> np.ndarray:
    """Draw ``|h|^2`` directly, without materialising complex coefficients."""
    rng = as_generator(rng)
    if model.kind is FadingKind.RAYLEIGH:
        return model.mean_power * rng.standard_exponential(size)
    m = float(model.shape_m)
    return rng.gamma(m, model.mean_power / m, size)


def sample_block(model: FadingModel, block_len: int, rng) -> ChannelRealization:
    """Draw ``block_len`` i.i.d. complex coefficients."""
    if int(block_len) != block_len or block_len < 1:
        raise ConfigurationError(f"block_len must be a positive integer, got {block_len}")
    rng = as_generator(rng)
    n = int(block_len)
    if model.kind is FadingKind.RAYLEIGH:
        scale = np.sqrt(model.mean_power / 2.0)
        h = scale * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
    else:
        magnitude = np.sqrt(sample_power(model, n, rng))
        h = magnitude * np.exp(2j * np.pi * rng.random(n))
    return ChannelRealization(h)
