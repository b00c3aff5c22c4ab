"""TOML sweep configuration files.

See ``docs/config.md`` for the field reference. Unknown sections or keys
are rejected so that typos never silently fall back to defaults.
"""

from __future__ import annotations

import sys
from pathlib import Path

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .benchmarks import BenchmarkScheme
from .engine import PtcdScheme, SweepConfig
from .errors import ConfigurationError
from .fading import FadingModel
from .outage import QosTarget

DEFAULT_TRIALS = 10_000_000
DEFAULT_SEED = 20220653

_SECTIONS = {"model", "qos", "sweep", "schemes"}
_MODEL_KEYS = {"kind", "m", "mean_power"}
_QOS_KEYS = {"rate_bpcu", "threshold"}
_SWEEP_KEYS = {"snr_db", "snr_db_start", "snr_db_stop", "snr_db_step", "trials", "seed"}
_SCHEME_KEYS = {
    "ptcd": {"kind", "weights", "label", "m"},
    "direct": {"kind", "label", "m"},
    "stbc": {"kind", "tx", "label", "m"},
    "cooperative": {"kind", "relays", "label", "m"},
}


class ConfigFileError(OSError):
    """The configuration file could not be read."""


def _reject_unknown(where: str, table: dict, allowed: set):
    extra = sorted(set(table) - allowed)
    if extra:
        raise ConfigurationError(f"unknown key(s) in {where}: {', '.join(extra)}")


def _table(doc: dict, name: str) -> dict:
    t = doc.get(name, {})
    if not isinstance(t, dict):
        raise ConfigurationError(f"[{name}] must be a table")
    return t


def parse_model(t: dict) -> FadingModel:
    _reject_unknown("[model]", t, _MODEL_KEYS)
    kind = str(t.get("kind", "rayleigh")).lower()
    return FadingModel(kind, float(t.get("m", 1.0)), float(t.get("mean_power", 1.0)))


def parse_qos(t: dict, default_rate: float = 1.0) -> QosTarget:
    _reject_unknown("[qos]", t, _QOS_KEYS)
    if "rate_bpcu" in t and "threshold" in t:
        raise ConfigurationError("[qos] takes either rate_bpcu or threshold, not both")
    if "threshold" in t:
        return QosTarget.from_threshold(float(t["threshold"]))
    return QosTarget(float(t.get("rate_bpcu", default_rate)))


def parse_grid(t: dict) -> tuple:
    if "snr_db" in t:
        if any(k in t for k in ("snr_db_start", "snr_db_stop", "snr_db_step")):
            raise ConfigurationError("give either snr_db or snr_db_start/stop/step")
        grid = t["snr_db"]
        if not isinstance(grid, list):
            raise ConfigurationError("sweep.snr_db must be a list of numbers")
        return tuple(float(x) for x in grid)
    try:
        start, stop, step = (float(t[k]) for k in ("snr_db_start", "snr_db_stop", "snr_db_step"))
    except KeyError:
        raise ConfigurationError(
            "[sweep] needs snr_db or all of snr_db_start, snr_db_stop, snr_db_step") from None
    if step <= 0:
        raise ConfigurationError("snr_db_step must be positive")
    count = int(np.floor((stop - start) / step + 1e-9)) + 1
    return tuple(round(start + i * step, 10) for i in range(count))


def parse_scheme(t: dict, base_model: FadingModel):
    if not isinstance(t, dict) or "kind" not in t:
        raise ConfigurationError("every [[schemes]] entry needs a kind")
    kind = str(t["kind"]).lower()
    if kind not in _SCHEME_KEYS:
        raise ConfigurationError(
            f"unknown scheme kind {t['kind']!r} (expected one of {', '.join(_SCHEME_KEYS)})")
    _reject_unknown(f"[[schemes]] kind={kind}", t, _SCHEME_KEYS[kind])
    model = None
    if "m" in t:
        model = FadingModel.nakagami(float(t["m"]), base_model.mean_power)
    label = t.get("label")
    if kind == "ptcd":
        if "weights" not in t:
            raise ConfigurationError("a ptcd scheme needs weights")
        return PtcdScheme(tuple(t["weights"]), model=model, name=label)
    if kind == "direct":
        return BenchmarkScheme.direct(model=model, name=label)
    if kind == "stbc":
        if "tx" not in t:
            raise ConfigurationError("an stbc scheme needs tx")
        return BenchmarkScheme.stbc(int(t["tx"]), model=model, name=label)
    if "relays" not in t:
        raise ConfigurationError("a cooperative scheme needs relays")
    return BenchmarkScheme.cooperative(int(t["relays"]), model=model, name=label)


def parse_config(doc: dict, default_rate: float = 1.0, trials: int | None = None,
                 seed: int | None = None, require_schemes: bool = True) -> SweepConfig:
    """Build a :class:`SweepConfig` from a parsed TOML document."""
    _reject_unknown("the config file", doc, _SECTIONS)
    model = parse_model(_table(doc, "model"))
    qos = parse_qos(_table(doc, "qos"), default_rate)
    sweep = _table(doc, "sweep")
    _reject_unknown("[sweep]", sweep, _SWEEP_KEYS)
    grid = parse_grid(sweep)
    raw_schemes = doc.get("schemes", [])
    if not isinstance(raw_schemes, list):
        raise ConfigurationError("schemes must be an array of tables ([[schemes]])")
    schemes = tuple(parse_scheme(s, model) for s in raw_schemes)
    if require_schemes and not schemes:
        raise ConfigurationError("the config defines no [[schemes]]")
    try:
        return SweepConfig(
            snr_grid_db=grid,
            trials_per_point=trials if trials is not None else sweep.get("trials", DEFAULT_TRIALS),
            master_seed=seed if seed is not None else sweep.get("seed", DEFAULT_SEED),
            schemes=schemes,
            qos=qos,
            model=model,
        )
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigurationError):
            raise
        raise ConfigurationError(str(exc)) from exc


def read_document(path) -> dict:
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise ConfigFileError(f"cannot read config {path}: {exc.strerror or exc}") from exc
    try:
        return tomllib.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, tomllib.TOMLDecodeError) as exc:
        raise ConfigurationError(f"{path}: {exc}") from exc


def load_config(path, **kw) -> SweepConfig:
    return parse_config(read_document(path), **kw)
