"""TOML run configurations for the command-line tool.

Physical quantities carry their unit in the key name (``gate_time_ns``,
``t21_us``). Errors raise :class:`ConfigError` with the offending line
when it can be located.
"""
from __future__ import annotations

import re
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .experiments.decay import NS, US, RateMatrix
from .experiments.heatmap import HeatmapConfig
from .experiments.lrb import LeakyGateModel, LRBConfig
from .iq import BlobModel, default_blob_model
from .measurement import MeasurementNoise
from .rng import check_seed


class ConfigError(ValueError):
    def __init__(self, message: str, path=None, line: int | None = None):
        where = str(path) if path is not None else "<config>"
        if line is not None:
            where += f":{line}"
        super().__init__(f"{where}: {message}")
        self.line = line


@dataclass
class ConfigFile:
    path: Path
    text: str
    data: dict

    def line_of(self, section: str | None, key: str | None = None) -> int | None:
        """1-based line of ``[section]`` or of ``key`` inside it, if found."""
        header = re.compile(r"^\s*\[\s*([^\]]+?)\s*\]")
        current = None
        for n, line in enumerate(self.text.splitlines(), start=1):
            m = header.match(line)
            if m:
                current = m.group(1)
                if key is None and current == section:
                    return n
                continue
            if key is not None and current == section and re.match(rf"^\s*{re.escape(key)}\s*=", line):
                return n
        return None

    def error(self, message: str, section: str | None = None, key: str | None = None) -> ConfigError:
        return ConfigError(message, self.path, self.line_of(section, key))


def load(path) -> ConfigFile:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror or exc}", path) from exc
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        m = re.search(r"line (\d+)", str(exc))
        raise ConfigError(f"TOML syntax error: {exc}", path, int(m.group(1)) if m else None) from exc
    return ConfigFile(path, text, data)


def empty(path="<defaults>") -> ConfigFile:
    return ConfigFile(Path(path), "", {})


class Section:
    """Typed accessors over one table that report unknown and invalid keys."""

    def __init__(self, cfg: ConfigFile, name: str, required: bool = False):
        self.cfg = cfg
        self.name = name
        raw = cfg.data.get(name)
        if raw is None:
            if required:
                raise ConfigError(f"missing [{name}] section", cfg.path)
            raw = {}
        if not isinstance(raw, dict):
            raise cfg.error(f"'{name}' must be a table", None, name)
        self.raw = raw
        self.used: set = set()

    def _err(self, key: str, message: str) -> ConfigError:
        return self.cfg.error(f"[{self.name}] {key}: {message}", self.name, key)

    def get(self, key: str, default=None, kind=None, check=None, required: bool = False):
        self.used.add(key)
        if key not in self.raw:
            if required:
                raise ConfigError(f"[{self.name}] missing required key '{key}'", self.cfg.path, self.cfg.line_of(self.name))
            return default
        value = self.raw[key]
        if kind is float:
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise self._err(key, f"expected a number, got {value!r}")
            value = float(value)
            if not np.isfinite(value):
                raise self._err(key, "must be finite")
        elif kind is int:
            if isinstance(value, bool) or not isinstance(value, int):
                raise self._err(key, f"expected an integer, got {value!r}")
        elif kind is not None and not isinstance(value, kind):
            raise self._err(key, f"expected {getattr(kind, '__name__', kind)}, got {value!r}")
        if check is not None:
            msg = check(value)
            if msg:
                raise self._err(key, msg)
        return value

    def finish(self):
        unknown = sorted(set(self.raw) - self.used)
        if unknown:
            raise self._err(unknown[0], "unknown key")


def _nonneg(v):
    return None if v >= 0 else "must be >= 0"


def _positive(v):
    return None if v > 0 else "must be > 0"


def _prob(v):
    return None if 0 <= v <= 1 else "must be a probability in [0, 1]"


def check_top_level(cfg: ConfigFile, sections: tuple):
    allowed = set(sections) | {"seed"}
    for key, value in cfg.data.items():
        if key in allowed:
            continue
        if isinstance(value, dict):
            raise cfg.error(f"unknown section [{key}]", key)
        raise cfg.error(f"unknown top-level key '{key}'", None, key)


def seed_from(cfg: ConfigFile, override) -> int:
    if override is not None:
        return check_seed(override)
    value = cfg.data.get("seed", 0)
    if isinstance(value, bool) or not isinstance(value, int):
        raise cfg.error(f"seed must be an integer, got {value!r}", None, "seed")
    try:
        return check_seed(value)
    except (TypeError, ValueError) as exc:
        raise cfg.error(f"seed: {exc}", None, "seed") from exc


def noise_from(cfg: ConfigFile) -> MeasurementNoise:
    s = Section(cfg, "noise")
    vals = {k: s.get(k, 0.0, float, _prob) for k in ("t01", "t10", "t21", "t20", "x01_error")}
    e01 = s.get("readout_error_0to1", 0.0, float, _prob)
    e10 = s.get("readout_error_1to0", 0.0, float, _prob)
    s.finish()
    conf = [[1 - e01, e10], [e01, 1 - e10]]
    try:
        return MeasurementNoise(binary_confusion=conf, **vals)
    except ValueError as exc:
        raise cfg.error(f"[noise] {exc}", "noise") from exc


def blobs_from(cfg: ConfigFile) -> BlobModel:
    if "blobs" not in cfg.data:
        return default_blob_model()
    s = Section(cfg, "blobs")
    means = s.get("means", required=True, kind=list)
    covs = s.get("covariances", kind=list)
    sigma = s.get("sigma", kind=float, check=_positive)
    s.finish()
    if covs is not None and sigma is not None:
        raise cfg.error("[blobs] give either covariances or sigma, not both", "blobs", "sigma")
    try:
        if covs is None:
            sig = 1.0 if sigma is None else sigma
            covs = [np.eye(2) * sig**2 for _ in means]
        return BlobModel(np.asarray(means, dtype=float), np.asarray(covs, dtype=float))
    except (ValueError, TypeError) as exc:
        raise cfg.error(f"[blobs] {exc}", "blobs") from exc


def rates_from(s: Section) -> RateMatrix:
    lifetimes = [s.get(k, None, float, _nonneg) for k in ("t10_us", "t20_us", "t21_us")]
    return RateMatrix.from_lifetimes_us(*lifetimes)


def heatmap_from(cfg: ConfigFile, seed: int) -> HeatmapConfig:
    check_top_level(cfg, ("heatmap", "noise", "blobs"))
    s = Section(cfg, "heatmap")
    step = s.get("grid_step", 0.1, float, lambda v: None if 0 < v <= 1 else "must be in (0, 1]")
    shots = s.get("shots_per_point", 1000, int, _positive)
    disc = s.get("discriminator", "mcmd", str, lambda v: None if v in ("mcmd", "qda") else "must be 'mcmd' or 'qda'")
    rem = s.get("rem", True, bool)
    cal = s.get("calibration_shots", None, int, _positive)
    train = s.get("training_shots", 3000, int, _positive)
    s.finish()
    return HeatmapConfig(step, shots, disc, rem, noise_from(cfg), blobs_from(cfg), cal, train, seed)


def lrb_from(cfg: ConfigFile, seed: int) -> LRBConfig:
    check_top_level(cfg, ("lrb", "gate", "noise"))
    s = Section(cfg, "lrb", required=True)

    def lengths_ok(v):
        if not v or not all(isinstance(m, int) and not isinstance(m, bool) and m >= 1 for m in v):
            return "must be a nonempty list of positive integers"
        if any(b <= a for a, b in zip(v, v[1:])):
            return "must be strictly increasing"
        return None

    lengths = s.get("lengths", None, list, lengths_ok, required=True)
    samples = s.get("num_samples", 10, int, _positive)
    shots = s.get("shots", 3000, int, _nonneg)
    cal = s.get("calibration_shots", None, int, _positive)
    s.finish()
    g = Section(cfg, "gate")
    leak = g.get("leak_angle_rad", 0.0, float)
    gate_time = g.get("gate_time_ns", 35.5, float, _positive) * NS
    depol = g.get("depol_01", 0.0, float, _prob)
    drag = g.get("drag_sigma_ns", 1.78, float, _positive) * NS
    rates = rates_from(g)
    scale = g.get("relaxation_scale", 1.0, float, _nonneg)
    g.finish()
    gate = LeakyGateModel(leak, gate_time, rates.scaled(scale), depol, drag)
    return LRBConfig(tuple(lengths), samples, shots or None, gate, noise_from(cfg), cal, seed)


@dataclass
class DecayConfig:
    rates: RateMatrix
    delays: np.ndarray
    shots: int | None
    noise: MeasurementNoise
    seed: int
    gate_time: float
    calibration_shots: int | None


def decay_from(cfg: ConfigFile, seed: int) -> DecayConfig:
    check_top_level(cfg, ("decay", "rates", "noise"))
    s = Section(cfg, "decay", required=True)
    delays = s.get("delays_us", None, list)
    if delays is not None:
        if not delays or not all(isinstance(d, (int, float)) and not isinstance(d, bool) and d >= 0 for d in delays):
            raise s._err("delays_us", "must be a nonempty list of nonnegative numbers")
        delays = np.asarray(delays, dtype=float)
        s.used |= {"max_delay_us", "num_delays"}
        if "max_delay_us" in s.raw or "num_delays" in s.raw:
            raise s._err("delays_us", "give delays_us or max_delay_us/num_delays, not both")
    else:
        top = s.get("max_delay_us", 500.0, float, _positive)
        n = s.get("num_delays", 26, int, lambda v: None if v >= 2 else "must be >= 2")
        delays = np.linspace(0.0, top, n)
    shots = s.get("shots", 3000, int, _nonneg)
    cal = s.get("calibration_shots", None, int, _positive)
    gate_time = s.get("gate_time_ns", 35.5, float, _positive) * NS
    s.finish()
    r = Section(cfg, "rates", required=True)
    rates = rates_from(r)
    r.finish()
    return DecayConfig(rates, delays * US, shots or None, noise_from(cfg), seed, gate_time, cal)


def resolve_path(cfg: ConfigFile, value) -> Path:
    p = Path(value)
    return p if p.is_absolute() else cfg.path.parent / p
