"""Flat ``key = value`` experiment files.

Recognized keys (case-insensitive)::

    K, M, L            block geometry and CP length
    filter             dirichlet | rc, or a comma list of both
    alpha              RC roll-off (default 0.9)
    schemes            comma list from conventional, proposed, ls, genie, ofdm, ofdm-genie
    snr_db             comma list ("0, 10, 20") or inclusive range "start:stop:step"
    N_h, N_d           channel realizations and blocks per realization
    Es                 symbol energy
    seed               master seed (nonnegative integer)
    out_path           CSV destination
    workers, taps      optional: process count, channel taps (default K)

Lines starting with ``#`` or ``;`` are comments.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .modem import FilterKind, FilterSpec
from .montecarlo import ExperimentSpec

KNOWN_KEYS = {"k", "m", "l", "filter", "alpha", "schemes", "snr_db", "n_h", "n_d",
              "es", "seed", "out_path", "workers", "taps"}
_SECTION = "experiment"


class ConfigError(ValueError):
    """The experiment file is missing, malformed or inconsistent."""


@dataclass(frozen=True)
class RunConfig:
    spec: ExperimentSpec
    out_path: str | None = None
    workers: int = 1


def _int(raw: dict, key: str, default=None) -> int:
    if key not in raw:
        if default is None:
            raise ConfigError(f"missing required key {key!r}")
        return default
    try:
        return int(raw[key])
    except ValueError:
        raise ConfigError(f"{key} must be an integer, got {raw[key]!r}") from None


def _float(raw: dict, key: str, default: float) -> float:
    try:
        return float(raw.get(key, default))
    except ValueError:
        raise ConfigError(f"{key} must be a number, got {raw[key]!r}") from None


def _list(value: str) -> list[str]:
    return [item.strip() for item in value.split(",") if item.strip()]


def parse_snr_grid(value: str) -> tuple[float, ...]:
    try:
        if ":" in value:
            start, stop, step = (float(v) for v in value.split(":"))
            if step <= 0:
                raise ConfigError("snr_db range step must be positive")
            count = int(np.floor((stop - start) / step + 1e-9)) + 1
            return tuple(start + i * step for i in range(count))
        return tuple(float(v) for v in _list(value))
    except ValueError:
        raise ConfigError(f"cannot parse snr_db {value!r}") from None


def parse_filters(value: str, alpha: float) -> tuple[FilterSpec, ...]:
    filters = []
    for name in _list(value):
        try:
            kind = FilterKind(name.lower())
        except ValueError:
            raise ConfigError(f"unknown filter {name!r}; use dirichlet or rc") from None
        rolloff = alpha if kind is FilterKind.RAISED_COSINE else None
        try:
            filters.append(FilterSpec(kind, rolloff))
        except ValueError as err:
            raise ConfigError(str(err)) from None
    if not filters:
        raise ConfigError("filter list is empty")
    return tuple(filters)


def parse_config_text(text: str, seed: int | None = None) -> RunConfig:
    parser = configparser.ConfigParser(comment_prefixes=("#", ";"), inline_comment_prefixes=("#",),
                                       interpolation=None)
    try:
        parser.read_string(f"[{_SECTION}]\n" + text)
    except configparser.Error as err:
        raise ConfigError(f"malformed config: {err}") from None
    raw = {key.lower(): value.strip() for key, value in parser.items(_SECTION)}
    unknown = set(raw) - KNOWN_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")

    alpha = _float(raw, "alpha", 0.9)
    kwargs = dict(
        K=_int(raw, "k"),
        M=_int(raw, "m"),
        L=_int(raw, "l", 16),
        filters=parse_filters(raw.get("filter", "dirichlet"), alpha),
        n_h=_int(raw, "n_h", 100),
        n_d=_int(raw, "n_d", 100),
        es=_float(raw, "es", 1.0),
        seed=seed if seed is not None else _int(raw, "seed", 0),
    )
    if "schemes" in raw:
        kwargs["schemes"] = tuple(s.lower() for s in _list(raw["schemes"]))
    if "snr_db" in raw:
        kwargs["snr_db"] = parse_snr_grid(raw["snr_db"])
    if "taps" in raw:
        kwargs["taps"] = _int(raw, "taps")
    try:
        spec = ExperimentSpec(**kwargs)
    except ValueError as err:
        raise ConfigError(str(err)) from None
    workers = _int(raw, "workers", 1)
    if workers < 1:
        raise ConfigError("workers must be >= 1")
    return RunConfig(spec=spec, out_path=raw.get("out_path") or None, workers=workers)


def load_config(path, seed: int | None = None) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as err:
        raise ConfigError(f"cannot read config {path}: {err}") from None
    return parse_config_text(text, seed=seed)
