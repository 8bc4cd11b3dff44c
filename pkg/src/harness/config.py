"""
YAML configuration: built-in defaults, then configs/*.yaml, then an optional
user file, then command-line overrides (last one wins).
"""
import copy
import logging
import os
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Tuple

import yaml

from ..core.errors import ConfigError, QuadratureError
from ..core.kernels import normalize_kind
from ..core.operators import EXTENSIONS, OPERATORS
from ..core.quadrature import QuadratureSpec
from ..core.target import check_policy

logger = logging.getLogger(__name__)

CONFIG_DIR = Path(os.getenv("MAXMIN_CONFIG_DIR", Path(__file__).resolve().parents[2] / "configs"))
CONFIG_FILES = ("base.yaml", "experiments.yaml", "orlicz.yaml")
FREE_FORM = ("experiments",)

DEFAULTS: Dict[str, Any] = {
    "function": "f-piecewise",
    "kernel": "ramp",
    "interval": [0.05, 2.0],
    "n_list": [10, 25, 45, 75, 100, 120],
    "operators": ["gm", "mk"],
    "quadrature": {"rule": "gauss-legendre", "points": 8, "max_panel": 0.0625},
    "extension": "clamp-at-b",
    "range_policy": "clip-to-unit",
    "grid": {"table_points": 400, "curve_points": 800},
    "l1_measure": "z",
    "null_sequence_exponent": 0.5,
    "n_jobs": 1,
    "experiments": {},
    "modular": {
        "function": "g-oscillatory",
        "etas": ["power:2"],
        "lambdas": [1.0],
        "n_list": [10, 25, 50, 100],
        "cells": 256,
    },
    "rates": {"function": "log-linear", "tau": 1.0, "n_list": [10, 20, 40, 80, 160]},
}


def _merge(base: Dict[str, Any], update: Dict[str, Any], where: str) -> Dict[str, Any]:
    for key, value in update.items():
        if key not in base:
            raise ConfigError(f"unknown config key {key!r} in {where}")
        if key in FREE_FORM and isinstance(value, dict):
            base[key] = {**base[key], **value}
        elif isinstance(base[key], dict) and isinstance(value, dict):
            base[key] = _merge(dict(base[key]), value, f"{where}:{key}")
        else:
            base[key] = value
    return base


def _read_yaml(path: Path) -> Dict[str, Any]:
    try:
        with open(path, "r") as f:
            data = yaml.safe_load(f) or {}
    except yaml.YAMLError as exc:
        raise ConfigError(f"malformed YAML in {path}: {exc}") from exc
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"config {path} must be a mapping, got {type(data).__name__}")
    return data


def parse_interval(value) -> Tuple[float, float]:
    if isinstance(value, str):
        value = value.split(",")
    try:
        a, b = (float(v) for v in value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"interval must be 'a,b', got {value!r}") from exc
    if not 0 < a < b:
        raise ConfigError(f"interval must satisfy 0 < a < b, got [{a}, {b}]")
    return a, b


def parse_n_list(value) -> List[int]:
    if isinstance(value, str):
        value = [v for v in value.split(",") if v.strip()]
    if isinstance(value, (int, float)):
        value = [value]
    try:
        ns = [int(v) for v in value]
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"n must be a comma-separated list of integers, got {value!r}") from exc
    if not ns or any(n <= 0 for n in ns):
        raise ConfigError(f"n values must be positive integers, got {ns}")
    if any(b <= a for a, b in zip(ns, ns[1:])):
        raise ConfigError(f"n values must be strictly increasing, got {ns}")
    return ns


def _check_operators(ops: Iterable[str]) -> List[str]:
    ops = list(ops)
    bad = [op for op in ops if op not in OPERATORS]
    if not ops or bad:
        raise ConfigError(f"operators must be a non-empty subset of {list(OPERATORS)}, got {ops}")
    return ops


def validate(cfg: Dict[str, Any]) -> Dict[str, Any]:
    cfg["interval"] = list(parse_interval(cfg["interval"]))
    cfg["n_list"] = parse_n_list(cfg["n_list"])
    cfg["kernel"] = normalize_kind(cfg["kernel"])
    cfg["operators"] = _check_operators(cfg["operators"])
    try:
        QuadratureSpec(**cfg["quadrature"])
    except QuadratureError as exc:
        raise ConfigError(str(exc)) from exc
    if cfg["extension"] not in EXTENSIONS:
        raise ConfigError(f"Unsupported extension policy: {cfg['extension']!r}")
    check_policy(cfg["range_policy"])
    if cfg["l1_measure"] not in ("z", "log"):
        raise ConfigError(f"Unsupported L1 measure: {cfg['l1_measure']!r}")
    for key in ("table_points", "curve_points"):
        if int(cfg["grid"][key]) < 2:
            raise ConfigError(f"grid.{key} must be at least 2")
    if int(cfg["n_jobs"]) == 0:
        raise ConfigError("n_jobs must be nonzero")
    return cfg


def load_config(path: Optional[str] = None, overrides: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
    cfg = copy.deepcopy(DEFAULTS)
    for name in CONFIG_FILES:
        file = CONFIG_DIR / name
        if file.exists():
            _merge(cfg, _read_yaml(file), name)
    if path:
        _merge(cfg, _read_yaml(Path(path)), str(path))
    if os.getenv("MAXMIN_N_JOBS"):
        try:
            cfg["n_jobs"] = int(os.getenv("MAXMIN_N_JOBS"))
        except ValueError as exc:
            raise ConfigError(f"MAXMIN_N_JOBS must be an integer, got {os.getenv('MAXMIN_N_JOBS')!r}") from exc
    if overrides:
        _merge(cfg, {k: v for k, v in overrides.items() if v is not None}, "command line")
    logger.debug("resolved config: %s", cfg)
    return validate(cfg)


def quadrature_spec(cfg: Dict[str, Any]) -> QuadratureSpec:
    return QuadratureSpec(**cfg["quadrature"])


def operator_kwargs(cfg: Dict[str, Any]) -> Dict[str, Any]:
    """OperatorConfig keyword arguments other than kernel, interval and n."""
    return {
        "quadrature": quadrature_spec(cfg),
        "extension": cfg["extension"],
        "range_policy": cfg["range_policy"],
    }
