"""
Index windows, normalised max-min weights and the (max, min) combination.

Weights are computed from s = n*log(z) - k, never from e^{-k} z^n.
"""
import logging
import math
from dataclasses import dataclass
from typing import FrozenSet, Tuple, Union

import numpy as np

from .errors import ConfigError, DegenerateDenominator, EmptyWindow
from .kernels import LogKernel

logger = logging.getLogger(__name__)

SNAP_TOL = 1e-9
DENOMINATOR_SLACK = 1e-12
DOMAIN_RTOL = 1e-12


@dataclass(frozen=True)
class IndexWindow:
    a: float
    b: float
    n: int
    k_lo: int
    k_hi: int

    @property
    def indices(self) -> np.ndarray:
        return np.arange(self.k_lo, self.k_hi + 1)

    @property
    def size(self) -> int:
        return self.k_hi - self.k_lo + 1

    @property
    def nodes(self) -> np.ndarray:
        """Sampling nodes e^{k/n}."""
        return np.exp(self.indices / self.n)

    def contains(self, z) -> bool:
        z = np.asarray(z, dtype=float)
        lo = self.a * (1.0 - DOMAIN_RTOL)
        hi = self.b * (1.0 + DOMAIN_RTOL)
        return bool(np.all((z >= lo) & (z <= hi)))


@dataclass(frozen=True)
class WeightVector:
    window: IndexWindow
    z: float
    weights: np.ndarray
    denominator: float

    def __len__(self) -> int:
        return len(self.weights)

    def as_dict(self):
        return {int(k): float(w) for k, w in zip(self.window.indices, self.weights)}


def _snap(x: float, n: int) -> Tuple[float, bool]:
    r = round(x)
    if abs(x - r) <= SNAP_TOL * n:
        return float(r), True
    return x, False


def index_window(a: float, b: float, n: int) -> IndexWindow:
    if not (0 < a < b):
        raise ConfigError(f"interval must satisfy 0 < a < b, got [{a}, {b}]")
    if int(n) != n or n < 1:
        raise ConfigError(f"n must be a positive integer, got {n}")
    n = int(n)
    lo, exact_lo = _snap(n * math.log(a), n)
    hi, exact_hi = _snap(n * math.log(b), n)
    k_lo = int(lo) if exact_lo else math.ceil(lo)
    k_hi = int(hi) if exact_hi else math.floor(hi)
    if k_lo > k_hi:
        raise EmptyWindow(a, b, n, k_lo, k_hi)
    return IndexWindow(a=float(a), b=float(b), n=n, k_lo=k_lo, k_hi=k_hi)


def _check_domain(window: IndexWindow, z) -> None:
    if not window.contains(z):
        raise ConfigError(f"evaluation point outside [{window.a}, {window.b}]")


def weight_matrix(kernel: LogKernel, window: IndexWindow, z) -> Tuple[np.ndarray, np.ndarray]:
    """Normalised weights for many points at once: rows follow z, columns the window."""
    z = np.atleast_1d(np.asarray(z, dtype=float))
    _check_domain(window, z)
    s = window.n * np.log(z)[:, None] - window.indices[None, :]
    raw = kernel(s)
    denominators = raw.max(axis=1)
    bad = denominators < kernel.value_at_e - DENOMINATOR_SLACK
    if np.any(bad):
        i = int(np.argmax(bad))
        raise DegenerateDenominator(
            f"max kernel value {denominators[i]:.3e} at z={z[i]!r} is below Psi(e)={kernel.value_at_e:.6g}"
        )
    return raw / denominators[:, None], denominators


def weights(kernel: LogKernel, window: IndexWindow, z: float) -> WeightVector:
    w, denominators = weight_matrix(kernel, window, z)
    return WeightVector(window=window, z=float(z), weights=w[0], denominator=float(denominators[0]))


def gamma_window(window: IndexWindow, z: float, gamma: float) -> FrozenSet[int]:
    """Indices whose node lies within log-distance gamma of z."""
    if gamma <= 0:
        raise ConfigError("gamma must be positive")
    _check_domain(window, z)
    k = window.indices
    close = np.abs(k / window.n - math.log(z)) <= gamma + DOMAIN_RTOL
    return frozenset(int(i) for i in k[close])


def maxmin_combine(values, weights: Union[WeightVector, np.ndarray]) -> float:
    """max_k (values[k] min weights[k])."""
    w = weights.weights if isinstance(weights, WeightVector) else np.asarray(weights, dtype=float)
    v = np.asarray(values, dtype=float)
    if v.shape != w.shape:
        raise ConfigError(f"values and weights differ in length: {v.shape} vs {w.shape}")
    if v.size == 0:
        raise ConfigError("cannot combine an empty window")
    return float(np.max(np.minimum(v, w)))


def combine_rows(values, weight_rows: np.ndarray) -> np.ndarray:
    """Row-wise maxmin_combine of one value vector against a weight matrix."""
    v = np.asarray(values, dtype=float)
    if weight_rows.shape[-1] != v.shape[-1]:
        raise ConfigError(f"values and weights differ in length: {v.shape[-1]} vs {weight_rows.shape[-1]}")
    return np.max(np.minimum(v[None, :], weight_rows), axis=1)


def scale_combine(lam: float, values, weights) -> float:
    """max_k (lam*x_k min lam*y_k); equals lam * maxmin_combine(x, y) for lam > 0."""
    if lam <= 0:
        raise ConfigError("scale must be positive")
    x = np.asarray(values, dtype=float)
    y = weights.weights if isinstance(weights, WeightVector) else np.asarray(weights, dtype=float)
    return float(np.max(np.minimum(lam * x, lam * y)))
