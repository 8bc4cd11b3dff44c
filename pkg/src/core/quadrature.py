"""
Per-segment quadrature rules used for Kantorovich cell means and modulars.
"""
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Tuple

import numpy as np
from scipy.integrate import simpson
from scipy.special import roots_legendre

from .errors import QuadratureError

GAUSS_LEGENDRE = "gauss-legendre"
COMPOSITE_SIMPSON = "composite-simpson"
RULES = (GAUSS_LEGENDRE, COMPOSITE_SIMPSON)


@dataclass(frozen=True)
class QuadratureSpec:
    """
    Rule and points per panel. Segments wider than max_panel (in log z) are
    split into equal panels first, so wide cells at small n keep full accuracy.
    """

    rule: str = GAUSS_LEGENDRE
    points: int = 8
    max_panel: float = 1.0 / 16.0

    def __post_init__(self):
        if self.rule not in RULES:
            raise QuadratureError(f"Unsupported quadrature rule: {self.rule!r}")
        if self.points < 2:
            raise QuadratureError(f"quadrature needs at least 2 points per cell, got {self.points}")
        if not self.max_panel > 0:
            raise QuadratureError(f"max_panel must be positive, got {self.max_panel}")


@lru_cache(maxsize=32)
def gauss_legendre(points: int) -> Tuple[np.ndarray, np.ndarray]:
    nodes, weights = roots_legendre(points)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def segment_nodes(lo, hi, points: int) -> Tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights mapped onto each [lo_i, hi_i]; shape (segments, points)."""
    lo = np.atleast_1d(np.asarray(lo, dtype=float))
    hi = np.atleast_1d(np.asarray(hi, dtype=float))
    x, w = gauss_legendre(points)
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    return mid[:, None] + half[:, None] * x[None, :], half[:, None] * w[None, :]


def split_panels(lo, hi, max_panel: float) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Equal panels no wider than max_panel; returns (panel_lo, panel_hi, owning segment)."""
    lo = np.atleast_1d(np.asarray(lo, dtype=float))
    hi = np.atleast_1d(np.asarray(hi, dtype=float))
    counts = np.maximum(np.ceil((hi - lo) / max_panel - 1e-9), 1).astype(int)
    owner = np.repeat(np.arange(lo.size), counts)
    first = np.repeat(np.cumsum(counts) - counts, counts)
    j = np.arange(owner.size) - first
    width = ((hi - lo) / counts)[owner]
    panel_lo = lo[owner] + j * width
    last = j == counts[owner] - 1
    panel_hi = np.where(last, hi[owner], panel_lo + width)
    return panel_lo, panel_hi, owner


def integrate_segments(fn: Callable[[np.ndarray], np.ndarray], lo, hi, spec: QuadratureSpec) -> np.ndarray:
    """Integral of fn over each [lo_i, hi_i]; fn is evaluated once on all nodes."""
    lo = np.atleast_1d(np.asarray(lo, dtype=float))
    hi = np.atleast_1d(np.asarray(hi, dtype=float))
    if lo.size == 0:
        return np.zeros(0)
    p_lo, p_hi, owner = split_panels(lo, hi, spec.max_panel)
    if spec.rule == GAUSS_LEGENDRE:
        nodes, weights = segment_nodes(p_lo, p_hi, spec.points)
        values = np.asarray(fn(nodes.ravel()), dtype=float).reshape(nodes.shape)
        panels = (values * weights).sum(axis=1)
    else:
        nodes = np.linspace(p_lo, p_hi, spec.points, axis=1)
        values = np.asarray(fn(nodes.ravel()), dtype=float).reshape(nodes.shape)
        panels = np.where(p_hi > p_lo, simpson(values, x=nodes, axis=1), 0.0)
    return np.bincount(owner, weights=panels, minlength=lo.size)
