"""
Max-min exponential sampling operators.

    gm(F; z) = max_k [ F(e^{k/n})            min  w_k(z) ]
    mk(F; z) = max_k [ n * int_{k/n}^{(k+1)/n} F(e^u) du  min  w_k(z) ]

with w_k(z) = Psi(n log z - k) / max_j Psi(n log z - j) over the index window.
"""
import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Tuple

import numpy as np

from .errors import ConfigError, GridPointError, NumericError
from .kernels import LogKernel
from .lattice import IndexWindow, combine_rows, index_window, weight_matrix
from .quadrature import QuadratureSpec, integrate_segments
from .target import CLIP_TO_UNIT, TargetFunction, check_policy, enforce_unit, unit_view

logger = logging.getLogger(__name__)

CLAMP_AT_B = "clamp-at-b"
TRUNCATE_CELL = "truncate-cell"
EXTENSIONS = (CLAMP_AT_B, TRUNCATE_CELL)

GM = "gm"
MK = "mk"
OPERATORS = (GM, MK)


@dataclass(frozen=True)
class OperatorConfig:
    kernel: LogKernel
    a: float
    b: float
    n: int
    quadrature: QuadratureSpec = field(default_factory=QuadratureSpec)
    extension: str = CLAMP_AT_B
    range_policy: str = CLIP_TO_UNIT

    def __post_init__(self):
        if self.extension not in EXTENSIONS:
            raise ConfigError(f"Unsupported extension policy: {self.extension!r}")
        check_policy(self.range_policy)
        # raises EmptyWindow when n is too small for [a, b]
        _ = self.window

    @cached_property
    def window(self) -> IndexWindow:
        return index_window(self.a, self.b, self.n)


def check_which(which: str) -> str:
    if which not in OPERATORS:
        raise ConfigError(f"Unsupported operator: {which!r} (expected gm or mk)")
    return which


def samples(F: TargetFunction, cfg: OperatorConfig) -> np.ndarray:
    """Unit-range samples F(e^{k/n}) over the window."""
    G, _ = unit_view(F, cfg.range_policy)
    nodes = np.clip(cfg.window.nodes, cfg.a, cfg.b)
    return enforce_unit(G(nodes), cfg.range_policy, what="sample")


def _split_points(G: TargetFunction, cfg: OperatorConfig) -> np.ndarray:
    lo, hi = math.log(cfg.a), math.log(cfg.b)
    pts = [math.log(p) for p in G.breakpoints if cfg.a < p < cfg.b]
    return np.array(sorted(p for p in pts if lo < p < hi))


def _cell_means(G: TargetFunction, cfg: OperatorConfig) -> np.ndarray:
    """G is the unit view: its breakpoints include the kinks clipping adds."""
    window = cfg.window
    n = window.n
    top_u = math.log(cfg.b)
    breaks = _split_points(G, cfg)

    seg_lo, seg_hi, seg_cell = [], [], []
    extra = np.zeros(window.size)
    for i, k in enumerate(window.indices):
        lo = k / n
        hi = (k + 1) / n
        upper = min(hi, top_u)
        inner = breaks[(breaks > lo) & (breaks < upper)]
        edges = np.concatenate([[lo], inner, [upper]])
        seg_lo.extend(edges[:-1])
        seg_hi.extend(edges[1:])
        seg_cell.extend([i] * (len(edges) - 1))
        if hi > top_u and cfg.extension == CLAMP_AT_B:
            extra[i] = hi - top_u

    seg_lo = np.array(seg_lo)
    seg_hi = np.maximum(np.array(seg_hi), seg_lo)
    seg_cell = np.array(seg_cell, dtype=int)

    def integrand(u):
        return G(np.clip(np.exp(u), cfg.a, cfg.b))

    integrals = integrate_segments(integrand, seg_lo, seg_hi, cfg.quadrature)
    totals = np.zeros(window.size)
    lengths = np.zeros(window.size)
    np.add.at(totals, seg_cell, integrals)
    np.add.at(lengths, seg_cell, seg_hi - seg_lo)

    if np.any(extra > 0):
        at_b = float(G(np.asarray(cfg.b)))
        totals += at_b * extra
        lengths += extra

    # a cell that collapses onto b under truncate-cell degenerates to F(b)
    empty = lengths <= 0
    means = np.empty(window.size)
    means[~empty] = totals[~empty] / lengths[~empty]
    if np.any(empty):
        means[empty] = float(G(np.asarray(cfg.b)))
    return means


def cell_means(F: TargetFunction, cfg: OperatorConfig) -> np.ndarray:
    """Unit-range Kantorovich cell means for every index of the window."""
    G, _ = unit_view(F, cfg.range_policy)
    return enforce_unit(_cell_means(G, cfg), cfg.range_policy, what="cell mean")


def cell_mean(F: TargetFunction, cfg: OperatorConfig, k: int) -> float:
    window = cfg.window
    if not window.k_lo <= k <= window.k_hi:
        raise ConfigError(f"cell index {k} outside window [{window.k_lo}, {window.k_hi}]")
    return float(cell_means(F, cfg)[k - window.k_lo])


def _values(F: TargetFunction, cfg: OperatorConfig, which: str) -> np.ndarray:
    return samples(F, cfg) if which == GM else cell_means(F, cfg)


def _evaluate(F: TargetFunction, cfg: OperatorConfig, z: np.ndarray, which: str) -> np.ndarray:
    values = _values(F, cfg, which)
    w, _ = weight_matrix(cfg.kernel, cfg.window, z)
    _, restore = unit_view(F, cfg.range_policy)
    return restore(combine_rows(values, w))


def gm_apply(F: TargetFunction, cfg: OperatorConfig, z: float) -> float:
    return float(_evaluate(F, cfg, np.atleast_1d(float(z)), GM)[0])


def mk_apply(F: TargetFunction, cfg: OperatorConfig, z: float) -> float:
    return float(_evaluate(F, cfg, np.atleast_1d(float(z)), MK)[0])


def apply_on_grid(F: TargetFunction, cfg: OperatorConfig, grid, which: str = GM) -> np.ndarray:
    """Evaluate one operator on a sorted grid inside [a, b]."""
    check_which(which)
    grid = np.atleast_1d(np.asarray(grid, dtype=float))
    if grid.size > 1 and np.any(np.diff(grid) < 0):
        raise ConfigError("evaluation grid must be sorted")
    outside = ~((grid >= cfg.a * (1 - 1e-12)) & (grid <= cfg.b * (1 + 1e-12)))
    if np.any(outside):
        i = int(np.argmax(outside))
        raise ConfigError(f"grid point {i} (z={grid[i]!r}) outside [{cfg.a}, {cfg.b}]")
    try:
        return _evaluate(F, cfg, grid, which)
    except NumericError as exc:
        for i, z in enumerate(grid):
            try:
                _evaluate(F, cfg, grid[i : i + 1], which)
            except NumericError as point_exc:
                raise GridPointError(i, float(z), point_exc) from exc
        raise


def operator_pair(F: TargetFunction, cfg: OperatorConfig, grid, which: Tuple[str, ...] = OPERATORS):
    """Both operators on the same grid, keyed by operator name."""
    return {op: apply_on_grid(F, cfg, grid, op) for op in which}
