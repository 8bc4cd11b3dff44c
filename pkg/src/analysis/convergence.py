"""
Convergence diagnostics: logarithmic modulus of smoothness, rate bounds,
log-Hölder constants, error norms and empirical order fitting.

Modulus and Hölder estimates scan all pairs of a log-uniform grid and are
lower bounds of the true suprema that converge under refinement.
"""
import json
import logging
import math
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from scipy.integrate import trapezoid

from ..core.errors import ConfigError, NumericError
from ..core.kernels import LogKernel, moment
from ..core.lattice import index_window
from ..core.operators import OperatorConfig, apply_on_grid
from ..core.target import TargetFunction, reference_values

logger = logging.getLogger(__name__)

DEFAULT_GRID_POINTS = 512
PAIR_TOL = 1e-12


@dataclass(frozen=True)
class ModulusEstimate:
    rho: float
    value: float
    grid_points: int


@dataclass(frozen=True)
class ErrorNorms:
    sup: float
    l1: float


@dataclass(frozen=True)
class RateReport:
    samples: Tuple[Tuple[int, float], ...]
    fitted_order: float
    theoretical_order: float

    def to_dict(self):
        return {
            "samples": [{"n": int(n), "error": float(e)} for n, e in self.samples],
            "fitted_order": self.fitted_order,
            "theoretical_order": self.theoretical_order,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.samples, columns=["n", "error"])


def null_sequence(n: int, exponent: float = 0.5) -> float:
    """rho_n = n^{-exponent}; exponent in (0, 1) keeps rho_n -> 0 and 1/(n rho_n) -> 0."""
    if not 0 < exponent < 1:
        raise ConfigError(f"null-sequence exponent must lie in (0, 1), got {exponent}")
    return float(n) ** (-exponent)


def _log_grid(F: TargetFunction, grid_points: int) -> Tuple[np.ndarray, np.ndarray]:
    if grid_points < 64:
        raise ConfigError(f"grid_points must be at least 64, got {grid_points}")
    u = np.linspace(math.log(F.a), math.log(F.b), grid_points)
    z = np.clip(np.exp(u), F.a, F.b)
    return u, F(z)


def log_modulus(F: TargetFunction, rho: float, grid_points: int = DEFAULT_GRID_POINTS) -> ModulusEstimate:
    if rho <= 0:
        raise ConfigError(f"rho must be positive, got {rho}")
    u, values = _log_grid(F, grid_points)
    close = np.abs(u[:, None] - u[None, :]) <= rho + PAIR_TOL
    diffs = np.abs(values[:, None] - values[None, :])
    return ModulusEstimate(rho=float(rho), value=float(diffs[close].max()), grid_points=grid_points)


def holder_constant(F: TargetFunction, tau: float, grid_points: int = DEFAULT_GRID_POINTS) -> float:
    """max |F(s) - F(t)| / |log s - log t|^tau over distinct grid pairs."""
    if not 0 < tau <= 1:
        raise ConfigError(f"tau must lie in (0, 1], got {tau}")
    u, values = _log_grid(F, grid_points)
    gap = np.abs(u[:, None] - u[None, :])
    diffs = np.abs(values[:, None] - values[None, :])
    distinct = gap > 0
    return float((diffs[distinct] / gap[distinct] ** tau).max())


def _tail_term(kernel: LogKernel, n: int, rho_n: float, v: float) -> float:
    return moment(kernel, v) / (kernel.value_at_e * float(n) ** v * rho_n**v)


def _bound_parts(F, kernel, n, rho_n, v, grid_points):
    if rho_n <= 0:
        raise ConfigError(f"rho_n must be positive, got {rho_n}")
    index_window(F.a, F.b, n)
    if v is None:
        v = kernel.source.decay_exponent_v
    omega = log_modulus(F, rho_n, grid_points).value
    return omega, _tail_term(kernel, n, rho_n, v)


def gm_rate_bound(
    F: TargetFunction,
    kernel: LogKernel,
    n: int,
    rho_n: float,
    v: Optional[float] = None,
    grid_points: int = DEFAULT_GRID_POINTS,
) -> float:
    """Omega(F, rho_n) max A_v / (Psi(e) n^v rho_n^v)."""
    omega, tail = _bound_parts(F, kernel, n, rho_n, v, grid_points)
    return max(omega, tail)


def mk_rate_bound(
    F: TargetFunction,
    kernel: LogKernel,
    n: int,
    rho_n: float,
    v: Optional[float] = None,
    grid_points: int = DEFAULT_GRID_POINTS,
) -> float:
    """Omega(F, rho_n) + (Omega(F, rho_n) max A_v / (Psi(e) n^v rho_n^v))."""
    omega, tail = _bound_parts(F, kernel, n, rho_n, v, grid_points)
    return omega + max(omega, tail)


def holder_rate_bound(lam: float, tau: float, kernel: LogKernel, n: int) -> float:
    """
    Kantorovich bound for F in the log-Hölder class with constant lam.

    Uses rho_n = n^{-1/(1+tau)}, Omega(F, rho) <= lam * rho^tau and v = 1,
    which decays like n^{-tau/(1+tau)}.
    """
    if not 0 < tau <= 1:
        raise ConfigError(f"tau must lie in (0, 1], got {tau}")
    rho = float(n) ** (-1.0 / (1.0 + tau))
    omega = lam * rho**tau
    return omega + max(omega, _tail_term(kernel, n, rho, 1.0))


def error_norms(
    F: Union[TargetFunction, np.ndarray], approx, grid, measure: str = "z"
) -> ErrorNorms:
    """
    Sup and L1 errors on a grid. L1 uses trapezoidal cell widths in z,
    or in log z with measure="log".
    """
    grid = np.asarray(grid, dtype=float)
    approx = np.asarray(approx, dtype=float)
    exact = F(grid) if callable(F) else np.asarray(F, dtype=float)
    if approx.shape != grid.shape or exact.shape != grid.shape:
        raise ConfigError(f"length mismatch: grid {grid.shape}, approx {approx.shape}, exact {exact.shape}")
    if measure not in ("z", "log"):
        raise ConfigError(f"Unsupported L1 measure: {measure!r}")
    err = np.abs(exact - approx)
    if grid.size < 2:
        return ErrorNorms(sup=float(err.max(initial=0.0)), l1=0.0)
    x = grid if measure == "z" else np.log(grid)
    return ErrorNorms(sup=float(err.max()), l1=float(trapezoid(err, x=x)))


def fit_order(report: Iterable[Tuple[int, float]]) -> float:
    """Negated least-squares slope of log(error) against log(n)."""
    pairs = [(float(n), float(e)) for n, e in report]
    if len(pairs) < 3:
        raise ConfigError(f"fit_order needs at least 3 samples, got {len(pairs)}")
    n, err = np.array(pairs).T
    if np.any(err <= 0):
        raise NumericError("error is zero or negative: exact reproduction, the order is unbounded")
    slope, _ = np.polyfit(np.log(n), np.log(err), 1)
    return float(-slope)


def rate_report(samples: Sequence[Tuple[int, float]], theoretical_order: float) -> RateReport:
    samples = tuple((int(n), float(e)) for n, e in samples)
    ns = [n for n, _ in samples]
    if any(b <= a for a, b in zip(ns, ns[1:])):
        raise ConfigError("rate samples must have strictly increasing n")
    if any(e < 0 for _, e in samples):
        raise ConfigError("rate samples must have nonnegative errors")
    return RateReport(samples=samples, fitted_order=fit_order(samples), theoretical_order=float(theoretical_order))


def sup_errors(
    F: TargetFunction,
    kernel: LogKernel,
    n_list: Sequence[int],
    which: str = "mk",
    grid_points: int = 400,
    **cfg_kwargs,
) -> List[Tuple[int, float]]:
    """Measured sup-errors of one operator on a uniform grid in z, one per n."""
    grid = np.linspace(F.a, F.b, grid_points)
    out = []
    for n in n_list:
        cfg = OperatorConfig(kernel=kernel, a=F.a, b=F.b, n=int(n), **cfg_kwargs)
        exact = reference_values(F, cfg.range_policy, grid)
        approx = apply_on_grid(F, cfg, grid, which)
        out.append((int(n), error_norms(exact, approx, grid).sup))
        logger.debug("%s sup-error at n=%d: %.6g", which, n, out[-1][1])
    return out


def certificate(
    F: TargetFunction,
    kernel: LogKernel,
    n: int,
    which: str = "gm",
    exponent: float = 0.5,
    grid_points: int = 400,
) -> dict:
    """Measured sup-error next to the theoretical bound for rho_n = n^{-exponent}."""
    rho = null_sequence(n, exponent)
    bound_fn = gm_rate_bound if which == "gm" else mk_rate_bound
    bound = bound_fn(F, kernel, n, rho, v=1.0)
    (_, measured), = sup_errors(F, kernel, [n], which=which, grid_points=grid_points)
    return {"n": int(n), "operator": which, "rho_n": rho, "measured": measured, "bound": bound}
