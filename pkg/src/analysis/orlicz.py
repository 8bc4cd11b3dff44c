"""
Orlicz-space tools on R+ with the Haar measure dz/z.

Modulars are integrated over [a, b] only: every operator output and
built-in target lives there, and functions are taken to vanish outside.
With u = log z the Haar integral becomes a plain integral over
[log a, log b], computed with Gauss-Legendre on uniform cells in u.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq

from ..core.errors import BracketError, ConfigError
from ..core.kernels import LogKernel
from ..core.operators import MK, OperatorConfig, apply_on_grid, check_which
from ..core.quadrature import segment_nodes
from ..core.target import TargetFunction, reference_values

logger = logging.getLogger(__name__)

ArrayFn = Callable[[np.ndarray], np.ndarray]

DEFAULT_CELLS = 256
CELL_POINTS = 8
MAX_BRACKET_STEPS = 200
DELTA2_VARIATION = 0.10


@dataclass(frozen=True)
class PhiFunction:
    kind: str
    eval: ArrayFn
    params: Tuple[Tuple[str, float], ...] = ()
    delta2: Optional[bool] = None

    @property
    def name(self) -> str:
        if not self.params:
            return self.kind
        inner = ",".join(f"{k}={v:g}" for k, v in self.params)
        return f"{self.kind}({inner})"

    def __call__(self, u) -> np.ndarray:
        with np.errstate(over="ignore"):
            return np.asarray(self.eval(np.asarray(u, dtype=float)), dtype=float)


@dataclass(frozen=True)
class ModularValue:
    value: float
    integrand_cells: int

    @property
    def divergent(self) -> bool:
        return not math.isfinite(self.value)


@dataclass(frozen=True)
class Delta2Result:
    holds: bool
    M_or_witness: float


@dataclass(frozen=True)
class PhiReport:
    vanishes_at_zero: bool
    positive: bool
    nondecreasing: bool
    midpoint_convex: bool
    notes: List[str] = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return self.vanishes_at_zero and self.positive and self.nondecreasing and self.midpoint_convex


@dataclass(frozen=True)
class ModularRow:
    eta: str
    lam: float
    n: int
    modular_error: float

    def as_record(self):
        return {"eta": self.eta, "lambda": self.lam, "n": self.n, "modular_error": self.modular_error}


def power(p: float) -> PhiFunction:
    """eta(u) = u^p, p > 1 (L^p over the Haar measure)."""
    if p <= 1:
        raise ConfigError(f"power phi-function needs p > 1, got {p}")
    return PhiFunction(kind="power", eval=lambda u: u**p, params=(("p", float(p)),), delta2=True)


def exponential(alpha: float = 1.0) -> PhiFunction:
    """eta(u) = exp(u^alpha) - 1; fails the Delta2 condition."""
    if alpha <= 0:
        raise ConfigError(f"exponential phi-function needs alpha > 0, got {alpha}")
    return PhiFunction(
        kind="exponential", eval=lambda u: np.expm1(u**alpha), params=(("alpha", float(alpha)),), delta2=False
    )


def zygmund(alpha: float = 1.0, beta: float = 1.0) -> PhiFunction:
    """eta(u) = u^alpha log^beta(e + u), the interpolation-space family."""
    if alpha < 1 or beta <= 0:
        raise ConfigError(f"zygmund phi-function needs alpha >= 1 and beta > 0, got {alpha}, {beta}")
    return PhiFunction(
        kind="zygmund",
        eval=lambda u: u**alpha * np.log(math.e + u) ** beta,
        params=(("alpha", float(alpha)), ("beta", float(beta))),
        delta2=True,
    )


def custom_phi(fn: ArrayFn, name: str = "custom") -> PhiFunction:
    return PhiFunction(kind=name, eval=fn)


def parse_phi(spec: str) -> PhiFunction:
    """'power:2', 'exponential:1', 'zygmund:1,1' -> PhiFunction."""
    kind, _, args = spec.partition(":")
    try:
        values = [float(x) for x in args.split(",") if x.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad phi-function parameters in {spec!r}") from exc
    builders = {"power": power, "exponential": exponential, "zygmund": zygmund}
    if kind not in builders:
        raise ConfigError(f"Unsupported phi-function: {kind!r} (expected power, exponential or zygmund)")
    return builders[kind](*values)


def check_phi(eta: PhiFunction, u_grid: Optional[np.ndarray] = None) -> PhiReport:
    """Sampled check of the phi-function axioms."""
    u = np.geomspace(1e-3, 1e2, 400) if u_grid is None else np.asarray(u_grid, dtype=float)
    notes = []
    at_zero = float(eta(np.asarray(0.0)))
    values = eta(u)
    positive = bool(np.all(values[u > 0] > 0))
    nondecreasing = bool(np.all(np.diff(values) >= 0))
    x, y = np.meshgrid(u[::8], u[::8])
    mid = eta(0.5 * (x + y))
    avg = 0.5 * (eta(x) + eta(y))
    convex = bool(np.all(mid <= avg * (1 + 1e-12) + 1e-15))
    if not convex:
        notes.append("midpoint convexity fails on sampled pairs")
    return PhiReport(
        vanishes_at_zero=at_zero == 0.0,
        positive=positive,
        nondecreasing=nondecreasing,
        midpoint_convex=convex,
        notes=notes,
    )


def _nodes(a: float, b: float, cells: int) -> Tuple[np.ndarray, np.ndarray]:
    if not 0 < a < b:
        raise ConfigError(f"modular needs 0 < a < b, got [{a}, {b}]")
    if cells < 16:
        raise ConfigError(f"modular needs at least 16 cells, got {cells}")
    edges = np.linspace(math.log(a), math.log(b), cells + 1)
    u, w = segment_nodes(edges[:-1], edges[1:], CELL_POINTS)
    z = np.clip(np.exp(u.ravel()), a, b)
    return z, w.ravel()


def _integrate(eta: PhiFunction, values: np.ndarray, weights: np.ndarray) -> float:
    with np.errstate(over="ignore", invalid="ignore"):
        total = float(np.sum(eta(np.abs(values)) * weights))
    return total if not math.isnan(total) else math.inf


def modular(eta: PhiFunction, F: Callable, a: float, b: float, cells: int = DEFAULT_CELLS) -> ModularValue:
    """I_eta[F] = int_a^b eta(|F(z)|) dz/z."""
    z, w = _nodes(a, b, cells)
    values = np.asarray(F(z), dtype=float)
    return ModularValue(value=_integrate(eta, values, w), integrand_cells=cells)


def luxemburg_norm(
    eta: PhiFunction, F: Callable, a: float, b: float, tol: float = 1e-8, cells: int = DEFAULT_CELLS
) -> float:
    """inf { l > 0 : I_eta[F / l] <= 1 }, bracketed then refined with Brent's method."""
    if tol <= 0:
        raise ConfigError("tol must be positive")
    z, w = _nodes(a, b, cells)
    values = np.abs(np.asarray(F(z), dtype=float))
    top = float(values.max(initial=0.0))
    if top == 0.0:
        return 0.0

    def excess(ell: float) -> float:
        return _integrate(eta, values / ell, w) - 1.0

    lo = hi = top
    steps = 0
    if excess(hi) > 0:
        while excess(hi) > 0:
            lo, hi = hi, hi * 2.0
            steps += 1
            if steps > MAX_BRACKET_STEPS:
                raise BracketError(f"modular of F/l stays above 1 after {MAX_BRACKET_STEPS} doublings")
    else:
        while excess(lo) <= 0:
            hi, lo = lo, lo / 2.0
            steps += 1
            if steps > MAX_BRACKET_STEPS:
                raise BracketError(f"modular of F/l stays below 1 after {MAX_BRACKET_STEPS} halvings")
    if excess(hi) == 0:
        return hi

    # Nudge the root up by half the tolerance so that I[F/l] <= 1 holds.
    root = brentq(lambda ell: min(excess(ell), 1e300), lo, hi, xtol=1e-300, rtol=tol / 4.0, maxiter=500)
    return float(root * (1.0 + tol / 2.0))


def delta2_check(eta: PhiFunction, u_grid: Optional[np.ndarray] = None) -> Delta2Result:
    """
    Grid diagnostic for eta(2u) <= M eta(u).

    Holds when the ratio is finite everywhere and varies by less than 10% over
    the top decade of the grid; M is then the largest ratio seen. Otherwise the
    u where the ratio is largest (or first overflows) is returned as witness.
    """
    u = np.geomspace(1e-3, 1e3, 601) if u_grid is None else np.sort(np.asarray(u_grid, dtype=float))
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        top_vals = eta(2.0 * u)
        base = eta(u)
        finite = np.isfinite(top_vals) & np.isfinite(base) & (base > 0)
        ratio = np.where(finite, top_vals / np.where(base > 0, base, 1.0), np.inf)
    if not np.all(np.isfinite(ratio)):
        return Delta2Result(holds=False, M_or_witness=float(u[int(np.argmax(~np.isfinite(ratio)))]))
    decade = ratio[u >= u[-1] / 10.0]
    variation = (decade.max() - decade.min()) / decade.min()
    if variation < DELTA2_VARIATION:
        return Delta2Result(holds=True, M_or_witness=float(ratio.max()))
    return Delta2Result(holds=False, M_or_witness=float(u[int(np.argmax(ratio))]))


def _difference(F: TargetFunction, cfg: OperatorConfig, lam: float, which: str) -> Callable:
    def fn(z):
        approx = apply_on_grid(F, cfg, z, which)
        return lam * (approx - reference_values(F, cfg.range_policy, z))

    return fn


def modular_error(
    eta: PhiFunction,
    lam: float,
    F: TargetFunction,
    cfg: OperatorConfig,
    grid_cells: int = DEFAULT_CELLS,
    which: str = MK,
) -> float:
    """I_eta[lam (Op(F) - F)] over [a, b]."""
    if lam <= 0:
        raise ConfigError(f"lambda must be positive, got {lam}")
    check_which(which)
    return modular(eta, _difference(F, cfg, lam, which), cfg.a, cfg.b, grid_cells).value


def stability_gap(
    eta: PhiFunction,
    lam: float,
    F: TargetFunction,
    G: TargetFunction,
    cfg: OperatorConfig,
    grid_cells: int = DEFAULT_CELLS,
) -> Tuple[float, float]:
    """
    Both sides of the modular stability estimate with beta = 1:
    (I[lam (mk F - mk G)], 2 I[lam (F - G)]^{1/2}).
    """
    z, w = _nodes(cfg.a, cfg.b, grid_cells)
    ops = apply_on_grid(F, cfg, z, MK) - apply_on_grid(G, cfg, z, MK)
    raw = reference_values(F, cfg.range_policy, z) - reference_values(G, cfg.range_policy, z)
    lhs = _integrate(eta, lam * ops, w)
    rhs = 2.0 * math.sqrt(_integrate(eta, lam * raw, w))
    return lhs, rhs


def stability_slack(eta: PhiFunction, lam: float, cfg: OperatorConfig, eps: float = 0.05) -> float:
    """Kernel-tail term of the stability estimate: eps eta(lam) (ceil(n log b) - floor(n log a)) / Psi(e)."""
    if eps <= 0:
        raise ConfigError(f"eps must be positive, got {eps}")
    span = math.ceil(cfg.n * math.log(cfg.b)) - math.floor(cfg.n * math.log(cfg.a))
    return eps * float(eta(lam)) * span / cfg.kernel.value_at_e


def run_modular_experiment(
    F: TargetFunction,
    kernel: LogKernel,
    etas: Sequence[PhiFunction],
    lambdas: Iterable[float],
    n_list: Iterable[int],
    grid_cells: int = DEFAULT_CELLS,
    **cfg_kwargs,
) -> List[ModularRow]:
    rows = []
    lambdas = list(lambdas)
    for n in n_list:
        cfg = OperatorConfig(kernel=kernel, a=F.a, b=F.b, n=int(n), **cfg_kwargs)
        for eta in etas:
            for lam in lambdas:
                value = modular_error(eta, lam, F, cfg, grid_cells)
                rows.append(ModularRow(eta=eta.name, lam=float(lam), n=int(n), modular_error=value))
        logger.info("modular errors for %s at n=%d done", F.name, n)
    return rows
