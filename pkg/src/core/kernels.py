"""
Sigmoidal activations and the bell-shaped kernels built from them.

Kernels are evaluated in log-argument form: for z > 0 with s = log z,

    eval_log(s) = Psi(e^s) = 1/2 [sigma(s + 1) - sigma(s - 1)]

so the operators never form z**n explicitly.
"""
import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Dict, Iterable, List, Optional

import numpy as np
from scipy.special import expit

from .errors import ConfigError, KernelConditionError

logger = logging.getLogger(__name__)

ArrayFn = Callable[[np.ndarray], np.ndarray]

BUILTIN_KINDS = ("logistic", "tanh", "ramp", "three-level")
KIND_ALIASES = {"hyperbolic-tangent": "tanh", "three_level": "three-level"}

DELTA1_TOL = 1e-9
DEFAULT_MOMENT_GRID = 4096
DEFAULT_MOMENT_TRUNCATION = 60


@dataclass(frozen=True)
class SigmoidalActivation:
    """A sigmoid with the structural metadata the convergence theory uses."""

    kind: str
    eval: ArrayFn
    decay_exponent_v: float
    smooth: bool
    satisfies_delta2_concavity: bool

    def __call__(self, s):
        return self.eval(np.asarray(s, dtype=float))


@dataclass(frozen=True)
class LogKernel:
    source: SigmoidalActivation
    eval_log: ArrayFn
    support_radius: float
    value_at_e: float

    @property
    def kind(self) -> str:
        return self.source.kind

    @property
    def compact(self) -> bool:
        return math.isfinite(self.support_radius)

    def __call__(self, s):
        return self.eval_log(np.asarray(s, dtype=float))


@dataclass(frozen=True)
class ActivationReport:
    kind: str
    delta1_residual: float
    monotone: bool
    lower_limit_error: float
    upper_limit_error: float
    concave_on_positive: bool
    tail_weighted_max: float
    notes: List[str] = field(default_factory=list)

    @property
    def delta1(self) -> bool:
        return self.delta1_residual <= DELTA1_TOL

    @property
    def delta3(self) -> bool:
        return self.tail_weighted_max < 1.0


def _logistic(s: np.ndarray) -> np.ndarray:
    return expit(s)


def _tanh(s: np.ndarray) -> np.ndarray:
    return 0.5 * (np.tanh(s) + 1.0)


def _ramp(s: np.ndarray) -> np.ndarray:
    return np.clip(s + 0.5, 0.0, 1.0)


def _three_level(s: np.ndarray) -> np.ndarray:
    # closed at both -1/2 and 1/2
    return np.where(s < -0.5, 0.0, np.where(s > 0.5, 1.0, 0.5))


def _ramp_kernel(s: np.ndarray) -> np.ndarray:
    a = np.abs(s)
    return np.where(a <= 0.5, 0.5, np.where(a <= 1.5, 0.5 * (1.5 - a), 0.0))


def _three_level_kernel(s: np.ndarray) -> np.ndarray:
    # |s| = 1/2 takes the outer value so that the shifted copies sum to one
    a = np.abs(s)
    return np.where(a < 0.5, 0.5, np.where(a <= 1.5, 0.25, 0.0))


_ACTIVATIONS = {
    "logistic": (_logistic, True, True),
    "tanh": (_tanh, True, True),
    "ramp": (_ramp, False, False),
    "three-level": (_three_level, False, False),
}

_PIECEWISE_KERNELS = {
    "ramp": _ramp_kernel,
    "three-level": _three_level_kernel,
}


def normalize_kind(kind: str) -> str:
    kind = KIND_ALIASES.get(kind, kind)
    if kind not in BUILTIN_KINDS:
        raise ConfigError(f"Unsupported kernel kind: {kind!r} (expected one of {', '.join(BUILTIN_KINDS)})")
    return kind


@lru_cache(maxsize=None)
def get_activation(kind: str) -> SigmoidalActivation:
    kind = normalize_kind(kind)
    fn, smooth, concave = _ACTIVATIONS[kind]
    # Smooth kinds decay exponentially, so any v works; 2 is recorded as witness.
    return SigmoidalActivation(
        kind=kind, eval=fn, decay_exponent_v=2.0, smooth=smooth, satisfies_delta2_concavity=concave
    )


def custom_activation(
    fn: ArrayFn, decay_exponent_v: float = 1.0, smooth: bool = False, concave: bool = False
) -> SigmoidalActivation:
    if decay_exponent_v <= 0:
        raise ConfigError("decay_exponent_v must be positive")
    return SigmoidalActivation(
        kind="custom",
        eval=fn,
        decay_exponent_v=float(decay_exponent_v),
        smooth=smooth,
        satisfies_delta2_concavity=concave,
    )


def delta1_residual(activation: SigmoidalActivation, samples: int = 10_000, seed: int = 0, span: float = 20.0) -> float:
    """max |sigma(s) + sigma(-s) - 1| over random s in [-span, span] plus the breakpoints +-1/2."""
    rng = np.random.default_rng(seed)
    s = np.concatenate([rng.uniform(-span, span, samples), [0.0, 0.5, -0.5, 1.0, 1.5]])
    return float(np.max(np.abs(activation(s) + activation(-s) - 1.0)))


def make_kernel(activation: SigmoidalActivation) -> LogKernel:
    residual = delta1_residual(activation)
    if residual > DELTA1_TOL:
        raise KernelConditionError(
            f"activation {activation.kind!r} is not centred: Delta1 residual {residual:.3e} > {DELTA1_TOL:g}"
        )

    if activation.kind in _PIECEWISE_KERNELS:
        eval_log = _PIECEWISE_KERNELS[activation.kind]
        support = 1.5
    else:
        sigma = activation.eval

        # evaluate on the left half, where both terms are small, and mirror
        def eval_log(s: np.ndarray) -> np.ndarray:
            t = -np.abs(s)
            return 0.5 * (sigma(t + 1.0) - sigma(t - 1.0))

        support = math.inf

    value_at_e = float(eval_log(np.asarray(1.0)))
    if value_at_e <= 0:
        raise KernelConditionError(f"kernel of {activation.kind!r} vanishes at e")
    logger.debug("built %s kernel, Psi(e)=%.6g, support=%s", activation.kind, value_at_e, support)
    return LogKernel(source=activation, eval_log=eval_log, support_radius=support, value_at_e=value_at_e)


@lru_cache(maxsize=None)
def get_kernel(kind: str) -> LogKernel:
    return make_kernel(get_activation(kind))


def closed_form(kind: str, z) -> np.ndarray:
    """Kernel values at z > 0 from the published closed forms."""
    kind = normalize_kind(kind)
    z = np.asarray(z, dtype=float)
    e = math.e
    if kind == "logistic":
        return z * (e**2 - 1.0) / (2.0 * (z + e) * (e * z + 1.0))
    if kind == "tanh":
        return 0.5 * z**2 * (e**4 - 1.0) / (z**2 * (1.0 + e**4 + e**2 * z**2) + e**2)
    return _PIECEWISE_KERNELS[kind](np.log(z))


def partition_of_unity_residual(kernel: LogKernel, s, truncation: int = DEFAULT_MOMENT_TRUNCATION):
    """|sum_{k=-K}^{K} Psi(s - k) - 1|, scalar or elementwise."""
    if truncation < 2:
        raise ConfigError("truncation K must be at least 2")
    s = np.asarray(s, dtype=float)
    k = np.arange(-truncation, truncation + 1, dtype=float)
    total = kernel(s[..., None] - k).sum(axis=-1)
    residual = np.abs(total - 1.0)
    return float(residual) if residual.ndim == 0 else residual


def moment(
    kernel: LogKernel,
    order: float,
    truncation: int = DEFAULT_MOMENT_TRUNCATION,
    grid: int = DEFAULT_MOMENT_GRID,
) -> float:
    """
    Grid estimate of the generalized absolute moment of the kernel.

    The expression is 1-periodic in log u, so s scans [0, 1) with `grid`
    points and k runs over [-truncation, truncation].
    """
    if order < 0:
        raise ConfigError(f"moment order must be nonnegative, got {order}")
    if grid < 1 or truncation < 1:
        raise ConfigError("moment grid and truncation must be positive")
    s = np.arange(grid, dtype=float) / grid
    k = np.arange(-truncation, truncation + 1, dtype=float)
    t = s[:, None] - k
    values = kernel(t) * np.abs(t) ** order
    return float(values.max())


def tail_sup(kernel: LogKernel, s, gamma_n: float, order: float = 0.0, truncation: Optional[int] = None) -> float:
    """
    sup over |s - k| >= gamma_n of Psi(s - k)|s - k|^order.

    Tends to 0 as gamma_n grows for kernels with enough decay; exactly 0 for
    compactly supported kernels once gamma_n exceeds the support radius.
    """
    if gamma_n <= 0:
        raise ConfigError("gamma_n must be positive")
    s = np.atleast_1d(np.asarray(s, dtype=float))
    if truncation is None:
        truncation = int(math.ceil(gamma_n)) + DEFAULT_MOMENT_TRUNCATION
    centre = np.floor(s)
    k = np.arange(-truncation, truncation + 1, dtype=float)
    t = (s - centre)[:, None] - k
    far = np.abs(t) >= gamma_n
    values = np.where(far, kernel(t) * np.abs(t) ** order, 0.0)
    return float(values.max()) if values.size else 0.0


def check_activation(activation: SigmoidalActivation, samples: int = 10_000, seed: int = 0) -> ActivationReport:
    """Sampled diagnostics for the sigmoid conditions (limits, monotonicity, Delta1-Delta3)."""
    notes = []
    grid = np.linspace(-20.0, 20.0, 4001)
    values = activation(grid)
    monotone = bool(np.all(np.diff(values) >= -1e-15))
    if not monotone:
        notes.append("not nondecreasing on [-20, 20]")

    lower = float(abs(activation(np.asarray(-50.0))))
    upper = float(abs(activation(np.asarray(50.0)) - 1.0))

    positive = np.linspace(0.0, 20.0, 2001)
    second = np.diff(activation(positive), 2)
    concave = bool(np.all(second <= 1e-12))

    v = activation.decay_exponent_v
    left = -np.geomspace(10.0, 200.0, 256)
    tail = float(np.max(np.abs(left) ** (1.0 + v) * np.abs(activation(left))))

    residual = delta1_residual(activation, samples=samples, seed=seed)
    if residual > DELTA1_TOL:
        notes.append(f"Delta1 residual {residual:.3e}")
    if activation.satisfies_delta2_concavity and not concave:
        notes.append("declared concave on R+ but sampled second differences are positive")
    return ActivationReport(
        kind=activation.kind,
        delta1_residual=residual,
        monotone=monotone,
        lower_limit_error=lower,
        upper_limit_error=upper,
        concave_on_positive=concave,
        tail_weighted_max=tail,
        notes=notes,
    )


def kernel_catalogue(kinds: Iterable[str] = BUILTIN_KINDS) -> List[Dict]:
    """JSON-ready description of each kernel: support, Psi(e) and moments of order 0, 1, 2."""
    rows = []
    for kind in kinds:
        kernel = get_kernel(kind)
        rows.append(
            {
                "kind": kernel.kind,
                "support_radius": kernel.support_radius if kernel.compact else None,
                "value_at_e": kernel.value_at_e,
                "moments": {str(j): moment(kernel, j) for j in (0, 1, 2)},
            }
        )
    return rows
