"""
Built-in target functions.

f and g are the two benchmark functions on [0, 2]; the synthetic ones are
defined relative to the experiment interval so they live in [0, 1] there.
"""
import math
import re
from typing import Dict, List, Tuple

import numpy as np

from ..core.errors import ConfigError, DomainViolation
from ..core.target import TargetFunction
from .expression import compile_expression

BENCH_DOMAIN = (0.0, 2.0)
F_BREAKPOINTS = (0.4, 0.75, 1.25)
F_RANGE = (0.25, 0.9)
G_RANGE = (0.0, 1.2)

F_PIECEWISE = "f-piecewise"
G_OSCILLATORY = "g-oscillatory"
LOG_LINEAR = "log-linear"
SQRT_LOG = "sqrt-log"
FUNCTION_ALIASES = {"f": F_PIECEWISE, "g": G_OSCILLATORY}

_DOMAIN_SLACK = 1e-12

# closed branches: 0 <= x <= 0.4, 0.4 < x <= 0.75, 0.75 < x <= 1.25, 1.25 < x <= 2
_F_BRANCHES = (
    lambda x: 0.25 + 0.1 * x,
    lambda x: 0.85 - 0.05 * np.sin(5.0 * x),
    lambda x: 0.4 + 0.1 * x**2,
    lambda x: 0.65 + 0.02 * np.cos(3.0 * x),
)


def _check_bench_domain(x: np.ndarray, name: str) -> None:
    lo, hi = BENCH_DOMAIN
    bad = (x < lo - _DOMAIN_SLACK) | (x > hi + _DOMAIN_SLACK) | np.isnan(x)
    if np.any(bad):
        raise DomainViolation(f"{name}({x[bad].flat[0]!r}) is outside [{lo}, {hi}]")


def builtin_f(x):
    x = np.asarray(x, dtype=float)
    _check_bench_domain(x, "f")
    p1, p2, p3 = F_BREAKPOINTS
    v = np.atleast_1d(x)
    conds = [v <= p1, (v > p1) & (v <= p2), (v > p2) & (v <= p3), v > p3]
    out = np.select(conds, [branch(v) for branch in _F_BRANCHES])
    return out.reshape(x.shape) if x.ndim else float(out[0])


def builtin_g(x):
    x = np.asarray(x, dtype=float)
    _check_bench_domain(x, "g")
    out = 0.2 + np.exp(np.sin(x)) * np.sin(x**2) / (1.0 + x**4)
    return out if out.ndim else float(out)


def jump_audit() -> List[Dict[str, float]]:
    """Signed jump f(p+) - f(p) at each branch point of f."""
    out = []
    for i, p in enumerate(F_BREAKPOINTS):
        left = float(_F_BRANCHES[i](p))
        right = float(_F_BRANCHES[i + 1](p))
        out.append({"point": p, "left": left, "right": right, "jump": right - left})
    return out


def _log_fraction(z, a: float, b: float) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    return np.clip((np.log(z) - math.log(a)) / (math.log(b) - math.log(a)), 0.0, 1.0)


def f_target(interval: Tuple[float, float]) -> TargetFunction:
    return TargetFunction(
        eval=builtin_f, domain=tuple(interval), declared_range=F_RANGE, breakpoints=F_BREAKPOINTS, name=F_PIECEWISE
    )


def g_target(interval: Tuple[float, float]) -> TargetFunction:
    return TargetFunction(eval=builtin_g, domain=tuple(interval), declared_range=G_RANGE, name=G_OSCILLATORY)


def log_linear(interval: Tuple[float, float]) -> TargetFunction:
    """(log z - log a) / (log b - log a): Lipschitz in log z with constant 1/log(b/a)."""
    a, b = interval
    return TargetFunction(eval=lambda z: _log_fraction(z, a, b), domain=(a, b), name=LOG_LINEAR)


def sqrt_log(interval: Tuple[float, float]) -> TargetFunction:
    """Square root of the log fraction; log-Hölder of order 1/2, no better."""
    a, b = interval
    return TargetFunction(eval=lambda z: np.sqrt(_log_fraction(z, a, b)), domain=(a, b), name=SQRT_LOG)


def constant(c: float, interval: Tuple[float, float]) -> TargetFunction:
    c = float(c)
    return TargetFunction(
        eval=lambda z: np.full(np.shape(z), c), domain=tuple(interval), declared_range=(0.0, 1.0), name=f"constant({c:g})"
    )


def expression_target(text: str, interval: Tuple[float, float]) -> TargetFunction:
    fn = compile_expression(text)
    return TargetFunction(eval=fn, domain=tuple(interval), name=f"expr:{text}")


_CONSTANT = re.compile(r"^constant\(\s*([-+0-9.eE]+)\s*\)$")

_BUILDERS = {
    F_PIECEWISE: f_target,
    G_OSCILLATORY: g_target,
    LOG_LINEAR: log_linear,
    SQRT_LOG: sqrt_log,
}


def make_target(function_id: str, interval: Tuple[float, float]) -> TargetFunction:
    """
    Resolve a function id: f-piecewise, g-oscillatory, log-linear, sqrt-log,
    constant(c) or expr:<expression in x>.
    """
    function_id = FUNCTION_ALIASES.get(function_id, function_id)
    if function_id.startswith("expr:"):
        return expression_target(function_id[len("expr:"):], interval)
    m = _CONSTANT.match(function_id)
    if m:
        try:
            return constant(float(m.group(1)), interval)
        except ValueError as exc:
            raise ConfigError(f"bad constant in {function_id!r}") from exc
    if function_id not in _BUILDERS:
        raise ConfigError(
            f"Unsupported function: {function_id!r} "
            f"(expected f-piecewise, g-oscillatory, log-linear, sqrt-log, constant(c) or expr:...)"
        )
    if function_id in (F_PIECEWISE, G_OSCILLATORY):
        lo, hi = BENCH_DOMAIN
        a, b = interval
        if a < lo or b > hi:
            raise ConfigError(f"{function_id} is defined on [{lo}, {hi}], interval [{a}, {b}] leaves it")
    return _BUILDERS[function_id](interval)
