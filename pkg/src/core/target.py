"""
Target functions and the range policies that bring them into [0, 1].
"""
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Tuple

import numpy as np
from scipy.optimize import brentq

from .errors import ConfigError, RangeViolation

ArrayFn = Callable[[np.ndarray], np.ndarray]

ASSERT_UNIT = "assert-unit-range"
CLIP_TO_UNIT = "clip-to-unit"
AFFINE_RESCALE = "affine-rescale"
RANGE_POLICIES = (ASSERT_UNIT, CLIP_TO_UNIT, AFFINE_RESCALE)

UNIT_SLACK = 1e-12
CROSSING_SAMPLES = 4097


@dataclass(frozen=True)
class TargetFunction:
    """A vectorised function of z on [a, b]."""

    eval: ArrayFn
    domain: Tuple[float, float]
    declared_range: Tuple[float, float] = (0.0, 1.0)
    breakpoints: Tuple[float, ...] = ()
    name: str = "custom"

    def __post_init__(self):
        object.__setattr__(self, "domain", tuple(float(x) for x in self.domain))
        object.__setattr__(self, "declared_range", tuple(float(x) for x in self.declared_range))
        object.__setattr__(self, "breakpoints", tuple(float(x) for x in self.breakpoints))
        a, b = self.domain
        if not (0 < a < b):
            raise ConfigError(f"target domain must satisfy 0 < a < b, got {self.domain}")

    @property
    def a(self) -> float:
        return self.domain[0]

    @property
    def b(self) -> float:
        return self.domain[1]

    def __call__(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        out = np.asarray(self.eval(z), dtype=float)
        return np.array(np.broadcast_to(out, z.shape), dtype=float)

    def with_domain(self, a: float, b: float) -> "TargetFunction":
        return TargetFunction(
            eval=self.eval,
            domain=(float(a), float(b)),
            declared_range=self.declared_range,
            breakpoints=self.breakpoints,
            name=self.name,
        )


def check_policy(policy: str) -> str:
    if policy not in RANGE_POLICIES:
        raise ConfigError(f"Unsupported range policy: {policy!r} (expected one of {', '.join(RANGE_POLICIES)})")
    return policy


def unit_view(F: TargetFunction, policy: str) -> Tuple[TargetFunction, Callable[[np.ndarray], np.ndarray]]:
    """
    The function the operators actually see, and the map back to F's scale.

    clip-to-unit clips values into [0, 1]; affine-rescale maps the declared
    range onto [0, 1] and the returned inverse undoes it; assert-unit-range
    leaves F untouched (samples are checked later by enforce_unit).
    """
    check_policy(policy)
    if policy == CLIP_TO_UNIT:
        kinks = level_crossings(F, (0.0, 1.0))
        return _wrap(F, lambda z: np.clip(F(z), 0.0, 1.0), extra_breaks=kinks), _identity
    if policy == AFFINE_RESCALE:
        lo, hi = F.declared_range
        if not hi > lo:
            raise ConfigError(f"declared range of {F.name} is degenerate: {F.declared_range}")
        span = hi - lo
        return _wrap(F, lambda z: (F(z) - lo) / span), lambda r: lo + np.asarray(r) * span
    return F, _identity


def enforce_unit(values: np.ndarray, policy: str, what: str = "sample") -> np.ndarray:
    """Range check applied to samples or cell means right before the lattice combine."""
    values = np.asarray(values, dtype=float)
    outside = (values < -UNIT_SLACK) | (values > 1.0 + UNIT_SLACK)
    if np.any(outside):
        if policy == ASSERT_UNIT or policy == AFFINE_RESCALE:
            bad = values[outside][0]
            raise RangeViolation(f"{what} value {bad!r} outside [0, 1] under {policy}")
    return np.clip(values, 0.0, 1.0)


def reference_values(F: TargetFunction, policy: str, z) -> np.ndarray:
    """Target values errors are measured against: clipped under clip-to-unit, raw otherwise."""
    check_policy(policy)
    values = F(z)
    if policy == CLIP_TO_UNIT:
        return np.clip(values, 0.0, 1.0)
    return values


@lru_cache(maxsize=64)
def level_crossings(F: TargetFunction, levels: Tuple[float, ...]) -> Tuple[float, ...]:
    """
    Points z in F's domain where F crosses one of the levels.

    Sign changes are located on a log-uniform sample of the domain and refined
    with Brent's method in log z. A jump across a level is reported next to its
    breakpoint.
    """
    a, b = F.domain
    u = np.linspace(math.log(a), math.log(b), CROSSING_SAMPLES)

    def at(t):
        return F(np.clip(np.exp(t), a, b))

    values = at(u)
    found = []
    for level in levels:
        d = values - level
        for i in np.nonzero(d[:-1] * d[1:] < 0)[0]:
            try:
                root = brentq(lambda t: float(at(t)) - level, u[i], u[i + 1], xtol=1e-14)
            except ValueError:
                continue
            found.append(float(np.clip(math.exp(root), a, b)))
    return tuple(sorted(found))


def _wrap(F: TargetFunction, fn: ArrayFn, extra_breaks: Tuple[float, ...] = ()) -> TargetFunction:
    return TargetFunction(
        eval=fn,
        domain=F.domain,
        declared_range=(0.0, 1.0),
        breakpoints=tuple(sorted(set(F.breakpoints) | set(extra_breaks))),
        name=F.name,
    )


def _identity(values):
    return np.asarray(values, dtype=float)
