"""
Operator tests: brute-force oracles, constant reproduction, range policies
"""
import math

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.optimize import brentq

from src.core.errors import ConfigError, QuadratureError, RangeViolation
from src.core.kernels import get_kernel
from src.core.operators import (
    TRUNCATE_CELL,
    OperatorConfig,
    apply_on_grid,
    cell_mean,
    cell_means,
    gm_apply,
    mk_apply,
    operator_pair,
    samples,
)
from src.core.quadrature import COMPOSITE_SIMPSON, QuadratureSpec, integrate_segments, split_panels
from src.core.target import (
    AFFINE_RESCALE,
    ASSERT_UNIT,
    CLIP_TO_UNIT,
    TargetFunction,
    level_crossings,
    reference_values,
    unit_view,
)
from src.harness.functions import constant, sqrt_log

A, B = 0.05, 2.0


def _cfg(kernel, n, **kwargs):
    return OperatorConfig(kernel=kernel, a=A, b=B, n=n, **kwargs)


def _gm_oracle(F, kernel, n, z):
    ks = range(math.ceil(n * math.log(A)), math.floor(n * math.log(B)) + 1)
    raw = {k: float(kernel(n * math.log(z) - k)) for k in ks}
    top = max(raw.values())
    vals = {k: min(max(float(F(min(max(math.exp(k / n), A), B))), 0.0), 1.0) for k in ks}
    return max(min(vals[k], raw[k] / top) for k in ks)


def _mk_oracle_means(F, n, scale=1.0):
    """Cell means of F / scale by adaptive quadrature, last cell clamped at b"""
    ks = range(math.ceil(n * math.log(A)), math.floor(n * math.log(B)) + 1)
    top = math.log(B)
    jumps = [math.log(p) for p in F.breakpoints if A < p < B]

    def G(u):
        return float(F(min(max(math.exp(u), A), B))) / scale

    means = []
    for k in ks:
        lo, hi = k / n, (k + 1) / n
        upper = min(hi, top)
        inner = [p for p in jumps if lo < p < upper] or None
        integral, _ = quad(G, lo, upper, points=inner, epsabs=1e-14, epsrel=1e-13, limit=200)
        integral += max(hi - top, 0.0) * G(top)
        means.append(integral * n)
    return np.array(means)


def test_gm_matches_oracle(kernel, g_oscillatory):
    """Vectorised gm equals the textbook double loop"""
    cfg = _cfg(kernel, 10)
    z = np.linspace(A, B, 37)
    got = apply_on_grid(g_oscillatory, cfg, z, "gm")
    expected = [_gm_oracle(g_oscillatory, kernel, 10, zi) for zi in z]
    np.testing.assert_allclose(got, expected, rtol=1e-12, atol=1e-14)


def test_mk_cell_means_match_adaptive_quadrature(g_oscillatory, ramp):
    """Gauss-Legendre cell means agree with adaptive quadrature, including the clamped last cell"""
    cfg = _cfg(ramp, 10, range_policy=AFFINE_RESCALE)
    _, span = g_oscillatory.declared_range
    expected = _mk_oracle_means(g_oscillatory, 10, scale=span)
    np.testing.assert_allclose(cell_means(g_oscillatory, cfg), expected, rtol=1e-9)


def test_mk_cell_means_split_at_breakpoints(f_piecewise, ramp):
    """Cells containing a jump of f are integrated piece by piece; f stays inside [0, 1]"""
    cfg = _cfg(ramp, 10)
    np.testing.assert_allclose(cell_means(f_piecewise, cfg), _mk_oracle_means(f_piecewise, 10), rtol=1e-9)


def test_constant_reproduction(kernel, const04, grid):
    """Both operators reproduce constants"""
    cfg = _cfg(kernel, 10)
    for op in ("gm", "mk"):
        err = np.max(np.abs(apply_on_grid(const04, cfg, grid, op) - 0.4))
        assert err <= 1e-12, f"{kernel.kind}/{op} constant error {err:.2e}"


def test_pointwise_matches_grid(f_piecewise, ramp):
    cfg = _cfg(ramp, 25)
    z = 0.83
    assert gm_apply(f_piecewise, cfg, z) == pytest.approx(float(apply_on_grid(f_piecewise, cfg, [z], "gm")[0]))
    assert mk_apply(f_piecewise, cfg, z) == pytest.approx(float(apply_on_grid(f_piecewise, cfg, [z], "mk")[0]))


def test_gm_at_node_ramp(loglin, ramp):
    """At a node the ramp weights are 1 there, 1/2 at the neighbours and 0 beyond"""
    cfg = _cfg(ramp, 10)
    k = 3
    z = math.exp(k / 10)
    F = [float(loglin(math.exp(j / 10))) for j in (k - 1, k, k + 1)]
    expected = max(F[1], min(max(F[0], F[2]), 0.5))
    assert gm_apply(loglin, cfg, z) == pytest.approx(expected, abs=1e-12)


def test_outputs_in_unit_range(g_oscillatory, kernel, grid):
    """clip-to-unit keeps every output in [0, 1]"""
    cfg = _cfg(kernel, 25)
    for values in operator_pair(g_oscillatory, cfg, grid).values():
        assert values.min() >= 0.0 and values.max() <= 1.0


def test_monotone_operator(loglin, ramp, grid):
    """F <= G pointwise implies Op(F) <= Op(G)"""
    G = sqrt_log((A, B))
    cfg = _cfg(ramp, 20)
    for op in ("gm", "mk"):
        assert np.all(apply_on_grid(loglin, cfg, grid, op) <= apply_on_grid(G, cfg, grid, op) + 1e-15)


def test_error_decreases_with_n(loglin, ramp, grid):
    errors = []
    for n in (10, 40, 160):
        cfg = _cfg(ramp, n)
        errors.append(np.max(np.abs(apply_on_grid(loglin, cfg, grid, "mk") - loglin(grid))))
    assert errors[0] > errors[1] > errors[2]


def test_assert_unit_range_rejects_g(g_oscillatory, ramp, grid):
    """g exceeds 1 near x = 1 (g(1) ~ 1.176)"""
    cfg = _cfg(ramp, 10, range_policy=ASSERT_UNIT)
    with pytest.raises(RangeViolation):
        samples(g_oscillatory, cfg)


def test_affine_rescale_stays_in_declared_range(g_oscillatory, ramp, grid):
    cfg = _cfg(ramp, 25, range_policy=AFFINE_RESCALE)
    lo, hi = g_oscillatory.declared_range
    for op in ("gm", "mk"):
        values = apply_on_grid(g_oscillatory, cfg, grid, op)
        assert values.min() >= lo - 1e-12 and values.max() <= hi + 1e-12
    ref = reference_values(g_oscillatory, AFFINE_RESCALE, grid)
    assert ref.max() > 1.0


def test_truncate_cell_only_changes_last_cell(g_oscillatory, ramp):
    clamp = cell_means(g_oscillatory, _cfg(ramp, 10))
    trunc = cell_means(g_oscillatory, _cfg(ramp, 10, extension=TRUNCATE_CELL))
    np.testing.assert_array_equal(clamp[:-1], trunc[:-1])
    assert clamp[-1] != trunc[-1]


def test_cell_mean_index_check(g_oscillatory, ramp):
    cfg = _cfg(ramp, 10)
    assert cell_mean(g_oscillatory, cfg, 0) == pytest.approx(cell_means(g_oscillatory, cfg)[29])
    with pytest.raises(ConfigError):
        cell_mean(g_oscillatory, cfg, 7)


def test_simpson_close_to_gauss(g_oscillatory, ramp):
    gauss = cell_means(g_oscillatory, _cfg(ramp, 10, range_policy=AFFINE_RESCALE))
    simpson_spec = QuadratureSpec(COMPOSITE_SIMPSON, 33)
    simpson = cell_means(g_oscillatory, _cfg(ramp, 10, quadrature=simpson_spec, range_policy=AFFINE_RESCALE))
    np.testing.assert_allclose(simpson, gauss, atol=1e-7)


def test_integrate_segments_polynomial():
    """8-point Gauss-Legendre is exact for degree 15"""
    got = integrate_segments(lambda u: u**15, [0.0, 1.0], [1.0, 2.0], QuadratureSpec())
    np.testing.assert_allclose(got, [1 / 16, (2**16 - 1) / 16], rtol=1e-13)


def test_quadrature_spec_validation():
    with pytest.raises(QuadratureError):
        QuadratureSpec(points=1)
    with pytest.raises(QuadratureError):
        QuadratureSpec(rule="midpoint")


def test_grid_validation(g_oscillatory, ramp):
    cfg = _cfg(ramp, 10)
    with pytest.raises(ConfigError):
        apply_on_grid(g_oscillatory, cfg, [1.0, 0.5])
    with pytest.raises(ConfigError):
        apply_on_grid(g_oscillatory, cfg, [0.01, 1.0])
    with pytest.raises(ConfigError):
        apply_on_grid(g_oscillatory, cfg, [1.0], which="xx")


def test_config_rejects_unknown_policies(ramp):
    with pytest.raises(ConfigError):
        _cfg(ramp, 10, extension="reflect")
    with pytest.raises(ConfigError):
        _cfg(ramp, 10, range_policy="wrap")


def test_large_n_stays_finite(g_oscillatory):
    """No overflow at n = 10^4: kernels are evaluated in log form"""
    cfg = _cfg(get_kernel("logistic"), 10_000)
    values = apply_on_grid(g_oscillatory, cfg, np.linspace(A, B, 50), "gm")
    assert np.all(np.isfinite(values))


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_small_n_matches_oracle(kernel, f_piecewise, n):
    """Low densities: 20 random points per case against direct enumeration"""
    z = np.sort(np.random.default_rng(n).uniform(A, B, 20))
    got = apply_on_grid(f_piecewise, _cfg(kernel, n), z, "gm")
    expected = [_gm_oracle(f_piecewise, kernel, n, zi) for zi in z]
    np.testing.assert_allclose(got, expected, rtol=0, atol=1e-14)


@pytest.mark.parametrize("c", [0.0, 0.3, 1.0])
@pytest.mark.parametrize("n", [5, 50])
def test_constant_reproduction_levels(kernel, c, n):
    F = constant(c, (A, B))
    cfg = _cfg(kernel, n)
    z = np.linspace(A, B, 100)
    for op in ("gm", "mk"):
        assert np.max(np.abs(apply_on_grid(F, cfg, z, op) - c)) <= 1e-12


def _crossings(fn, level, lo, hi, samples=2001):
    """Roots of fn(u) = level located by sign changes on a uniform u grid"""
    u = np.linspace(lo, hi, samples)
    d = np.array([fn(t) for t in u]) - level
    return [brentq(lambda t: fn(t) - level, u[i], u[i + 1], xtol=1e-15) for i in np.nonzero(d[:-1] * d[1:] < 0)[0]]


def _mk_oracle(F, kernel, n, z):
    """Clipped cell means by adaptive quadrature, combined with directly enumerated weights"""
    ks = list(range(math.ceil(n * math.log(A)), math.floor(n * math.log(B)) + 1))
    top = math.log(B)

    def G(u):
        return min(max(float(F(min(max(math.exp(u), A), B))), 0.0), 1.0)

    def raw(u):
        return float(F(min(max(math.exp(u), A), B)))

    splits = [math.log(p) for p in F.breakpoints if A < p < B]
    splits += _crossings(raw, 0.0, math.log(A), top) + _crossings(raw, 1.0, math.log(A), top)
    means = {}
    for k in ks:
        lo, hi = k / n, (k + 1) / n
        upper = min(hi, top)
        inner = sorted(p for p in splits if lo < p < upper) or None
        integral, _ = quad(G, lo, upper, points=inner, epsabs=1e-13, epsrel=1e-12, limit=500)
        integral += max(hi - top, 0.0) * G(top)
        means[k] = integral * n
    weights = {k: float(kernel(n * math.log(z) - k)) for k in ks}
    scale = max(weights.values())
    return max(min(means[k], weights[k] / scale) for k in ks)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
@pytest.mark.parametrize("fixture", ["f_piecewise", "g_oscillatory"])
def test_small_n_mk_matches_oracle(kernel, fixture, n, request):
    """Cells up to a full unit wide in log z, with g clipped where it passes 1"""
    F = request.getfixturevalue(fixture)
    z = np.sort(np.random.default_rng(100 + n).uniform(A, B, 20))
    got = apply_on_grid(F, _cfg(kernel, n), z, "mk")
    expected = [_mk_oracle(F, kernel, n, zi) for zi in z]
    np.testing.assert_allclose(got, expected, rtol=0, atol=1e-9)


def test_clip_kinks_of_g(g_oscillatory):
    """g passes 1 on the way up near x = 0.75 and on the way down near x = 1.21"""
    kinks = level_crossings(g_oscillatory, (0.0, 1.0))
    assert len(kinks) == 2
    assert 0.74 < kinks[0] < 0.76 and 1.19 < kinks[1] < 1.23
    np.testing.assert_allclose(g_oscillatory(np.array(kinks)), 1.0, atol=1e-9)
    G, _ = unit_view(g_oscillatory, CLIP_TO_UNIT)
    assert set(kinks) <= set(G.breakpoints)


def test_no_clip_kinks_inside_unit_range(f_piecewise):
    G, _ = unit_view(f_piecewise, CLIP_TO_UNIT)
    assert G.breakpoints == f_piecewise.breakpoints


def _unit_difference(F, G):
    """|clip F - clip G| with every kink and jump registered as a breakpoint"""

    def clipped_gap(z):
        return np.clip(F(z), 0.0, 1.0) - np.clip(G(z), 0.0, 1.0)

    signed = TargetFunction(eval=clipped_gap, domain=F.domain)
    breaks = set(F.breakpoints) | set(G.breakpoints)
    breaks |= set(level_crossings(F, (0.0, 1.0))) | set(level_crossings(G, (0.0, 1.0)))
    breaks |= set(level_crossings(signed, (0.0,)))
    return TargetFunction(eval=lambda z: np.abs(clipped_gap(z)), domain=F.domain, breakpoints=tuple(sorted(breaks)))


@pytest.mark.parametrize("op,atol", [("gm", 1e-12), ("mk", 1e-10)])
def test_operator_lipschitz_on_f_and_g(kernel, f_piecewise, g_oscillatory, grid, op, atol):
    """|Op(f) - Op(g)| <= Op(|f - g|) pointwise"""
    cfg = _cfg(kernel, 25)
    gap = np.abs(apply_on_grid(f_piecewise, cfg, grid, op) - apply_on_grid(g_oscillatory, cfg, grid, op))
    bound = apply_on_grid(_unit_difference(f_piecewise, g_oscillatory), cfg, grid, op)
    assert np.all(gap <= bound + atol), f"worst excess {np.max(gap - bound):.3e}"


def test_log_identity_worked_example(log_identity, ramp):
    """F = log z on [1, e] with n = 2: samples 0, 1/2, 1 and cell means 1/4, 3/4, 1"""
    cfg = OperatorConfig(kernel=ramp, a=1.0, b=math.e, n=2)
    z = np.array([1.0, math.exp(0.5), math.e])
    np.testing.assert_allclose(samples(log_identity, cfg), [0.0, 0.5, 1.0], atol=1e-12)
    np.testing.assert_allclose(cell_means(log_identity, cfg), [0.25, 0.75, 1.0], atol=1e-12)
    np.testing.assert_allclose(apply_on_grid(log_identity, cfg, z, "gm"), [0.5, 0.5, 1.0], atol=1e-12)
    np.testing.assert_allclose(apply_on_grid(log_identity, cfg, z, "mk"), [0.5, 0.75, 1.0], atol=1e-12)


def test_split_panels():
    lo, hi, owner = split_panels([0.0, 1.0, 2.0], [0.1, 1.0, 2.05], 0.0625)
    np.testing.assert_allclose(lo, [0.0, 0.05, 1.0, 2.0])
    np.testing.assert_allclose(hi, [0.05, 0.1, 1.0, 2.05])
    np.testing.assert_array_equal(owner, [0, 0, 1, 2])


def test_wide_segment_is_subdivided():
    """A degree-30 polynomial over a unit segment needs the panels"""
    got = integrate_segments(lambda u: u**30, [0.0], [1.0], QuadratureSpec())
    np.testing.assert_allclose(got, [1 / 31], rtol=1e-12)


def test_quadrature_spec_rejects_nonpositive_panel():
    with pytest.raises(QuadratureError):
        QuadratureSpec(max_panel=0.0)
