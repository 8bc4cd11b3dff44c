"""
Convergence diagnostics: modulus, rate bounds, error norms, order fitting
"""
import json
import math

import numpy as np
import pytest

from src.analysis.convergence import (
    certificate,
    error_norms,
    fit_order,
    gm_rate_bound,
    holder_constant,
    holder_rate_bound,
    log_modulus,
    mk_rate_bound,
    null_sequence,
    rate_report,
    sup_errors,
)
from src.core.errors import ConfigError, EmptyWindow, NumericError
from src.core.kernels import get_kernel
from src.harness.experiment import PUBLISHED
from src.harness.functions import F_PIECEWISE, G_OSCILLATORY, constant, sqrt_log


def test_null_sequence():
    assert null_sequence(100) == pytest.approx(0.1)
    assert null_sequence(10_000, 0.5) == pytest.approx(0.01)
    with pytest.raises(ConfigError):
        null_sequence(10, 1.0)


def test_log_modulus_of_log_identity(log_identity):
    """F = log z has Omega(F, rho) = rho"""
    est = log_modulus(log_identity, 0.1, grid_points=1001)
    assert est.value == pytest.approx(0.1, abs=1e-9)
    assert est.grid_points == 1001


def test_log_modulus_validation(log_identity):
    with pytest.raises(ConfigError):
        log_modulus(log_identity, 0.0)
    with pytest.raises(ConfigError):
        log_modulus(log_identity, 0.1, grid_points=10)


def test_rate_bounds_log_identity(log_identity, ramp):
    """Omega = 0.1 and A_1 / (Psi(e) n rho) = (9/32) / (0.25 * 10) = 0.1125"""
    gm = gm_rate_bound(log_identity, ramp, 100, 0.1, v=1.0, grid_points=1001)
    mk = mk_rate_bound(log_identity, ramp, 100, 0.1, v=1.0, grid_points=1001)
    assert gm == pytest.approx(0.1125, abs=1e-9)
    assert mk == pytest.approx(0.2125, abs=1e-9)


def test_rate_bound_large_n(log_identity, ramp):
    """At n = 10^4 with rho = 0.01 the tail term 0.01125 dominates Omega = 0.01"""
    gm = gm_rate_bound(log_identity, ramp, 10_000, 0.01, v=1.0, grid_points=1001)
    assert gm == pytest.approx(0.01125, abs=1e-9)


def test_rate_bound_empty_window(ramp):
    F = constant(0.5, (1.01, 1.05))
    with pytest.raises(EmptyWindow):
        gm_rate_bound(F, ramp, 10, 0.1)


def test_holder_constant(log_identity):
    """log z is log-Lipschitz with constant 1"""
    assert holder_constant(log_identity, 1.0, grid_points=201) == pytest.approx(1.0, abs=1e-9)
    with pytest.raises(ConfigError):
        holder_constant(log_identity, 1.5)


def test_holder_rate_bound_decreases(ramp):
    bounds = [holder_rate_bound(1.0, 0.5, ramp, n) for n in (10, 100, 1000)]
    assert bounds[0] > bounds[1] > bounds[2]


def test_error_norms():
    grid = np.linspace(0.0, 1.0, 11)
    norms = error_norms(np.zeros(11), np.full(11, 0.2), grid)
    assert norms.sup == pytest.approx(0.2)
    assert norms.l1 == pytest.approx(0.2)


def test_error_norms_log_measure():
    grid = np.linspace(1.0, math.e, 1001)
    norms = error_norms(np.ones_like(grid), np.zeros_like(grid), grid, measure="log")
    assert norms.l1 == pytest.approx(1.0, abs=1e-12)


def test_error_norms_validation():
    grid = np.linspace(0.0, 1.0, 5)
    with pytest.raises(ConfigError):
        error_norms(np.zeros(5), np.zeros(4), grid)
    with pytest.raises(ConfigError):
        error_norms(np.zeros(5), np.zeros(5), grid, measure="l2")


def test_fit_order_synthetic():
    samples = [(n, 3.0 * n**-0.7) for n in (10, 20, 40, 80)]
    assert fit_order(samples) == pytest.approx(0.7, abs=1e-12)


@pytest.mark.parametrize(
    "function_id,column,expected",
    [
        (F_PIECEWISE, 0, 1.040167),
        (F_PIECEWISE, 1, 1.036858),
        (G_OSCILLATORY, 0, 0.562619),
        (G_OSCILLATORY, 1, 0.501013),
    ],
)
def test_fit_order_published_tables(function_id, column, expected):
    """Empirical orders of the published L1 errors"""
    samples = [(n, pair[column]) for n, pair in sorted(PUBLISHED[function_id].items())]
    assert fit_order(samples) == pytest.approx(expected, abs=1e-4)


def test_fit_order_errors():
    with pytest.raises(ConfigError):
        fit_order([(10, 0.1), (20, 0.05)])
    with pytest.raises(NumericError):
        fit_order([(10, 0.1), (20, 0.0), (40, 0.01)])


def test_rate_report():
    report = rate_report([(10, 0.1), (40, 0.05), (160, 0.025)], theoretical_order=0.5)
    assert report.fitted_order == pytest.approx(0.5, abs=1e-12)
    data = json.loads(report.to_json())
    assert data["theoretical_order"] == 0.5
    assert [s["n"] for s in data["samples"]] == [10, 40, 160]
    assert list(report.to_frame().columns) == ["n", "error"]
    with pytest.raises(ConfigError):
        rate_report([(40, 0.1), (10, 0.05), (160, 0.025)], 0.5)


def test_sup_errors_decrease(ramp):
    F = sqrt_log((0.05, 2.0))
    errors = sup_errors(F, ramp, [10, 40, 160], which="mk")
    assert [n for n, _ in errors] == [10, 40, 160]
    values = [e for _, e in errors]
    assert values[0] > values[1] > values[2]


@pytest.mark.parametrize("which", ["gm", "mk"])
def test_certificate_measured_below_bound(log_identity, ramp, which):
    cert = certificate(log_identity, ramp, 100, which=which)
    assert cert["rho_n"] == pytest.approx(0.1)
    assert 0.0 <= cert["measured"] <= cert["bound"]


@pytest.mark.parametrize("kind", ["ramp", "logistic"])
@pytest.mark.parametrize("n", [25, 50, 100])
def test_certificates_with_null_sequence(log_identity, kind, n):
    """Measured sup-error stays below the bound for rho_n = n^(-1/2)"""
    for which in ("gm", "mk"):
        cert = certificate(log_identity, get_kernel(kind), n, which=which)
        assert cert["measured"] <= cert["bound"] + 5e-3, cert


def test_log_lipschitz_fitted_order(log_identity, ramp):
    """mk on log z: fitted order clears tau/(1+tau) = 1/2 minus fitting slack"""
    samples = sup_errors(log_identity, ramp, [10, 20, 40, 80, 160], which="mk")
    assert fit_order(samples) >= 0.35
