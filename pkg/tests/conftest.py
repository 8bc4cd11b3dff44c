"""
Shared fixtures for the operator test suite
"""
import math

import numpy as np
import pytest

from src.core.kernels import get_kernel
from src.harness.functions import constant, f_target, g_target, log_linear, make_target

DEFAULT_INTERVAL = (0.05, 2.0)


@pytest.fixture
def ramp():
    """Ramp kernel (compact support, the benchmark kernel)"""
    return get_kernel("ramp")


@pytest.fixture(params=["logistic", "tanh", "ramp", "three-level"])
def kernel(request):
    """Every built-in kernel"""
    return get_kernel(request.param)


@pytest.fixture
def f_piecewise():
    return f_target(DEFAULT_INTERVAL)


@pytest.fixture
def g_oscillatory():
    return g_target(DEFAULT_INTERVAL)


@pytest.fixture
def loglin():
    return log_linear(DEFAULT_INTERVAL)


@pytest.fixture
def const04():
    return constant(0.4, DEFAULT_INTERVAL)


@pytest.fixture
def log_identity():
    """F(z) = log z on [1, e]: log-Lipschitz with constant 1, range [0, 1]"""
    return make_target("expr:log(x)", (1.0, math.e))


@pytest.fixture
def grid():
    return np.linspace(*DEFAULT_INTERVAL, 400)
