import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from facetlab.entropy import (
    DomainError,
    FixedConstants,
    big_f,
    check_cube_point,
    derive_fixed_constants,
    f_entropy,
    f_of_tanh,
    fixed_constants,
    g_ratio,
    h_fn,
    h_prime,
    m1_m2,
    psi_fn,
)

mpmath.mp.dps = 40

unit = st.floats(min_value=-1.0, max_value=1.0, allow_nan=False)
open_unit = st.floats(min_value=-0.999999, max_value=0.999999, allow_nan=False)


def mp_f(x):
    x = mpmath.mpf(x)
    total = mpmath.mpf(0)
    if x != -1:
        total += (1 + x) / 2 * mpmath.log(1 + x)
    if x != 1:
        total += (1 - x) / 2 * mpmath.log(1 - x)
    return total


@pytest.mark.parametrize("x", [0.0, 1e-8, 0.1, 0.5, -0.5, 0.9, 0.999999, 1.0, -1.0])
def test_f_matches_high_precision(x):
    assert f_entropy(x) == pytest.approx(float(mp_f(x)), rel=1e-13, abs=1e-300)


def test_f_reference_values():
    assert f_entropy(0.5) == pytest.approx(0.130812, abs=1e-6)
    assert f_entropy(1.0) == pytest.approx(math.log(2), rel=1e-15)
    assert f_entropy(0.0) == 0.0


def test_big_f_examples():
    assert big_f([0.0, 1.0]) == pytest.approx(math.log(2) / 2, abs=1e-6)
    assert big_f(np.full(7, 0.5)) == pytest.approx(f_entropy(0.5), rel=1e-15)


def test_domain_errors():
    with pytest.raises(DomainError):
        f_entropy(1.5)
    with pytest.raises(DomainError):
        h_fn(1.0)
    with pytest.raises(DomainError):
        check_cube_point([np.nan])
    with pytest.raises(DomainError):
        g_ratio(0.0)


@given(unit)
def test_f_even_and_bounded(x):
    v = f_entropy(x)
    assert v == f_entropy(-x)
    assert 0.0 <= v <= math.log(2) + 1e-15
    assert v >= x * x / 2 - 1e-15


@given(open_unit, open_unit)
def test_f_midpoint_convex(a, b):
    assert f_entropy((a + b) / 2) <= (f_entropy(a) + f_entropy(b)) / 2 + 1e-15


@given(st.floats(min_value=-0.99, max_value=0.99))
def test_h_is_derivative_of_f(x):
    step = 1e-6
    fd = (f_entropy(x + step) - f_entropy(x - step)) / (2 * step)
    assert fd == pytest.approx(h_fn(x), rel=1e-6, abs=1e-9)
    assert h_prime(x) == pytest.approx(1 / (1 - x * x), rel=1e-12)


def test_h_reference():
    assert h_fn(0.5) == pytest.approx(0.549306, abs=1e-6)


@pytest.mark.parametrize("t", [0.0, 1e-9, 0.3, 1.0, 5.0, 50.0, 700.0, -3.0])
def test_psi_matches_log_cosh(t):
    expected = float(mpmath.log(mpmath.cosh(t)))
    assert psi_fn(t) == pytest.approx(expected, rel=1e-14, abs=1e-300)


def test_psi_large_argument():
    assert psi_fn(50.0) == pytest.approx(50 - math.log(2), abs=1e-10)


@given(st.floats(min_value=-20, max_value=20))
def test_f_of_tanh_identity(t):
    assert f_of_tanh(t) == pytest.approx(f_entropy(math.tanh(t)), rel=1e-9, abs=1e-15)


def test_g_ratio_values():
    # independent: f(tanh 1) evaluated with mpmath
    assert g_ratio(1.0) == pytest.approx(float(mp_f(mpmath.tanh(1))), rel=1e-13)
    assert g_ratio(1e-4) == pytest.approx(0.5, abs=1e-8)
    assert g_ratio(1e-4) < 0.5


@given(st.floats(min_value=1e-6, max_value=30))
def test_g_ratio_below_half(t):
    assert 0.0 < g_ratio(t) <= 0.5


def test_m1_m2_limits():
    a, b = m1_m2(1e3)
    assert a == pytest.approx(1 / math.sqrt(2 * math.pi), abs=1e-3)
    assert b == pytest.approx(1 / math.sqrt(2 * math.pi), abs=1e-3)
    with pytest.raises(DomainError):
        m1_m2(0.0)


@given(st.floats(min_value=1e-12, max_value=1e6))
def test_m1_below_m2(x):
    a, b = m1_m2(x)
    assert 0.0 <= a <= b + 1e-16


def test_fixed_constants_against_high_precision():
    frozen = fixed_constants()
    derived = derive_fixed_constants()
    assert frozen.gamma == pytest.approx(float(derived["gamma"]), rel=1e-14)
    assert float(derived["gamma"]) == pytest.approx(0.008311106138639070, rel=1e-15)
    assert frozen.mont_smith_c == pytest.approx(4 * math.log(12), rel=1e-15)
    assert derived["k_gamma"] == frozen.k_gamma == 3
    assert frozen.gamma <= float(derived["gamma_mont_smith_cap"])


def test_fixed_constants_json_round_trip():
    c = fixed_constants()
    assert FixedConstants.from_json(c.to_json()) == c
