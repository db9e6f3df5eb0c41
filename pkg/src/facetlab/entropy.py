"""Entropy-type functions on the cube [-1, 1]^n and the fixed constants.

All scalar functions accept floats or numpy arrays and evaluate elementwise.
``f_entropy`` is defined on the closed interval with ``0 log 0 = 0``; ``h_fn``
is only defined on the open interval and refuses the endpoints.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np

__all__ = [
    "DomainError",
    "FixedConstants",
    "INV_SQRT_2PI",
    "big_f",
    "check_cube_point",
    "derive_fixed_constants",
    "f_entropy",
    "f_of_tanh",
    "fixed_constants",
    "g_ratio",
    "h_fn",
    "h_prime",
    "m1_m2",
    "psi_fn",
]

INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)
LOG2 = math.log(2.0)


class DomainError(ValueError):
    """Argument outside the domain of a function."""


def _as_array(x):
    return np.asarray(x, dtype=float)


def _unwrap(x, out):
    return float(out) if np.ndim(x) == 0 else out


def check_cube_point(x, *, open_cube: bool = False) -> np.ndarray:
    """Validate a point of C = [-1, 1]^n (or its interior) and return it as an array."""
    arr = _as_array(x)
    if arr.ndim != 1 or arr.size == 0:
        raise DomainError("a cube point is a non-empty 1-d vector")
    if not np.all(np.isfinite(arr)):
        raise DomainError("cube point has non-finite coordinates")
    bound = np.abs(arr)
    if np.any(bound > 1.0):
        raise DomainError("cube point has a coordinate outside [-1, 1]")
    if open_cube and np.any(bound >= 1.0):
        raise DomainError("operation requires the open cube (-1, 1)^n")
    return arr


def f_entropy(x):
    """f(x) = (1+x)/2 log(1+x) + (1-x)/2 log(1-x) on [-1, 1], with f(+-1) = log 2."""
    arr = _as_array(x)
    if np.any(np.abs(arr) > 1.0) or np.any(np.isnan(arr)):
        raise DomainError("f is defined on [-1, 1]")
    # Even in x; evaluating on |x| keeps f(-x) == f(x) bit for bit.
    a = np.abs(arr)
    inner = a < 1.0
    a_in = np.where(inner, a, 0.0)
    lo = np.where(inner, 0.5 * (1.0 - a_in) * np.log1p(-a_in), 0.0)
    out = 0.5 * (1.0 + a) * np.log1p(a) + lo
    # near 0 the two terms above cancel; x atanh(x) + log(1 - x^2)/2 loses one bit at most
    small = a < 0.5
    a_sm = np.where(small, a, 0.0)
    out = np.where(small, a_sm * np.arctanh(a_sm) + 0.5 * np.log1p(-a_sm * a_sm), out)
    return _unwrap(x, np.maximum(out, 0.0))


def big_f(x) -> float:
    """F(x) = mean of f over the coordinates of a cube point."""
    arr = check_cube_point(x)
    return float(np.mean(f_entropy(arr)))


def h_fn(x):
    """h(x) = 1/2 log((1+x)/(1-x)), the derivative of f, on the open interval."""
    arr = _as_array(x)
    if np.any(~(np.abs(arr) < 1.0)):
        raise DomainError("h is defined on the open interval (-1, 1)")
    return _unwrap(x, np.arctanh(arr))


def h_prime(x):
    """h'(x) = 1/(1 - x^2)."""
    arr = _as_array(x)
    if np.any(~(np.abs(arr) < 1.0)):
        raise DomainError("h' is defined on the open interval (-1, 1)")
    return _unwrap(x, 1.0 / ((1.0 - arr) * (1.0 + arr)))


def psi_fn(t):
    """log cosh(t), overflow safe."""
    arr = _as_array(t)
    if not np.all(np.isfinite(arr)):
        raise DomainError("psi needs finite arguments")
    a = np.abs(arr)
    small = a < 1.0
    # cosh(t) - 1 = 2 sinh(t/2)^2 avoids cancellation near zero
    near = np.log1p(2.0 * np.sinh(np.where(small, a, 0.0) / 2.0) ** 2)
    far = a - LOG2 + np.log1p(np.exp(-2.0 * a))
    return _unwrap(t, np.where(small, near, far))


def f_of_tanh(t):
    """f(tanh t) = t tanh t - log cosh t; stable for large |t| where tanh rounds to 1."""
    arr = _as_array(t)
    return _unwrap(t, arr * np.tanh(arr) - psi_fn(arr))


def g_ratio(t):
    """g(t) = f(tanh t) / t^2 for t > 0; decreasing, with limit 1/2 at 0."""
    arr = _as_array(t)
    if np.any(~(arr > 0.0)):
        raise DomainError("g is evaluated for t > 0 only (its limit at 0 is 1/2)")
    with np.errstate(invalid="ignore"):
        series = 0.5 - arr**2 / 4.0 + arr**4 / 9.0
        direct = f_of_tanh(arr) / arr**2
    return _unwrap(t, np.where(arr < 1e-3, series, direct))


def m1_m2(x):
    """Lower/upper gaussian tail factors: m1(x) e^{-x^2/2}/x <= P(Z > x) <= m2(x) e^{-x^2/2}/x."""
    arr = _as_array(x)
    if np.any(~(arr > 0.0)):
        raise DomainError("m1, m2 are used for x > 0")
    m1 = INV_SQRT_2PI * 2.0 * arr / (arr + np.sqrt(arr * arr + 4.0))
    m2 = INV_SQRT_2PI * 4.0 * arr / (3.0 * arr + np.sqrt(arr * arr + 8.0))
    return _unwrap(x, m1), _unwrap(x, m2)


@dataclass(frozen=True)
class FixedConstants:
    gamma: float
    mont_smith_c: float
    k_gamma: int
    berry_esseen_c: float

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "FixedConstants":
        return cls(**json.loads(text))


# Frozen from derive_fixed_constants(dps=40); tests re-derive and compare.
_GAMMA = 0.008311106138639070501699
_MONT_SMITH_C = 9.939626599152001240918838
_K_GAMMA = 3


def fixed_constants() -> FixedConstants:
    return FixedConstants(
        gamma=_GAMMA, mont_smith_c=_MONT_SMITH_C, k_gamma=_K_GAMMA, berry_esseen_c=6.0
    )


def derive_fixed_constants(dps: int = 40) -> dict:
    """Recompute the constants in extended precision.

    gamma = tanh(1/(48 sqrt(2 pi))), c = 4 log 12, and k(gamma) is the least
    integer k with m1(sqrt(2k)/cosh(h(gamma))) >= 5/(6 sqrt(2 pi)).
    """
    import mpmath

    with mpmath.workdps(dps):
        gamma = mpmath.tanh(1 / (48 * mpmath.sqrt(2 * mpmath.pi)))
        c = 4 * mpmath.log(12)
        target = 5 / (6 * mpmath.sqrt(2 * mpmath.pi))
        cosh_h = mpmath.cosh(mpmath.atanh(gamma))

        def m1(v):
            return 2 * v / (v + mpmath.sqrt(v * v + 4)) / mpmath.sqrt(2 * mpmath.pi)

        k = 1
        while m1(mpmath.sqrt(2 * k) / cosh_h) < target:
            k += 1
        f_gamma = (1 + gamma) / 2 * mpmath.log(1 + gamma) + (1 - gamma) / 2 * mpmath.log(1 - gamma)
        prefactor = mpmath.sqrt(f_gamma) / (10 * mpmath.atanh(gamma))
        return {
            "gamma": gamma,
            "mont_smith_c": c,
            "k_gamma": k,
            "gamma_mont_smith_cap": mpmath.tanh(1 / c),
            "gamma_prefactor": prefactor,
        }
