"""Exponentially tilted measure, its moments, and the tangent-halfspace tail bounds.

For x in (-1, 1)^n let t_i = h(x_i).  Under the tilted law each X_i has mean
x_i, and S_n = sum t_i (X_i - x_i) / sigma_n is centred with unit variance.
The bounds below sandwich P(sum t_i (X_i - x_i) >= 0) for the *uniform* law
between explicit functions of n F(x), sigma_n and max |t_i|.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.special import ndtr

from . import enumeration as en
from .entropy import (
    DomainError,
    FixedConstants,
    check_cube_point,
    f_entropy,
    fixed_constants,
    h_fn,
    m1_m2,
)

__all__ = [
    "BoundPair",
    "DegenerateError",
    "TiltedDistribution",
    "TiltedMoments",
    "berry_esseen_gap_bound",
    "delta_tail_bounds",
    "gamma_prefactor",
    "gamma_tail_lower",
    "tangent_tail_bounds",
    "tilted_distribution",
    "tilted_integral",
    "tilted_moments",
]


class DegenerateError(ValueError):
    """sigma_n = 0 (every t_i vanishes); the normalised sum is undefined."""


@dataclass(frozen=True)
class TiltedMoments:
    t: np.ndarray
    mean: np.ndarray
    variance: np.ndarray
    abs_third: np.ndarray
    sigma_sq: float
    rho3: float
    t_max: float

    @property
    def sigma(self) -> float:
        return math.sqrt(self.sigma_sq)


def tilted_moments(x) -> TiltedMoments:
    arr = check_cube_point(x, open_cube=True)
    t = np.atleast_1d(h_fn(arr))
    # cosh(t)^2 = 1/(1 - x^2) exactly for t = h(x)
    sech2 = (1.0 - arr) * (1.0 + arr)
    variance = t * t * sech2
    # cosh(2t) = cosh^2(t) (1 + x^2), so cosh(2t)/cosh^4(t) = (1 + x^2) sech^2(t)
    abs_third = np.abs(t) ** 3 * (1.0 + arr * arr) * sech2
    return TiltedMoments(
        t=t,
        mean=t * arr,
        variance=variance,
        abs_third=abs_third,
        sigma_sq=float(variance.sum()),
        rho3=float(abs_third.sum()),
        t_max=float(np.max(np.abs(t))),
    )


def berry_esseen_gap_bound(m: TiltedMoments) -> float:
    """min(6 rho / sigma^3, 12 max|t| / sigma): a bound on sup |F_n - Phi|."""
    if m.sigma_sq <= 0.0:
        raise DegenerateError("sigma_n = 0")
    s = m.sigma
    return min(6.0 * m.rho3 / s**3, 12.0 * m.t_max / s)


@dataclass(frozen=True)
class BoundPair:
    lower: float
    upper: float
    nF: float
    sigma: float

    @property
    def informative(self) -> bool:
        """False when the lower bound is <= 0 and holds only vacuously."""
        return self.lower > 0.0

    def contains(self, p: float) -> bool:
        return self.lower <= p <= self.upper


def tangent_tail_bounds(x) -> BoundPair:
    """Two-sided bound on P(sum t_i (X_i - x_i) >= 0) in terms of sigma_n.

    upper = e^{-nF} (m2(sigma) + 48 t_max) / sigma,
    lower = e^{-nF} (m1(sigma) - 24 t_max) / sigma (may be <= 0).
    """
    arr = check_cube_point(x, open_cube=True)
    m = tilted_moments(arr)
    if m.sigma_sq <= 0.0:
        raise DegenerateError("sigma_n = 0")
    s = m.sigma
    nF = float(np.sum(f_entropy(arr)))
    m1, m2 = m1_m2(s)
    scale = math.exp(-nF) / s
    return BoundPair(
        lower=scale * (m1 - 24.0 * m.t_max),
        upper=scale * (m2 + 48.0 * m.t_max),
        nF=nF,
        sigma=s,
    )


def delta_tail_bounds(delta: float, x) -> BoundPair:
    """The same two-sided bound written through n F(x) for x in (-delta, delta)^n."""
    if not 0.0 < delta < 1.0:
        raise DomainError("delta must lie in (0, 1)")
    arr = check_cube_point(x, open_cube=True)
    if np.any(np.abs(arr) >= delta):
        raise DomainError("every |x_i| must be below delta")
    nF = float(np.sum(f_entropy(arr)))
    if not nF > 0.0:
        raise DomainError("n F(x) must be positive")
    hd = h_fn(delta)
    fd = f_entropy(delta)
    ch = math.cosh(hd)
    root = math.sqrt(nF)
    scale = math.exp(-nF) / root
    _, m2 = m1_m2(hd / math.sqrt(fd) * root)
    m1, _ = m1_m2(math.sqrt(2.0 * nF) / ch)
    return BoundPair(
        lower=scale * math.sqrt(fd) / hd * (m1 - 24.0 * hd),
        upper=scale * ch / math.sqrt(2.0) * (m2 + 48.0 * hd),
        nF=nF,
        sigma=tilted_moments(arr).sigma,
    )


def gamma_prefactor(constants: FixedConstants | None = None) -> float:
    """sqrt(f(gamma)) / (10 h(gamma))."""
    g = (constants or fixed_constants()).gamma
    return math.sqrt(f_entropy(g)) / (10.0 * h_fn(g))


def gamma_tail_lower(x, constants: FixedConstants | None = None) -> float:
    """prefactor * (nF)^{-1/2} e^{-nF} for x in (-gamma, gamma)^n with sum f(x_i) >= k(gamma).

    Non-vacuous only for very large n, since gamma ~ 0.0083.
    """
    c = constants or fixed_constants()
    arr = check_cube_point(x, open_cube=True)
    if np.any(np.abs(arr) >= c.gamma):
        raise DomainError("every |x_i| must be below gamma")
    nF = float(np.sum(f_entropy(arr)))
    if nF < c.k_gamma:
        raise DomainError(f"sum f(x_i) = {nF:.6g} is below k(gamma) = {c.k_gamma}")
    return gamma_prefactor(c) * math.exp(-nF) / math.sqrt(nF)


# -- enumeration oracles ---------------------------------------------------


@dataclass(frozen=True)
class TiltedDistribution:
    """Law of S_n under the tilted measure, from full enumeration.

    ``keys`` are the exact integer sums sum T_i X_i of the snapped tangent
    direction (ascending, unique); ``values`` the corresponding atoms of
    S_n; ``weights`` their exact tilted probabilities.
    """

    keys: np.ndarray
    values: np.ndarray
    weights: list[Fraction]
    sigma: float
    bound: int

    def cdf(self) -> list[Fraction]:
        out, acc = [], Fraction(0)
        for w in self.weights:
            acc += w
            out.append(acc)
        return out

    def sup_gap(self) -> float:
        """Exact sup_u |F_n(u) - Phi(u)|; attained at an atom or its left limit."""
        cdf = self.cdf()
        phi = ndtr(self.values)
        right = np.array([float(c) for c in cdf])
        left = np.concatenate([[0.0], right[:-1]])
        return float(max(np.max(np.abs(right - phi)), np.max(np.abs(left - phi))))

    def mean(self) -> float:
        return float(sum(float(w) * v for w, v in zip(self.weights, self.values)))

    def variance(self) -> float:
        mu = self.mean()
        return float(sum(float(w) * (v - mu) ** 2 for w, v in zip(self.weights, self.values)))


def _tilted_numerators(x: np.ndarray, codes: np.ndarray, e: int) -> list[int]:
    # weight of a sign vector = prod (1 + x_i X_i)/2 = prod (2^e + p_i X_i) / 2^{n(e+1)}
    ps = [int(Fraction(float(v)) * (1 << e)) for v in x]
    one = 1 << e
    out = []
    for code in codes.tolist():
        num = 1
        for i, p in enumerate(ps):
            num *= one + p if (code >> i) & 1 else one - p
        out.append(num)
    return out


def _common_exp(x: np.ndarray) -> int:
    return max(Fraction(float(v)).denominator.bit_length() - 1 for v in x)


def tilted_distribution(x, cap: int = 16) -> TiltedDistribution:
    arr = check_cube_point(x, open_cube=True)
    n = arr.size
    if n > cap:
        raise en.EnumerationCapExceeded(f"exact tilted law limited to n <= {cap}")
    m = tilted_moments(arr)
    if m.sigma_sq <= 0.0:
        raise DegenerateError("sigma_n = 0")
    sq = en.snap_query(m.t, through=arr)
    half = n // 2
    e = _common_exp(arr)
    ls, lc = en.gray_walk(sq.weights[:half])
    rs, rc = en.gray_walk(sq.weights[half:])
    lw = _tilted_numerators(arr[:half], lc, e)
    rw = _tilted_numerators(arr[half:], rc, e)
    sums = (ls[:, None] + rs[None, :]).ravel()
    prods = (np.array(lw, dtype=object)[:, None] * np.array(rw, dtype=object)[None, :]).ravel()
    order = np.argsort(sums, kind="stable")
    sorted_sums = sums[order]
    starts = np.flatnonzero(np.concatenate([[True], np.diff(sorted_sums) != 0]))
    grouped = np.add.reduceat(prods[order], starts)
    keys = sorted_sums[starts].tolist()
    den = 1 << (n * (e + 1))
    theta = sum(Fraction(t) * Fraction(float(v)) for t, v in zip(sq.weights, arr))
    scale = 2.0 ** -sq.scale_exp
    values = np.array([float((k - theta) * Fraction(scale)) for k in keys]) / m.sigma
    return TiltedDistribution(
        keys=np.array(keys, dtype=np.int64),
        values=values,
        weights=[Fraction(int(w), den) for w in grouped],
        sigma=m.sigma,
        bound=sq.bound,
    )


def tilted_integral(x, cap: int = en.DEFAULT_ENUM_CAP) -> float:
    """e^{-nF(x)} * integral over [0, inf) of e^{-sigma u} dmu_n(u), by enumeration.

    Equals P(sum t_i (X_i - x_i) >= 0) under the uniform law; the atom
    selection u >= 0 uses the same exact integer test as the counting oracle.
    """
    arr = check_cube_point(x, open_cube=True)
    n = arr.size
    m = tilted_moments(arr)
    sq = en.snap_query(m.t, through=arr)
    sums, codes = en.all_sums(sq.weights, cap)
    keep = sums >= sq.bound
    bits = ((codes[keep, None] >> np.arange(n)) & 1).astype(bool)
    signs = np.where(bits, 1.0, -1.0)
    log_w = np.log(0.5 * (1.0 + signs * arr)).sum(axis=1)
    sigma_u = (signs - arr) @ m.t
    nF = float(np.sum(f_entropy(arr)))
    return float(np.exp(log_w - sigma_u).sum() * math.exp(-nF))
