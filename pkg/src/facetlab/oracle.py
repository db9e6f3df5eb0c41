"""Ground-truth probabilities of halfspace events for uniform +-1 vectors.

``exact_halfspace_prob`` counts sign vectors exactly (dyadic result with
denominator 2**n); ``mc_halfspace_prob`` is the seeded Monte Carlo fallback.
On top of these sit the certificate checks used by the verification suites:
the tangent-halfspace Chernoff bound, Montgomery-Smith's Rademacher tail
lower bound, the shifted-majority binomial lower bound, and one-sided
upper certificates for q(x).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Literal, Optional

import numpy as np

from . import enumeration as en
from .entropy import DomainError, big_f, check_cube_point, f_entropy, fixed_constants, h_fn
from .rng import sign_rows, stream

__all__ = [
    "HalfspaceQuery",
    "MajorityCheck",
    "MontSmithCheck",
    "ProbEstimate",
    "chernoff_cert",
    "exact_halfspace_prob",
    "majority_bound",
    "mc_halfspace_prob",
    "montgomery_smith_check",
    "q_upper",
    "shifted_majority_check",
]

MC_MIN_TRIALS = 10_000
_MC_CHUNK = 1 << 15


@dataclass(frozen=True)
class ProbEstimate:
    kind: Literal["exact", "monte_carlo"]
    value: float
    num: Optional[int] = None
    den: Optional[int] = None
    half_width: Optional[float] = None
    trials: Optional[int] = None
    z: Optional[float] = None

    @classmethod
    def exact(cls, num: int, den: int) -> "ProbEstimate":
        return cls(kind="exact", value=num / den, num=num, den=den)

    @classmethod
    def monte_carlo(cls, hits: int, trials: int, z: float = 3.0) -> "ProbEstimate":
        v = hits / trials
        return cls(
            kind="monte_carlo",
            value=v,
            num=hits,
            half_width=z * math.sqrt(v * (1.0 - v) / trials),
            trials=trials,
            z=z,
        )

    @property
    def is_exact(self) -> bool:
        return self.kind == "exact"

    def fraction(self) -> Fraction:
        if not self.is_exact:
            raise ValueError("only exact estimates have a rational value")
        return Fraction(self.num, self.den)

    def upper(self) -> float:
        return self.value if self.is_exact else self.value + self.half_width

    def lower(self) -> float:
        return self.value if self.is_exact else self.value - self.half_width


@dataclass(frozen=True)
class HalfspaceQuery:
    """The event <normal, X> >= threshold.

    If ``through`` is set instead of ``threshold``, the threshold is
    <normal', through> for the snapped normal (exactly the halfspace whose
    boundary passes through that point).
    """

    normal: np.ndarray
    threshold: Optional[float | Fraction] = None
    through: Optional[np.ndarray] = field(default=None)

    def __post_init__(self):
        object.__setattr__(self, "normal", np.asarray(self.normal, dtype=float))
        if self.through is not None:
            object.__setattr__(self, "through", np.asarray(self.through, dtype=float))
        if (self.threshold is None) == (self.through is None):
            raise ValueError("exactly one of threshold / through must be set")
        if not np.all(np.isfinite(self.normal)):
            raise ValueError("normal must be finite")

    @property
    def dim(self) -> int:
        return self.normal.size

    def snapped(self) -> en.SnappedQuery:
        if self.through is not None:
            return en.snap_query(self.normal, through=self.through)
        return en.snap_query(self.normal, self.threshold)


def exact_halfspace_prob(q: HalfspaceQuery, cap: int = en.DEFAULT_ENUM_CAP) -> ProbEstimate:
    sq = q.snapped()
    return ProbEstimate.exact(en.count_at_least(sq, cap), 1 << sq.dim)


def _mc_chunk_hits(sq: en.SnappedQuery, seed: int, chunk: int, rows: int) -> int:
    x = sign_rows(stream(seed, 0x4D43, chunk), rows, sq.dim).astype(np.int64)
    s = x @ np.asarray(sq.weights, dtype=np.int64)
    return int(np.count_nonzero(s >= sq.bound))


def mc_halfspace_prob(
    q: HalfspaceQuery, trials: int, seed: int, z: float = 3.0, threads: int = 1
) -> ProbEstimate:
    """Seeded Monte Carlo estimate; bit-identical for a given (query, trials, seed)."""
    if trials < MC_MIN_TRIALS:
        raise ValueError(f"need at least {MC_MIN_TRIALS} trials")
    sq = q.snapped()
    sizes = [min(_MC_CHUNK, trials - lo) for lo in range(0, trials, _MC_CHUNK)]
    jobs = [(sq, seed, i, r) for i, r in enumerate(sizes)]
    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(threads) as pool:
            hits = sum(pool.map(lambda a: _mc_chunk_hits(*a), jobs))
    else:
        hits = sum(_mc_chunk_hits(*a) for a in jobs)
    return ProbEstimate.monte_carlo(hits, trials, z)


def _prob(q: HalfspaceQuery, cap: int, trials: int, seed: int) -> ProbEstimate:
    if q.dim <= cap:
        return exact_halfspace_prob(q, cap)
    return mc_halfspace_prob(q, trials, seed)


def chernoff_cert(
    x, cap: int = en.DEFAULT_ENUM_CAP, trials: int = 200_000, seed: int = 0
) -> tuple[ProbEstimate, float]:
    """P(sum t_i (X_i - x_i) >= 0) for t = h(x), together with exp(-n F(x)).

    The probability never exceeds the bound (exponential Chebyshev on the
    tangent halfspace); exact when n <= cap, Monte Carlo beyond.
    """
    arr = check_cube_point(x, open_cube=True)
    t = h_fn(arr)
    q = HalfspaceQuery(np.atleast_1d(t), through=arr)
    return _prob(q, cap, trials, seed), math.exp(-arr.size * big_f(arr))


@dataclass(frozen=True)
class MontSmithCheck:
    lhs: ProbEstimate
    rhs: float
    applicable: bool
    threshold: float

    @property
    def holds(self) -> bool:
        return (not self.applicable) or self.lhs.value >= self.rhs


def montgomery_smith_check(
    s, a: float, c: Optional[float] = None, cap: int = en.DEFAULT_ENUM_CAP
) -> MontSmithCheck:
    """P(sum s_i X_i >= a |s|_2 / c) against exp(-c a^2)/c, c = 4 log 12 by default."""
    s = np.asarray(s, dtype=float)
    if s.ndim != 1 or not np.any(s != 0.0):
        raise DomainError("s must be a non-zero vector")
    if not a > 0:
        raise DomainError("a must be positive")
    c = fixed_constants().mont_smith_c if c is None else c
    norm2 = float(np.linalg.norm(s))
    applicable = a <= norm2 / float(np.max(np.abs(s)))
    threshold = a * norm2 / c
    lhs = exact_halfspace_prob(HalfspaceQuery(s, threshold=threshold), cap)
    return MontSmithCheck(lhs=lhs, rhs=math.exp(-c * a * a) / c, applicable=applicable, threshold=threshold)


def majority_bound(m: int, gamma: float, form: Literal["full", "simplified"] = "full") -> float:
    """Lower bound on P(sum_{i<=m} s_i (X_i - gamma) >= 0), s_i > 0.

    ``full``: valid for m > 2/(1-gamma).  ``simplified``: c(gamma) m^{-3/2}
    e^{-m f(gamma)}, valid for gamma <= tanh(1/(48 sqrt(2 pi))) and m > 2.
    """
    if not 0.0 < gamma < 1.0:
        raise DomainError("gamma must lie in (0, 1)")
    tail = m ** -1.5 * math.exp(-m * f_entropy(gamma))
    lead = math.sqrt(2.0 / (math.pi * (1.0 - gamma * gamma)))
    if form == "full":
        if not m > 2.0 / (1.0 - gamma):
            raise DomainError("full form needs m > 2/(1 - gamma)")
        g2 = gamma + 2.0 / m
        ratio = (1.0 - g2) / (1.0 + g2)
        stirling = math.exp(1.0 / (12 * m + 1) - (1.0 / (12 * m)) * 4.0 / (1.0 - g2 * g2))
        return lead * ratio * stirling * tail
    if form == "simplified":
        if gamma > fixed_constants().gamma:
            raise DomainError("simplified form needs gamma <= tanh(1/(48 sqrt(2 pi)))")
        if not m > 2:
            raise DomainError("simplified form needs m > 2")
        c_gamma = lead * (1.0 - 3.0 * gamma) / (5.0 + 3.0 * gamma)
        c_gamma *= math.exp(-1.0 / (9.0 - (3.0 * gamma + 2.0) ** 2))
        return c_gamma * tail
    raise ValueError(f"unknown form {form!r}")


@dataclass(frozen=True)
class MajorityCheck:
    lhs: ProbEstimate
    rhs: float

    @property
    def holds(self) -> bool:
        return self.lhs.value >= self.rhs


def shifted_majority_check(
    m: int,
    gamma: float,
    form: Literal["full", "simplified"] = "full",
    weights=None,
    cap: int = en.DEFAULT_ENUM_CAP,
) -> MajorityCheck:
    """Exact P(sum s_i (X_i - gamma) >= 0) against ``majority_bound``.

    With equal weights (the default) the event is a binomial tail
    K >= m (1 + gamma) / 2 and is evaluated with big integers for any m;
    explicit positive weights are enumerated.
    """
    rhs = majority_bound(m, gamma, form)
    if weights is None:
        k0 = math.ceil(Fraction(m) * (1 + Fraction(gamma)) / 2)
        num = sum(math.comb(m, k) for k in range(max(k0, 0), m + 1))
        return MajorityCheck(ProbEstimate.exact(num, 1 << m), rhs)
    w = np.asarray(weights, dtype=float)
    if w.shape != (m,) or np.any(w <= 0):
        raise DomainError("weights must be m positive numbers")
    q = HalfspaceQuery(w, through=np.full(m, gamma))
    return MajorityCheck(exact_halfspace_prob(q, cap), rhs)


def _coordinate_queries(x: np.ndarray):
    n = x.size
    for i in range(n):
        for sgn in (1.0, -1.0):
            e = np.zeros(n)
            e[i] = sgn
            yield HalfspaceQuery(e, through=x)


def _local_search(
    x: np.ndarray, w0: np.ndarray, cap: int, sweeps: int, step0: float
) -> tuple[ProbEstimate, HalfspaceQuery]:
    w = w0 / np.linalg.norm(w0)
    q = HalfspaceQuery(w, through=x)
    best = exact_halfspace_prob(q, cap)
    step = step0
    for _ in range(sweeps):
        improved = False
        for i in range(x.size):
            for d in (step, -step):
                cand = w.copy()
                cand[i] += d
                nrm = np.linalg.norm(cand)
                if nrm == 0.0:
                    continue
                cand /= nrm
                cq = HalfspaceQuery(cand, through=x)
                p = exact_halfspace_prob(cq, cap)
                if p.num * best.den < best.num * p.den:
                    w, q, best, improved = cand, cq, p, True
                    break
        if not improved:
            step /= 2.0
            if step < 1e-4:
                break
    return best, q


def q_upper(
    x,
    strategy: Literal["tangent", "coords", "multistart"] = "coords",
    k: int = 4,
    seed: int = 0,
    cap: int = en.DEFAULT_ENUM_CAP,
    sweeps: int = 30,
) -> tuple[ProbEstimate, HalfspaceQuery]:
    """Smallest exact halfspace probability over a candidate family through x.

    Any halfspace containing x upper-bounds q(x), so the result is a
    certificate q(x) <= best.  Candidates: the tangent direction h(x)
    (always), the 2n coordinate halfspaces (``coords`` and ``multistart``),
    and k coordinate-descent refinements from random directions
    (``multistart``).
    """
    arr = check_cube_point(x, open_cube=True)
    queries = [HalfspaceQuery(np.atleast_1d(h_fn(arr)), through=arr)]
    if strategy in ("coords", "multistart"):
        queries.extend(_coordinate_queries(arr))
    elif strategy != "tangent":
        raise ValueError(f"unknown strategy {strategy!r}")
    best_q = queries[0]
    best = exact_halfspace_prob(best_q, cap)
    for q in queries[1:]:
        p = exact_halfspace_prob(q, cap)
        if p.num * best.den < best.num * p.den:
            best, best_q = p, q
    if strategy == "multistart":
        for start in range(k):
            w0 = stream(seed, 0x5155, start).standard_normal(arr.size)
            p, q = _local_search(arr, w0, cap, sweeps, 0.5)
            if p.num * best.den < best.num * p.den:
                best, best_q = p, q
    return best, best_q
