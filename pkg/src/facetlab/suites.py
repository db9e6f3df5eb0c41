"""Randomised inequality suites checked against exact probabilities.

Each suite yields ``CheckRow`` records.  Samples are drawn from per-sample
streams keyed by (seed, suite, n, index), so rows are identical for any
thread count.  Every row states lhs, rhs, the margin in the direction of the
claimed inequality (non-negative means it holds) and a pass flag.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, Sequence

import numpy as np
from scipy.stats import binom

from . import enumeration as en
from .entropy import f_entropy, fixed_constants, h_fn
from .oracle import (
    HalfspaceQuery,
    exact_halfspace_prob,
    montgomery_smith_check,
    shifted_majority_check,
)
from .rng import stream, tag
from .tilted import (
    berry_esseen_gap_bound,
    delta_tail_bounds,
    gamma_tail_lower,
    tangent_tail_bounds,
    tilted_distribution,
    tilted_integral,
    tilted_moments,
)

__all__ = [
    "CHECKS",
    "CheckRow",
    "SuiteConfig",
    "grouped_tangent_prob",
    "rows_to_csv",
    "run_checks",
]

CSV_COLUMNS = ("check", "n", "seed", "sample", "lhs", "rhs", "margin", "pass")
IDENTITY_RTOL = 1e-10


@dataclass(frozen=True)
class CheckRow:
    check: str
    n: int
    seed: int
    sample: int
    lhs: float
    rhs: float
    margin: float
    passed: bool

    def as_list(self) -> list[str]:
        return [
            self.check,
            str(self.n),
            str(self.seed),
            str(self.sample),
            repr(float(self.lhs)),
            repr(float(self.rhs)),
            repr(float(self.margin)),
            "1" if self.passed else "0",
        ]


def at_most(check, n, seed, i, lhs, rhs) -> CheckRow:
    return CheckRow(check, n, seed, i, lhs, rhs, rhs - lhs, lhs <= rhs)


def at_least(check, n, seed, i, lhs, rhs) -> CheckRow:
    return CheckRow(check, n, seed, i, lhs, rhs, lhs - rhs, lhs >= rhs)


@dataclass(frozen=True)
class SuiteConfig:
    seed: int = 0
    samples: int = 200
    n_values: tuple[int, ...] = (8, 12, 16)
    threads: int = 1
    cap: int = en.DEFAULT_ENUM_CAP


def _pmap(fn: Callable[[int], list[CheckRow]], count: int, threads: int) -> list[CheckRow]:
    if threads <= 1:
        chunks = [fn(i) for i in range(count)]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            chunks = list(pool.map(fn, range(count)))
    return [row for chunk in chunks for row in chunk]


def _rng(cfg: SuiteConfig, name: str, n: int, i: int) -> np.random.Generator:
    return stream(cfg.seed, tag(name), n, i)


def _tangent_prob(x: np.ndarray, cap: int):
    q = HalfspaceQuery(h_fn(x), through=x)
    return exact_halfspace_prob(q, cap)


# -- suites -------------------------------------------------------------------


def chernoff_suite(cfg: SuiteConfig, n_values: Sequence[int] | None = None) -> list[CheckRow]:
    """P(sum t_i (X_i - x_i) >= 0) <= exp(-n F(x)) for x uniform in (-0.9, 0.9)^n."""
    rows = []
    for n in n_values or cfg.n_values:
        def one(i: int, n=n) -> list[CheckRow]:
            x = _rng(cfg, "chernoff", n, i).uniform(-0.9, 0.9, n)
            p = _tangent_prob(x, cfg.cap).value
            return [at_most("chernoff", n, cfg.seed, i, p, math.exp(-float(np.sum(f_entropy(x)))))]
        rows += _pmap(one, cfg.samples, cfg.threads)
    return rows


def tangent_suite(cfg: SuiteConfig, n_values: Sequence[int] | None = None) -> list[CheckRow]:
    """Two-sided tangent-halfspace bounds and the tilted-integral identity, x in (-0.3, 0.3)^n."""
    rows = []
    for n in n_values or (10, 14, 18):
        def one(i: int, n=n) -> list[CheckRow]:
            x = _rng(cfg, "tangent", n, i).uniform(-0.3, 0.3, n)
            p = _tangent_prob(x, cfg.cap).value
            b = tangent_tail_bounds(x)
            ident = tilted_integral(x, cfg.cap)
            rel = abs(ident - p) / p
            return [
                at_most("tangent-upper", n, cfg.seed, i, p, b.upper),
                at_least("tangent-lower", n, cfg.seed, i, p, b.lower),
                CheckRow("tilted-identity", n, cfg.seed, i, ident, p, IDENTITY_RTOL - rel, rel <= IDENTITY_RTOL),
            ]
        rows += _pmap(one, cfg.samples, cfg.threads)
    return rows


def delta_suite(cfg: SuiteConfig, n_values: Sequence[int] | None = None) -> list[CheckRow]:
    """Bounds in terms of n F(x) for x in (-delta, delta)^n, delta in (0.05, 0.5)."""
    rows = []
    for n in n_values or (10, 14, 18):
        def one(i: int, n=n) -> list[CheckRow]:
            rng = _rng(cfg, "delta", n, i)
            delta = rng.uniform(0.05, 0.5)
            x = rng.uniform(-delta, delta, n)
            p = _tangent_prob(x, cfg.cap).value
            b = delta_tail_bounds(delta, x)
            return [
                at_most("delta-upper", n, cfg.seed, i, p, b.upper),
                at_least("delta-lower", n, cfg.seed, i, p, b.lower),
            ]
        rows += _pmap(one, cfg.samples, cfg.threads)
    return rows


def montgomery_smith_suite(cfg: SuiteConfig, count: int | None = None, n_max: int = 20) -> list[CheckRow]:
    """P(sum s_i X_i >= a |s| / c) >= exp(-c a^2) / c for 0 < a <= |s|_2 / |s|_inf."""
    def one(i: int) -> list[CheckRow]:
        rng = _rng(cfg, "montgomery-smith", 0, i)
        n = int(rng.integers(1, n_max + 1))
        s = rng.standard_normal(n)
        a_max = float(np.linalg.norm(s) / np.max(np.abs(s)))
        a = float(rng.uniform(0.0, a_max)) or a_max
        chk = montgomery_smith_check(s, a, cap=cfg.cap)
        return [at_least("montgomery-smith", n, cfg.seed, i, chk.lhs.value, chk.rhs)]
    return _pmap(one, count or cfg.samples, cfg.threads)


def majority_gammas() -> tuple[float, ...]:
    return (fixed_constants().gamma, 0.05, 0.1, 0.2)


def majority_suite(cfg: SuiteConfig, m_values: Sequence[int] = range(3, 25), weighted: int | None = None) -> list[CheckRow]:
    """Exact binomial tail of sum (X_i - gamma) >= 0 against both closed-form lower bounds.

    Only (m, gamma, form) combinations meeting the bound's hypotheses are
    checked.  ``weighted`` adds that many random positive-weight instances.
    """
    rows = []
    g_fixed = fixed_constants().gamma
    sample = 0
    for m in m_values:
        for g in majority_gammas():
            for form in ("full", "simplified"):
                if form == "full" and not m > 2.0 / (1.0 - g):
                    continue
                if form == "simplified" and (g > g_fixed or m <= 2):
                    continue
                chk = shifted_majority_check(m, g, form)
                rows.append(at_least(f"majority-{form}", m, cfg.seed, sample, chk.lhs.value, chk.rhs))
                sample += 1
    extra = cfg.samples if weighted is None else weighted

    def one(i: int) -> list[CheckRow]:
        rng = _rng(cfg, "majority-weighted", 0, i)
        m = int(rng.integers(3, 17))
        g = float(rng.choice(majority_gammas()))
        if not m > 2.0 / (1.0 - g):
            return []
        w = rng.uniform(0.1, 1.0, m)
        chk = shifted_majority_check(m, g, "full", weights=w, cap=cfg.cap)
        return [at_least("majority-weighted", m, cfg.seed, i, chk.lhs.value, chk.rhs)]

    return rows + _pmap(one, extra, cfg.threads)


def berry_esseen_suite(cfg: SuiteConfig, n_values: Sequence[int] | None = None) -> list[CheckRow]:
    """Exact sup |F_n - Phi| of the tilted normalised sum against min(6 rho/sigma^3, 12 t_max/sigma)."""
    rows = []
    for n in n_values or (10, 14):
        def one(i: int, n=n) -> list[CheckRow]:
            x = _rng(cfg, "berry-esseen", n, i).uniform(-0.9, 0.9, n)
            gap = tilted_distribution(x).sup_gap()
            return [at_most("berry-esseen", n, cfg.seed, i, gap, berry_esseen_gap_bound(tilted_moments(x)))]
        rows += _pmap(one, cfg.samples, cfg.threads)
    return rows


# -- large-n checks through grouped binomials --------------------------------


def grouped_tangent_prob(levels: Sequence[float], counts: Sequence[int]) -> float:
    """P(sum t_i (X_i - x_i) >= 0) when x takes value levels[j] on counts[j] coordinates.

    Supports one or two groups.  The event is decided with exact integers on
    the snapped direction; only the binomial masses are floats.
    """
    lv = [float(v) for v in levels]
    ct = [int(c) for c in counts]
    if len(lv) not in (1, 2) or len(ct) != len(lv) or min(ct) < 1:
        raise ValueError("one or two non-empty groups supported")
    x = np.repeat(lv, ct)
    q = en.snap_query(h_fn(x), through=x)
    T = [q.weights[0], q.weights[-1]]
    if len(lv) == 1:
        t, n = T[0], ct[0]
        if t == 0:
            return 1.0 if q.bound <= 0 else 0.0
        # t (2K - n) >= bound
        if t > 0:
            return float(binom.sf(_ceil_div(q.bound + t * n, 2 * t) - 1, n, 0.5))
        return float(binom.cdf((q.bound + t * n) // (2 * t), n, 0.5))
    (t1, t2), (n1, n2) = T, ct
    if t2 <= 0:
        raise ValueError("second group needs a positive tilt")
    k1 = np.arange(n1 + 1)
    need = np.array([_ceil_div(q.bound - t1 * (2 * k - n1) + t2 * n2, 2 * t2) for k in range(n1 + 1)])
    return float(np.sum(binom.pmf(k1, n1, 0.5) * binom.sf(need - 1, n2, 0.5)))


def _ceil_div(a: int, b: int) -> int:
    return -((-a) // b)


def large_n_cases() -> list[tuple[tuple[float, ...], tuple[int, ...]]]:
    """Fixed grouped instances where the lower bounds are strictly positive."""
    g = fixed_constants().gamma
    return [
        ((0.004,), (40_000,)),
        ((0.006,), (40_000,)),
        ((0.002, 0.006), (30_000, 30_000)),
        ((-0.003, 0.007), (20_000, 40_000)),
        ((0.5 * g,), (400_000,)),
        ((0.9 * g,), (120_000,)),
        ((0.3 * g, 0.8 * g), (200_000, 200_000)),
    ]


def large_n_suite(cfg: SuiteConfig) -> list[CheckRow]:
    """Grouped large-n instances where every lower bound is informative."""
    rows = []
    consts = fixed_constants()
    for i, (levels, counts) in enumerate(large_n_cases()):
        n = sum(counts)
        x = np.repeat(levels, counts)
        p = grouped_tangent_prob(levels, counts)
        tb = tangent_tail_bounds(x)
        rows.append(at_most("tangent-upper-large", n, cfg.seed, i, p, tb.upper))
        rows.append(at_least("tangent-lower-large", n, cfg.seed, i, p, tb.lower))
        delta = 1.25 * float(np.max(np.abs(levels)))
        db = delta_tail_bounds(delta, x)
        rows.append(at_most("delta-upper-large", n, cfg.seed, i, p, db.upper))
        rows.append(at_least("delta-lower-large", n, cfg.seed, i, p, db.lower))
        if np.max(np.abs(levels)) < consts.gamma and tb.nF >= consts.k_gamma:
            rows.append(at_least("gamma-lower-large", n, cfg.seed, i, p, gamma_tail_lower(x, consts)))
    return rows


CHECKS: dict[str, Callable[[SuiteConfig], list[CheckRow]]] = {
    "chernoff": chernoff_suite,
    "tangent": tangent_suite,
    "delta": delta_suite,
    "montgomery-smith": montgomery_smith_suite,
    "majority": majority_suite,
    "berry-esseen": berry_esseen_suite,
    "large-n": large_n_suite,
}


def run_checks(names: Iterable[str], cfg: SuiteConfig, n_override: Sequence[int] | None = None) -> Iterator[CheckRow]:
    for name in names:
        if name not in CHECKS:
            raise KeyError(f"unknown check {name!r}")
        fn = CHECKS[name]
        if n_override and name in ("chernoff", "tangent", "delta", "berry-esseen"):
            yield from fn(cfg, n_override)
        else:
            yield from fn(cfg)


def rows_to_csv(rows: Iterable[CheckRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in rows:
        w.writerow(r.as_list())
    return buf.getvalue()
