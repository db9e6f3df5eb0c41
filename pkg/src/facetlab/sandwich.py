"""Level sets of the mean entropy F, their boundary map and curvature, and the
random-polytope experiments built on them.

Notation: F^beta = {x : F(x) <= beta}.  For a unit direction theta the
boundary point of F^beta along theta is x_i = tanh(s theta_i), with s > 0
chosen so that F(x) = beta; there grad F(x) = h(x) / n = s theta / n is a
positive multiple of theta.  ``gamma_prime`` plays the role of the small
cube gamma C (the fixed gamma is far too small to see anything at desk scale).
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Any, Literal, Sequence

import numpy as np
from scipy.optimize import brentq

from .entropy import (
    LOG2,
    DomainError,
    big_f,
    check_cube_point,
    f_entropy,
    f_of_tanh,
    h_fn,
)
from .hull import (
    DEFAULT_DIM_CAP,
    HullResult,
    classify_points,
    facet_enum,
    sample_polytope,
)
from .oracle import ProbEstimate, q_upper
from .rng import stream

__all__ = [
    "BoundaryPoint",
    "EpsilonSchedule",
    "ExperimentReport",
    "RefuteResult",
    "WeingartenReport",
    "boundary_coverage_experiment",
    "boundary_point",
    "containment_experiment",
    "f_beta_member",
    "facet_growth_experiment",
    "gauss_map",
    "gauss_map_jacobian",
    "q_beta_refute",
    "sample_boundary_points",
    "weingarten_audit",
]

_TAG_DRAWS = 0x4452
_TAG_THETA = 0x5448


@dataclass(frozen=True)
class EpsilonSchedule:
    """Default slack schedule for a random polytope with N draws in dimension n."""

    n: int
    N: int
    eps1: float
    eps2: float
    eps3: float
    alpha: float

    @classmethod
    def default(cls, n: int, N: int, **overrides: float) -> "EpsilonSchedule":
        if n < 2 or N < 1:
            raise ValueError("need n >= 2 and N >= 1")
        vals = {
            "eps1": 3.0 * math.log(n) / n,
            "eps2": 3.0 * math.log(n) / n,
            "eps3": 6.0 / n,
            "alpha": math.log(N) / n,
        }
        for key, v in overrides.items():
            if key not in vals:
                raise ValueError(f"unknown schedule field {key!r}")
            if v is not None:
                vals[key] = float(v)
        return cls(n=n, N=N, **vals)

    @property
    def inner_level(self) -> float:
        """alpha - eps1 - eps2: level of the set a random polytope should contain."""
        return self.alpha - self.eps1 - self.eps2

    @property
    def outer_level(self) -> float:
        """alpha + eps3: level whose boundary a random polytope should mostly miss."""
        return self.alpha + self.eps3


def f_beta_member(x, beta: float) -> bool:
    if not 0.0 < beta <= LOG2:
        raise DomainError("beta must lie in (0, log 2]")
    return big_f(x) <= beta


@dataclass(frozen=True)
class RefuteResult:
    refuted: bool
    witness: ProbEstimate
    threshold: float
    F: float
    beta: float

    @property
    def status(self) -> Literal["RefutedOut", "NotRefuted"]:
        return "RefutedOut" if self.refuted else "NotRefuted"

    @property
    def tension(self) -> bool:
        """Not refuted although F(x) > beta; impossible if the tangent witness is sound."""
        return not self.refuted and self.F > self.beta


def q_beta_refute(x, beta: float, strategy: str = "coords", **kwargs) -> RefuteResult:
    """Certify x outside the beta-centre by finding a halfspace through x of mass < e^{-beta n}.

    A negative answer carries no membership claim.
    """
    arr = check_cube_point(x, open_cube=True)
    n = arr.size
    best, _ = q_upper(arr, strategy=strategy, **kwargs)
    threshold = math.exp(-beta * n)
    return RefuteResult(
        refuted=best.fraction() < Fraction(threshold),
        witness=best,
        threshold=threshold,
        F=big_f(arr),
        beta=beta,
    )


# -- boundary map ------------------------------------------------------------


@dataclass(frozen=True)
class BoundaryPoint:
    x: np.ndarray
    theta: np.ndarray
    scale: float
    beta: float

    @property
    def t(self) -> np.ndarray:
        return self.scale * self.theta


def _level(theta: np.ndarray, s: float) -> float:
    return float(np.mean(f_of_tanh(s * theta)))


def boundary_point(theta, beta: float, tol: float = 1e-12) -> BoundaryPoint:
    """Point of the boundary of F^beta whose gradient points along theta."""
    th = np.asarray(theta, dtype=float).ravel()
    nrm = float(np.linalg.norm(th))
    if not np.all(np.isfinite(th)) or nrm == 0.0:
        raise DomainError("theta must be a non-zero finite vector")
    th = th / nrm
    n = th.size
    supp = int(np.count_nonzero(th))
    if not 0.0 < beta < supp * LOG2 / n:
        raise DomainError(f"beta must lie in (0, {supp}*log2/{n})")
    lo, hi = 0.0, 1.0
    while _level(th, hi) < beta:
        lo, hi = hi, 2.0 * hi
        if hi > 1e12:
            raise RuntimeError("could not bracket the boundary")
    s = brentq(lambda v: _level(th, v) - beta, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps)
    x = np.tanh(s * th)
    if abs(big_f(x) - beta) > max(tol, 1e-10):
        raise RuntimeError("boundary root did not converge")
    return BoundaryPoint(x=x, theta=th, scale=s, beta=beta)


def sample_boundary_points(
    n: int,
    beta: float,
    count: int,
    rng: np.random.Generator,
    gamma_prime: float | None = None,
    restrict_M: bool = False,
    max_attempts: int | None = None,
) -> tuple[list[BoundaryPoint], int]:
    """Boundary points for theta uniform on the sphere, kept when x lies in gamma' C.

    ``restrict_M`` also requires max |theta_i| <= sqrt(3 log n / n).
    Returns the points and the number of directions tried.
    """
    if gamma_prime is not None and beta >= float(f_entropy(gamma_prime)):
        raise DomainError("F <= f(gamma') on gamma' C, so this level set misses gamma' C")
    limit = max_attempts if max_attempts is not None else 200 * count
    s_cap = float(h_fn(gamma_prime)) if gamma_prime is not None else None
    cap_M = math.sqrt(3.0 * math.log(n) / n) if n > 1 else 1.0
    out: list[BoundaryPoint] = []
    tried = 0
    while len(out) < count and tried < limit:
        tried += 1
        th = rng.standard_normal(n)
        th /= np.linalg.norm(th)
        top = float(np.max(np.abs(th)))
        if restrict_M and top > cap_M:
            continue
        # x lies in gamma' C iff the root s satisfies s * max|theta| <= h(gamma')
        if s_cap is not None and _level(th, s_cap / top) < beta:
            continue
        bp = boundary_point(th, beta)
        out.append(bp)
    return out, tried


# -- Gauss map and curvature -------------------------------------------------


def gauss_map(y) -> np.ndarray:
    """Unit normal grad F / |grad F| = h(y) / |h(y)|."""
    t = h_fn(np.asarray(y, dtype=float))
    nrm = float(np.linalg.norm(t))
    if nrm == 0.0:
        raise DomainError("gradient vanishes at the origin")
    return t / nrm


def gauss_map_jacobian(y) -> np.ndarray:
    """Exact Jacobian (I - nu nu^T) diag(h'(y)) / |h(y)|, with h'(y) = 1 / (1 - y^2)."""
    y = check_cube_point(y, open_cube=True)
    t = h_fn(y)
    nrm = float(np.linalg.norm(t))
    if nrm == 0.0:
        raise DomainError("gradient vanishes at the origin")
    nu = t / nrm
    hp = 1.0 / ((1.0 - y) * (1.0 + y))
    proj = np.eye(y.size) - np.outer(nu, nu)
    return proj * hp[None, :] / nrm


@dataclass(frozen=True)
class WeingartenReport:
    trace_D: float
    trace_W: float
    kappa: float
    amgm_bound: float
    inv_kappa_bound: float | None
    level_bound: float | None
    fd_error: float | None = None

    @property
    def trace_gap(self) -> float:
        return abs(self.trace_W - self.trace_D) / max(abs(self.trace_D), 1e-300)


def _tangent_basis(nu: np.ndarray) -> np.ndarray:
    # columns 2.. of a complete QR of nu span its orthogonal complement
    q, _ = np.linalg.qr(nu.reshape(-1, 1), mode="complete")
    return q[:, 1:]


def weingarten_audit(
    bp: BoundaryPoint, gamma_prime: float | None = None, fd_step: float | None = None
) -> WeingartenReport:
    """Shape-operator quantities of the boundary of F^beta at a boundary point.

    W is the Gauss-map Jacobian restricted to the tangent space; kappa = det W.
    When x lies in gamma' C two lower bounds on 1/kappa are reported:
    |t|^{n-1} (1 - gamma'^2)^{n-1} and (1 - gamma'^2)^{n-1} (2 n beta)^{(n-1)/2}.
    ``fd_step`` enables a central-difference check of the Jacobian.
    """
    x = check_cube_point(bp.x, open_cube=True)
    n = x.size
    D = gauss_map_jacobian(x)
    nu = gauss_map(x)
    U = _tangent_basis(nu)
    W = U.T @ D @ U
    trace_W = float(np.trace(W))
    kappa = float(np.linalg.det(W))
    inv_bound = level_bound = None
    if gamma_prime is not None and np.max(np.abs(x)) <= gamma_prime:
        shrink = (1.0 - gamma_prime**2) ** (n - 1)
        inv_bound = float(np.linalg.norm(h_fn(x))) ** (n - 1) * shrink
        level_bound = shrink * (2.0 * n * bp.beta) ** ((n - 1) / 2)
    fd_error = None
    if fd_step is not None:
        cols = []
        for j in range(n):
            e = np.zeros(n)
            e[j] = fd_step
            cols.append((gauss_map(x + e) - gauss_map(x - e)) / (2.0 * fd_step))
        fd_error = float(np.max(np.abs(np.column_stack(cols) - D)))
    return WeingartenReport(
        trace_D=float(np.trace(D)),
        trace_W=trace_W,
        kappa=kappa,
        amgm_bound=(trace_W / (n - 1)) ** (n - 1),
        inv_kappa_bound=inv_bound,
        level_bound=level_bound,
        fd_error=fd_error,
    )


# -- experiments ---------------------------------------------------------------


@dataclass
class ExperimentReport:
    name: str
    config: dict[str, Any]
    rows: list[dict[str, Any]]
    summary: dict[str, Any] = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)

    def to_csv(self) -> str:
        buf = io.StringIO()
        if not self.rows:
            return ""
        writer = csv.DictWriter(buf, fieldnames=list(self.rows[0]), lineterminator="\n")
        writer.writeheader()
        for row in self.rows:
            writer.writerow({k: _fmt(v) for k, v in row.items()})
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps(
            {"name": self.name, "config": self.config, "summary": self.summary, "notes": self.notes},
            sort_keys=True,
            indent=2,
            default=_fmt,
        )


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, np.integer):
        return int(v)
    return v


def _map_trials(fn, trials: int, threads: int) -> list:
    if threads <= 1:
        return [fn(i) for i in range(trials)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, range(trials)))


def _trial_hull(n: int, N: int, seed: int, trial: int, dim_cap: int) -> HullResult:
    draws = sample_polytope(n, N, seed, path=(_TAG_DRAWS, trial), allow_oversample=True)
    return facet_enum(draws, dim_cap=dim_cap)


def _resolve_level(level: float | None, default: float, n: int, what: str) -> float:
    beta = default if level is None else float(level)
    if not 0.0 < beta < LOG2:
        raise DomainError(
            f"{what} level {beta:.6g} outside (0, log 2) at n={n}; pass an explicit level or eps overrides"
        )
    return beta


def containment_experiment(
    n: int,
    N: int,
    trials: int,
    seed: int,
    *,
    samples: int = 200,
    gamma_prime: float = 0.3,
    beta: float | None = None,
    eps: dict[str, float] | None = None,
    threads: int = 1,
    dim_cap: int = DEFAULT_DIM_CAP,
) -> ExperimentReport:
    """Do random boundary points of F^beta inside gamma' C lie in K_N?

    beta defaults to alpha - eps1 - eps2.  Boundary points depend only on
    (seed, trial), and draws are nested in N, so for a fixed seed the
    violation count is non-increasing in N.
    """
    if N < n + 1:
        raise ValueError("need N >= n + 1")
    sched = EpsilonSchedule.default(n, N, **(eps or {}))
    level = _resolve_level(beta, sched.inner_level, n, "containment")

    def run(trial: int) -> dict[str, Any]:
        hull = _trial_hull(n, N, seed, trial, dim_cap)
        rng = stream(seed, _TAG_THETA, n, trial)
        pts, tried = sample_boundary_points(n, level, samples, rng, gamma_prime)
        row = {"trial": trial, "N": N, "f_count": hull.f_count, "points": len(pts), "tried": tried}
        if not hull.full_dimensional:
            row.update(degenerate=1, outside=0, violation_fraction=0.0)
            return row
        if pts:
            inside = classify_points(hull, np.array([p.x for p in pts]))
            outside = int(np.count_nonzero(~inside))
        else:
            outside = 0
        row.update(
            degenerate=0,
            outside=outside,
            violation_fraction=outside / len(pts) if pts else 0.0,
        )
        return row

    rows = _map_trials(run, trials, threads)
    live = [r for r in rows if not r["degenerate"]]
    summary = {
        "level": level,
        "degenerate_trials": len(rows) - len(live),
        "mean_violation_fraction": float(np.mean([r["violation_fraction"] for r in live])) if live else None,
        "full_containment_frequency": (
            sum(1 for r in live if r["outside"] == 0) / len(live) if live else None
        ),
    }
    return ExperimentReport(
        name="containment",
        config=_config(n=n, N=N, trials=trials, seed=seed, samples=samples,
                       gamma_prime=gamma_prime, beta=level, schedule=asdict(sched)),
        rows=rows,
        summary=summary,
        notes=["directions are uniform on the sphere; this is not surface measure on the level set"],
    )


def boundary_coverage_experiment(
    n: int,
    N: int,
    trials: int,
    seed: int,
    *,
    samples: int = 200,
    gamma_prime: float = 0.3,
    beta: float | None = None,
    eps: dict[str, float] | None = None,
    threads: int = 1,
    dim_cap: int = DEFAULT_DIM_CAP,
) -> ExperimentReport:
    """Fraction of boundary points of F^beta inside gamma' C that K_N covers.

    beta defaults to alpha + eps3.  Besides the raw fraction over sampled
    directions, a 1/kappa-weighted fraction approximates surface measure.
    """
    if N < n + 1:
        raise ValueError("need N >= n + 1")
    sched = EpsilonSchedule.default(n, N, **(eps or {}))
    level = _resolve_level(beta, sched.outer_level, n, "coverage")

    def run(trial: int) -> dict[str, Any]:
        hull = _trial_hull(n, N, seed, trial, dim_cap)
        rng = stream(seed, _TAG_THETA, n, trial)
        pts, tried = sample_boundary_points(n, level, samples, rng, gamma_prime)
        row = {"trial": trial, "N": N, "f_count": hull.f_count, "points": len(pts), "tried": tried}
        if not hull.full_dimensional or not pts:
            row.update(degenerate=int(not hull.full_dimensional), covered=0,
                       coverage=0.0, weighted_coverage=0.0)
            return row
        inside = classify_points(hull, np.array([p.x for p in pts]))
        weights = np.array([1.0 / weingarten_audit(p).kappa for p in pts])
        row.update(
            degenerate=0,
            covered=int(inside.sum()),
            coverage=float(inside.mean()),
            weighted_coverage=float(weights[inside].sum() / weights.sum()),
        )
        return row

    rows = _map_trials(run, trials, threads)
    live = [r for r in rows if not r["degenerate"] and r["points"]]
    summary = {
        "level": level,
        "degenerate_trials": sum(r["degenerate"] for r in rows),
        "mean_coverage": float(np.mean([r["coverage"] for r in live])) if live else None,
        "mean_weighted_coverage": float(np.mean([r["weighted_coverage"] for r in live])) if live else None,
        "reference_fraction": 1.0 / 200.0,
    }
    return ExperimentReport(
        name="coverage",
        config=_config(n=n, N=N, trials=trials, seed=seed, samples=samples,
                       gamma_prime=gamma_prime, beta=level, schedule=asdict(sched)),
        rows=rows,
        summary=summary,
        notes=[
            "raw coverage uses uniform directions, not surface measure",
            "weighted coverage reweights each point by 1/kappa to approximate surface measure",
        ],
    )


def facet_growth_experiment(
    n: int,
    N_list: Sequence[int],
    trials: int,
    seed: int,
    *,
    threads: int = 1,
    exhaustive: bool = False,
    dim_cap: int = DEFAULT_DIM_CAP,
) -> ExperimentReport:
    """Facet counts of K_N along nested draws, one row per (trial, N)."""
    if exhaustive:
        hull = facet_enum(sample_polytope(n, exhaustive=True), dim_cap=dim_cap)
        rows = [{"trial": 0, "N": 1 << n, "f_count": hull.f_count, "dim_affine": hull.dim_affine}]
        return ExperimentReport(
            name="facet_growth",
            config=_config(n=n, N_list=[1 << n], trials=1, seed=seed, exhaustive=True),
            rows=rows,
            summary={"per_N": [{"N": 1 << n, "mean": float(hull.f_count)}]},
        )
    Ns = [int(v) for v in N_list]
    if not Ns:
        raise ValueError("N_list must be non-empty")
    if n > dim_cap:
        raise ValueError(f"n={n} above hull cap {dim_cap}")

    def run(trial: int) -> list[dict[str, Any]]:
        draws = sample_polytope(n, max(Ns), seed, path=(_TAG_DRAWS, trial), allow_oversample=True)
        out = []
        for N in Ns:
            hull = facet_enum(draws.prefix(N), dim_cap=dim_cap)
            out.append({"trial": trial, "N": N, "f_count": hull.f_count, "dim_affine": hull.dim_affine,
                        "distinct": len(hull.points)})
        return out

    rows = [r for chunk in _map_trials(run, trials, threads) for r in chunk]
    per_N = []
    for N in Ns:
        counts = np.array([r["f_count"] for r in rows if r["N"] == N], dtype=float)
        per_N.append({
            "N": N,
            "mean": float(counts.mean()),
            "median": float(np.median(counts)),
            "min": float(counts.min()),
            "max": float(counts.max()),
        })
    means = np.array([p["mean"] for p in per_N])
    curve = np.log(np.array(Ns, dtype=float)) ** (n / 2)
    scale = float(means @ curve / (curve @ curve))
    summary: dict[str, Any] = {"per_N": per_N, "fitted_scale": scale}
    if len(Ns) >= 2 and np.all(means > 0) and min(Ns) > 1:
        loglog = np.log(np.log(np.array(Ns, dtype=float)))
        summary["loglog_slope"] = float(np.polyfit(loglog, np.log(means), 1)[0])
    summary["nondecreasing"] = bool(np.all(np.diff(means) >= 0))
    return ExperimentReport(
        name="facet_growth",
        config=_config(n=n, N_list=Ns, trials=trials, seed=seed),
        rows=rows,
        summary=summary,
        notes=["comparison curve is fitted_scale * (log N)^(n/2)"],
    )


def _config(**kw) -> dict[str, Any]:
    return kw
