"""Monte Carlo volume fractions |K| / |C| for C = [-1, 1]^n.

Two membership routes:

* ``volume_fraction_mc`` uses an exact H-representation (float screening,
  exact integer tie-breaks near the boundary).
* ``VertexHullOracle`` decides membership from the vertices alone with a
  small separation LP, caching every separating inequality it finds.  This
  avoids enumerating the tens of thousands of facets that hulls of ~100
  points in dimension 10 have.  ``volume_sweep`` exploits nesting of
  K_{N_1} in K_{N_2} for N_1 <= N_2 along one draw sequence.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np
from scipy.optimize import linprog

from .hull import HullResult, SignMatrix, classify_points
from .oracle import ProbEstimate
from .rng import stream

__all__ = ["VertexHullOracle", "volume_fraction_mc", "volume_sweep"]

_VOLUME_TAG = 0x564F4C
_LP_TOL = 1e-9


def _uniform_cube(seed: int, trials: int, n: int) -> np.ndarray:
    return stream(seed, _VOLUME_TAG, n).uniform(-1.0, 1.0, size=(trials, n))


def volume_fraction_mc(hull: HullResult, trials: int, seed: int, z: float = 3.0) -> ProbEstimate:
    """Fraction of uniform cube samples classified inside or on the hull."""
    if not hull.full_dimensional:
        raise ValueError("volume needs a full-dimensional hull")
    if trials < 1:
        raise ValueError("trials must be positive")
    inside = classify_points(hull, _uniform_cube(seed, trials, hull.dim))
    return ProbEstimate.monte_carlo(int(inside.sum()), trials, z)


class VertexHullOracle:
    """Membership in conv(vertices) by LP, with a pool of cached separating cuts.

    A point y is outside iff some (d, c) with |d_i| <= 1 has <d, v> <= c on
    every vertex and <d, y> > c; the LP maximises <d, y> - c.  Cuts found
    for one point are reused to reject later points without an LP.  Cuts
    of a larger hull stay valid for any sub-hull, so pools can be shared
    downward along a nested sweep.
    """

    def __init__(self, vertices, cuts: tuple[np.ndarray, np.ndarray] | None = None):
        pts = np.unique(np.asarray(vertices, dtype=float), axis=0)
        self.vertices = pts
        self.n = pts.shape[1]
        if cuts is None:
            self._d = np.empty((0, self.n))
            self._c = np.empty(0)
        else:
            self._d, self._c = cuts
        self.lp_calls = 0

    @property
    def cuts(self) -> tuple[np.ndarray, np.ndarray]:
        return self._d, self._c

    def _separate(self, y: np.ndarray) -> tuple[np.ndarray, float] | None:
        n, m = self.n, len(self.vertices)
        cost = np.concatenate([-y, [1.0]])
        a_ub = np.hstack([self.vertices, -np.ones((m, 1))])
        bounds = [(-1.0, 1.0)] * n + [(None, None)]
        res = linprog(cost, A_ub=a_ub, b_ub=np.zeros(m), bounds=bounds, method="highs")
        self.lp_calls += 1
        if res.status != 0:
            raise RuntimeError(f"separation LP failed: {res.message}")
        if -res.fun <= _LP_TOL:
            return None
        return res.x[:n], float(res.x[n])

    def contains(self, Y) -> np.ndarray:
        """Boolean mask: True for points inside or on the hull."""
        Y = np.atleast_2d(np.asarray(Y, dtype=float))
        result = np.ones(len(Y), dtype=bool)
        if len(self._c):
            result &= ~np.any(Y @ self._d.T > self._c + _LP_TOL, axis=1)
        pending = list(np.flatnonzero(result))
        while pending:
            i = pending.pop(0)
            cut = self._separate(Y[i])
            if cut is None:
                continue
            d, c = cut
            self._d = np.vstack([self._d, d])
            self._c = np.append(self._c, c)
            result[i] = False
            if pending:
                rest = np.array(pending)
                hit = Y[rest] @ d > c + _LP_TOL
                result[rest[hit]] = False
                pending = rest[~hit].tolist()
        return result


def volume_sweep(
    draws: SignMatrix,
    N_list: Sequence[int],
    trials: int,
    seed: int,
    z: float = 3.0,
) -> list[ProbEstimate]:
    """Volume fraction of conv(first N draws) for each N, sharing one sample cloud.

    Processes N in decreasing order: points outside a larger hull are
    outside every smaller one, and its cuts seed the next oracle.
    """
    if not N_list:
        raise ValueError("N_list must be non-empty")
    if max(N_list) > draws.draws:
        raise ValueError("not enough draws for the largest N")
    U = _uniform_cube(seed, trials, draws.dim)
    alive = np.ones(trials, dtype=bool)
    cuts = None
    out: dict[int, ProbEstimate] = {}
    for N in sorted(set(N_list), reverse=True):
        oracle = VertexHullOracle(draws.rows[:N], cuts)
        idx = np.flatnonzero(alive)
        alive[idx] = oracle.contains(U[idx])
        cuts = oracle.cuts
        out[N] = ProbEstimate.monte_carlo(int(alive.sum()), trials, z)
    return [out[N] for N in N_list]
