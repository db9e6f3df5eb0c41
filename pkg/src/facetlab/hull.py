"""Random +-1 polytopes and exact facet enumeration.

Two independent algorithms produce the H-representation of conv(points):

* ``facet_enum``: incremental beneath-beyond.  Facets carry their full
  support set (0/1 polytopes are very degenerate, so facets routinely have far
  more than n vertices).  Horizon ridges are found combinatorially (a face
  F & G lying in exactly two facets), and each new facet normal is the exact
  integer combination of the two facets meeting at the ridge.
* ``facet_enum_bruteforce``: every n-subset spans a candidate hyperplane
  (integer cofactor normal); keep the supporting ones.

All hyperplane data are integers.  Every distinct +-1 point is a vertex of the
hull of any set of +-1 points, which the audits below rely on.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from typing import Iterable, Literal, Sequence

import numpy as np

from .rng import sign_rows, stream

__all__ = [
    "Facet",
    "HullCapExceeded",
    "HullResult",
    "SignMatrix",
    "Verification",
    "affine_rank",
    "facet_enum",
    "facet_enum_bruteforce",
    "classify_points",
    "membership",
    "sample_polytope",
    "verify_h_rep",
]

DEFAULT_DIM_CAP = 10
DEFAULT_SUBSET_CAP = 10**7


class HullCapExceeded(ValueError):
    """Instance above the configured exact-mode caps."""


# -- exact integer linear algebra -------------------------------------------


def _det(rows: Sequence[Sequence[int]]) -> int:
    """Determinant by fraction-free (Bareiss) elimination."""
    m = [list(map(int, r)) for r in rows]
    k = len(m)
    if k == 0:
        return 1
    sign, prev = 1, 1
    for i in range(k - 1):
        if m[i][i] == 0:
            for r in range(i + 1, k):
                if m[r][i] != 0:
                    m[i], m[r] = m[r], m[i]
                    sign = -sign
                    break
            else:
                return 0
        piv = m[i][i]
        for r in range(i + 1, k):
            for c in range(i + 1, k):
                m[r][c] = (m[r][c] * piv - m[r][i] * m[i][c]) // prev
            m[r][i] = 0
        prev = piv
    return sign * m[k - 1][k - 1]


def _primitive(vec: Sequence[int], off: int | None = None):
    g = reduce(math.gcd, (abs(int(v)) for v in vec), 0)
    if off is not None:
        g = math.gcd(g, abs(int(off)))
    if g == 0:
        return tuple(int(v) for v in vec), off
    out = tuple(int(v) // g for v in vec)
    return out, (None if off is None else int(off) // g)


def _normal_through(pts: Sequence[Sequence[int]]) -> tuple[int, ...]:
    """Primitive integer normal of the hyperplane through n points of Z^n (zero if dependent)."""
    base = pts[0]
    diffs = [[int(p[j]) - int(base[j]) for j in range(len(base))] for p in pts[1:]]
    n = len(base)
    cof = []
    for j in range(n):
        minor = [r[:j] + r[j + 1 :] for r in diffs]
        cof.append((-1) ** j * _det(minor))
    return _primitive(cof)[0]


class _Echelon:
    """Incremental integer row echelon form for rank tests."""

    def __init__(self, n: int):
        self.rows: list[tuple[int, list[int]]] = []
        self.n = n

    def reduce(self, v: Sequence[int]) -> list[int]:
        v = [int(a) for a in v]
        for piv, row in self.rows:
            if v[piv]:
                a, b = row[piv], v[piv]
                v = [a * x - b * y for x, y in zip(v, row)]
                g = reduce(math.gcd, (abs(x) for x in v), 0)
                if g > 1:
                    v = [x // g for x in v]
        return v

    def add(self, v: Sequence[int]) -> bool:
        r = self.reduce(v)
        for j, a in enumerate(r):
            if a:
                self.rows.append((j, r))
                return True
        return False

    @property
    def rank(self) -> int:
        return len(self.rows)


def _independent_subset(points: np.ndarray) -> list[int]:
    """Indices of a maximal affinely independent subset (greedy, in input order)."""
    if len(points) == 0:
        return []
    ech = _Echelon(points.shape[1])
    base = points[0]
    chosen = [0]
    for i in range(1, len(points)):
        if ech.add(points[i] - base):
            chosen.append(i)
            if ech.rank == points.shape[1]:
                break
    return chosen


def affine_rank(points) -> int:
    """Dimension of the affine hull of the given integer points (-1 if empty)."""
    pts = np.asarray(points, dtype=np.int64)
    if pts.size == 0:
        return -1
    return len(_independent_subset(pts)) - 1


# -- data types ----------------------------------------------------------------


@dataclass(frozen=True)
class SignMatrix:
    rows: np.ndarray
    seed: int | None = None

    def __post_init__(self):
        arr = np.asarray(self.rows)
        if arr.ndim != 2 or arr.shape[0] == 0 or arr.shape[1] == 0:
            raise ValueError("sign matrix must be a non-empty 2-d array")
        if not np.all(np.abs(arr) == 1):
            raise ValueError("entries must be exactly +1 or -1")
        object.__setattr__(self, "rows", arr.astype(np.int8))

    @property
    def dim(self) -> int:
        return self.rows.shape[1]

    @property
    def draws(self) -> int:
        return self.rows.shape[0]

    def distinct(self) -> np.ndarray:
        """Distinct rows in first-occurrence order."""
        _, idx = np.unique(self.rows, axis=0, return_index=True)
        return self.rows[np.sort(idx)]

    @property
    def dedup_count(self) -> int:
        return self.draws - len(self.distinct())

    def prefix(self, count: int) -> "SignMatrix":
        return SignMatrix(self.rows[:count], self.seed)


_DRAW_CHUNK = 64


def sample_polytope(
    n: int,
    N: int | None = None,
    seed: int = 0,
    *,
    exhaustive: bool = False,
    allow_oversample: bool = False,
    path: tuple[int, ...] = (),
) -> SignMatrix:
    """N i.i.d. uniform +-1 rows (duplicates kept), or all 2**n vertices if ``exhaustive``.

    Rows come in fixed chunks from independent streams, so the first M rows
    do not depend on N: draws for different N are nested.  N is capped at
    2**n unless ``allow_oversample`` (draws are with replacement, so larger
    N is well defined and just saturates the cube).
    """
    if not 1 <= n <= 30:
        raise ValueError("n must lie in 1..30")
    if exhaustive:
        codes = np.arange(1 << n, dtype=np.int64)
        rows = np.where((codes[:, None] >> np.arange(n)) & 1, 1, -1)
        return SignMatrix(rows, seed)
    if N is None or N < 1 or (N > 1 << n and not allow_oversample):
        raise ValueError("N must lie in 1..2**n")
    chunks = [
        sign_rows(stream(seed, 0x4B4E, n, *path, k), _DRAW_CHUNK, n)
        for k in range(-(-N // _DRAW_CHUNK))
    ]
    return SignMatrix(np.concatenate(chunks)[:N], seed)


@dataclass(frozen=True)
class Facet:
    """Inequality <normal, y> <= offset, tight exactly on ``support`` (point indices)."""

    normal: tuple[int, ...]
    offset: int
    support: tuple[int, ...]

    @property
    def key(self) -> tuple[tuple[int, ...], int]:
        return self.normal, self.offset

    def hyperplane_key(self) -> tuple[tuple[int, ...], int]:
        """Unoriented identity: primitive normal with positive leading nonzero entry."""
        lead = next(a for a in self.normal if a != 0)
        if lead > 0:
            return self.key
        return tuple(-a for a in self.normal), -self.offset


@dataclass(frozen=True)
class HullResult:
    points: np.ndarray
    dim_affine: int
    facets: tuple[Facet, ...] = field(default=())

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def f_count(self) -> int:
        return len(self.facets)

    @property
    def full_dimensional(self) -> bool:
        return self.dim_affine == self.dim

    def keys(self) -> set:
        return {f.key for f in self.facets}

    def matrix(self) -> tuple[np.ndarray, np.ndarray]:
        dtype = np.int64 if _fits_int64(self.dim) else object
        a = np.array([f.normal for f in self.facets], dtype=dtype).reshape(-1, self.dim)
        b = np.array([f.offset for f in self.facets], dtype=dtype)
        return a, b


def _fits_int64(n: int) -> bool:
    # primitive normals of +-1 hyperplanes are bounded by Hadamard's (n-1)^((n-1)/2);
    # beneath-beyond combines two normals with coefficients up to 2 n H
    had = (n - 1) ** ((n - 1) / 2) if n > 1 else 1
    return 8 * n * had * had < 2**62


def _as_points(points) -> tuple[np.ndarray, int]:
    if isinstance(points, SignMatrix):
        pts = points.distinct()
    else:
        arr = np.asarray(points)
        _, idx = np.unique(arr, axis=0, return_index=True)
        pts = arr[np.sort(idx)]
    if pts.ndim != 2 or len(pts) == 0:
        raise ValueError("need a non-empty 2-d point array")
    return pts.astype(np.int64), pts.shape[1]


def _canonical(facets: Iterable[tuple[Sequence[int], int, Sequence[int]]]) -> tuple[Facet, ...]:
    out = [Facet(tuple(int(v) for v in a), int(b), tuple(sorted(int(i) for i in s))) for a, b, s in facets]
    out.sort(key=lambda f: (f.normal, f.offset))
    return tuple(out)


# -- beneath-beyond ------------------------------------------------------------


def facet_enum(points, dim_cap: int = DEFAULT_DIM_CAP) -> HullResult:
    """Complete, duplicate-free facet list of conv(distinct points), exact."""
    pts, n = _as_points(points)
    if n > dim_cap:
        raise HullCapExceeded(f"dimension {n} above exact-mode cap {dim_cap}")
    base = _independent_subset(pts)
    d = len(base) - 1
    if d < n:
        return HullResult(points=pts, dim_affine=d)
    dtype = np.int64 if _fits_int64(n) else object
    m = len(pts)
    P = pts.astype(dtype)

    normals, offsets = [], []
    for j in base:
        others = [i for i in base if i != j]
        a = np.array(_normal_through(pts[others]), dtype=dtype)
        b = a @ P[others[0]]
        if a @ P[j] > b:
            a, b = -a, -b
        normals.append(a)
        offsets.append(b)
    A = np.array(normals, dtype=dtype)
    B = np.array(offsets, dtype=dtype)
    inserted = np.zeros(m, dtype=bool)
    inserted[base] = True
    S = ((P @ A.T) == B).T & inserted[None, :]

    for k in range(m):
        if inserted[k]:
            continue
        vals = A @ P[k] - B
        vis = vals > 0
        inserted[k] = True
        if not vis.any():
            S[:, k] = vals == 0
            continue
        new_a, new_b = _cone_facets(A, B, S, vals, vis, n)
        keep = ~vis
        A, B = A[keep], B[keep]
        S = S[keep]
        S[:, k] = vals[keep] == 0
        if new_a:
            NA = np.array(new_a, dtype=dtype).reshape(-1, n)
            NB = np.array(new_b, dtype=dtype)
            NS = ((P @ NA.T) == NB).T & inserted[None, :]
            A = np.concatenate([A, NA])
            B = np.concatenate([B, NB])
            S = np.concatenate([S, NS])
    facets = [(A[i], B[i], np.flatnonzero(S[i])) for i in range(len(A))]
    return HullResult(points=pts, dim_affine=n, facets=_canonical(facets))


def _cone_facets(A, B, S, vals, vis, n):
    """New facets through the inserted point: one per horizon ridge, merged by hyperplane."""
    vis_idx = np.flatnonzero(vis)
    nvis_idx = np.flatnonzero(~vis)
    Sf = S.astype(np.float32)
    counts = Sf[vis_idx] @ Sf[nvis_idx].T
    fi, gi = np.nonzero(counts >= n - 1)
    if fi.size == 0:
        return [], []
    F = vis_idx[fi]
    G = nvis_idx[gi]
    inter = S[F] & S[G]
    sizes = inter.sum(axis=1)
    cover = Sf @ inter.T.astype(np.float32)
    ridge = (cover == sizes[None, :].astype(np.float32)).sum(axis=0) == 2
    seen: dict[tuple, None] = {}
    new_a, new_b = [], []
    for f, g in zip(F[ridge], G[ridge]):
        vg = vals[g]
        if vg == 0:
            # the inserted point lies on G's hyperplane; G simply grows
            continue
        vf = vals[f]
        a = (-vg) * A[f] + vf * A[g]
        b = (-vg) * B[f] + vf * B[g]
        a, b = _primitive(a, b)
        if (a, b) not in seen:
            seen[(a, b)] = None
            new_a.append(a)
            new_b.append(b)
    return new_a, new_b


# -- brute-force oracle ----------------------------------------------------------


def facet_enum_bruteforce(points, subset_cap: int = DEFAULT_SUBSET_CAP, batch: int = 4096) -> HullResult:
    """Reference hull: test the hyperplane of every affinely independent n-subset."""
    pts, n = _as_points(points)
    m = len(pts)
    d = affine_rank(pts)
    if d < n:
        return HullResult(points=pts, dim_affine=d)
    if math.comb(m, n) > subset_cap:
        raise HullCapExceeded(f"C({m}, {n}) subsets above cap {subset_cap}")
    found: dict[tuple, set] = {}
    combos = itertools.combinations(range(m), n)
    while True:
        chunk = np.array(list(itertools.islice(combos, batch)), dtype=np.int64)
        if chunk.size == 0:
            break
        chunk = chunk.reshape(-1, n)
        for a in _subset_normals(pts, chunk):
            if a is None:
                continue
            vals = pts @ np.array(a[0], dtype=np.int64)
            b = int(vals[a[1]])
            if np.all(vals <= b):
                key = (a[0], b)
            elif np.all(vals >= b):
                key = (tuple(-v for v in a[0]), -b)
            else:
                continue
            found.setdefault(key, set()).update(np.flatnonzero(vals == b).tolist())
    return HullResult(points=pts, dim_affine=n, facets=_canonical((a, b, s) for (a, b), s in found.items()))


def _subset_normals(pts: np.ndarray, chunk: np.ndarray):
    """Integer normals for a batch of n-subsets, as (primitive normal, anchor index) or None.

    Cofactors come from batched float determinants, rounded, then checked
    exactly against every difference vector; failures fall back to Bareiss.
    """
    n = pts.shape[1]
    sub = pts[chunk]
    if n == 1:
        for row in chunk:
            yield (1,), int(row[0])
        return
    diffs = (sub[:, 1:, :] - sub[:, :1, :]) // 2
    cof = np.empty((len(chunk), n), dtype=np.int64)
    for j in range(n):
        minor = np.delete(diffs, j, axis=2).astype(float)
        cof[:, j] = ((-1) ** j) * np.rint(np.linalg.det(minor)).astype(np.int64)
    ok = np.all(np.einsum("bkn,bn->bk", diffs, cof) == 0, axis=1)
    for r in range(len(chunk)):
        c = cof[r] if ok[r] else np.array(_normal_through(sub[r]), dtype=np.int64)
        if not np.any(c):
            yield None
            continue
        a, _ = _primitive(c)
        yield a, int(chunk[r][0])


# -- audits and membership ---------------------------------------------------------


@dataclass
class Verification:
    ok: bool
    problems: list[str]

    def __bool__(self) -> bool:
        return self.ok


def verify_h_rep(points, hull: HullResult, ridge_audit: bool = True) -> Verification:
    """Exact audit of an H-representation against its points.

    Checks feasibility of every point, exact tightness on each support, that
    each support spans a hyperplane, distinct facets, and (``ridge_audit``)
    that every ridge of every facet is shared by exactly two facets, which
    exposes a missing facet.
    """
    pts, n = _as_points(points)
    problems: list[str] = []
    if hull.dim_affine != n:
        return Verification(False, ["hull is not full-dimensional"])
    if len(pts) != len(hull.points) or not np.array_equal(pts, hull.points):
        problems.append("hull was built from a different point set")
    if not hull.facets:
        return Verification(False, problems + ["no facets"])
    A, B = hull.matrix()
    vals = pts.astype(A.dtype) @ A.T
    bad = np.argwhere(vals > B[None, :])
    for p, f in bad[:10]:
        problems.append(f"point {p} violates facet {f}")
    keys = [f.key for f in hull.facets]
    if len(set(keys)) != len(keys):
        problems.append("duplicate facets")
    supports = []
    for i, f in enumerate(hull.facets):
        tight = set(np.flatnonzero(vals[:, i] == B[i]).tolist())
        if tight != set(f.support):
            problems.append(f"facet {i}: support differs from tight set")
        if not tight or affine_rank(pts[sorted(tight)]) != n - 1:
            problems.append(f"facet {i}: support does not span a hyperplane")
        supports.append(frozenset(tight))
    if ridge_audit and not problems and n >= 2:
        problems.extend(_ridge_problems(pts, hull, supports))
    return Verification(not problems, problems)


def _facet_ridges(pts: np.ndarray, normal: Sequence[int], support: Sequence[int]) -> list[frozenset]:
    n = pts.shape[1]
    sup = sorted(support)
    if len(sup) == n:
        return [frozenset(c) for c in itertools.combinations(sup, n - 1)]
    # the coordinate projection dropping j is injective on the hyperplane when normal[j] != 0
    j = next(i for i, a in enumerate(normal) if a != 0)
    proj = np.delete(pts[sup], j, axis=1)
    sub = facet_enum(proj, dim_cap=max(n - 1, 1))
    return [frozenset(sup[i] for i in f.support) for f in sub.facets]


def _ridge_problems(pts, hull, supports) -> list[str]:
    problems = []
    n = pts.shape[1]
    if n == 1:
        return problems
    mask = np.zeros((len(supports), len(pts)), dtype=np.float32)
    for i, s in enumerate(supports):
        mask[i, list(s)] = 1.0
    for i, f in enumerate(hull.facets):
        for ridge in _facet_ridges(pts, f.normal, supports[i]):
            r = np.zeros(len(pts), dtype=np.float32)
            r[list(ridge)] = 1.0
            holders = int(np.count_nonzero(mask @ r == len(ridge)))
            if holders != 2:
                problems.append(f"facet {i}: ridge {sorted(ridge)} lies in {holders} facets")
                if len(problems) > 10:
                    return problems
    return problems


Location = Literal["inside", "boundary", "outside"]


def _exact_vector(y) -> tuple[list[int], int]:
    fr = [Fraction(v) if isinstance(v, (int, Fraction)) else Fraction(float(v)) for v in y]
    den = reduce(lambda a, b: a * b // math.gcd(a, b), (f.denominator for f in fr), 1)
    return [int(f * den) for f in fr], den


def classify_points(hull: HullResult, Y, screen: float = 1e-9) -> np.ndarray:
    """Vectorised membership: True where a float point is inside or on the hull.

    Float slacks decide clear cases; points within ``screen`` of a facet
    are re-checked exactly.
    """
    if not hull.full_dimensional:
        raise ValueError("membership needs a full-dimensional hull")
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    A, B = hull.matrix()
    A = A.astype(float)
    B = B.astype(float)
    scale = np.abs(A).sum(axis=1) + np.abs(B) + 1.0
    worst = ((Y @ A.T - B) / scale).max(axis=1)
    inside = worst < -screen
    for i in np.flatnonzero(np.abs(worst) <= screen):
        inside[i] = membership(Y[i], hull) != "outside"
    return inside


def membership(y, hull: HullResult) -> Location:
    """Exact classification of a rational point against the H-representation."""
    if not hull.full_dimensional:
        raise ValueError("membership needs a full-dimensional hull")
    num, den = _exact_vector(y)
    worst = None
    for f in hull.facets:
        s = sum(a * v for a, v in zip(f.normal, num)) - f.offset * den
        if s > 0:
            return "outside"
        worst = s if worst is None else max(worst, s)
    return "boundary" if worst == 0 else "inside"
