"""Text and JSON serialisation of vertex sets and H-representations.

Text layout::

    n N
    <N vertex rows, n integers each>
    facets k
    <k rows: a_1 ... a_n b>

Everything is integer, so round-trips are bit-exact.  Supports are not
stored; they are recomputed exactly on load.
"""

from __future__ import annotations

import json

import numpy as np

from .hull import Facet, HullResult, affine_rank

__all__ = ["dumps_text", "loads_text", "dumps_json", "loads_json", "read_points"]


def _rebuild(points: np.ndarray, rows: list[tuple[list[int], int]]) -> HullResult:
    pts = np.asarray(points, dtype=np.int64).reshape(len(points), -1)
    facets = []
    for a, b in rows:
        vals = pts @ np.array(a, dtype=np.int64) if len(pts) else np.empty(0)
        support = tuple(int(i) for i in np.flatnonzero(vals == b))
        facets.append(Facet(tuple(int(v) for v in a), int(b), support))
    facets.sort(key=lambda f: (f.normal, f.offset))
    n = pts.shape[1]
    dim = n if facets else affine_rank(pts)
    return HullResult(points=pts, dim_affine=dim, facets=tuple(facets))


def dumps_text(hull: HullResult) -> str:
    pts = hull.points
    lines = [f"{pts.shape[1]} {len(pts)}"]
    lines += [" ".join(str(int(v)) for v in row) for row in pts]
    lines.append(f"facets {hull.f_count}")
    lines += [" ".join(str(v) for v in (*f.normal, f.offset)) for f in hull.facets]
    return "\n".join(lines) + "\n"


def loads_text(text: str) -> HullResult:
    lines = [ln.split() for ln in text.splitlines() if ln.strip()]
    if not lines or len(lines[0]) != 2:
        raise ValueError("missing 'n N' header")
    n, N = int(lines[0][0]), int(lines[0][1])
    body = lines[1 : 1 + N]
    if len(body) != N or any(len(r) != n for r in body):
        raise ValueError("vertex block does not match the header")
    points = np.array([[int(v) for v in r] for r in body], dtype=np.int64).reshape(N, n)
    rest = lines[1 + N :]
    rows = []
    if rest:
        if rest[0][0] != "facets" or len(rest[0]) != 2:
            raise ValueError("expected 'facets k'")
        k = int(rest[0][1])
        frows = rest[1:]
        if len(frows) != k or any(len(r) != n + 1 for r in frows):
            raise ValueError("facet block does not match its header")
        rows = [([int(v) for v in r[:n]], int(r[n])) for r in frows]
    return _rebuild(points, rows)


def dumps_json(hull: HullResult) -> str:
    doc = {
        "n": int(hull.dim),
        "vertices": hull.points.astype(int).tolist(),
        "dim_affine": int(hull.dim_affine),
        "facets": [{"normal": list(f.normal), "offset": f.offset} for f in hull.facets],
    }
    return json.dumps(doc, sort_keys=True)


def loads_json(text: str) -> HullResult:
    doc = json.loads(text)
    n = int(doc["n"])
    pts = np.array(doc["vertices"], dtype=np.int64).reshape(-1, n)
    rows = [([int(v) for v in f["normal"]], int(f["offset"])) for f in doc["facets"]]
    return _rebuild(pts, rows)


def read_points(text: str) -> np.ndarray:
    """Vertex rows from either format (facet block ignored)."""
    stripped = text.lstrip()
    if stripped.startswith("{"):
        doc = json.loads(stripped)
        return np.array(doc["vertices"], dtype=np.int64).reshape(-1, int(doc["n"]))
    return loads_text(text.split("facets")[0]).points
