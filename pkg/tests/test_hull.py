import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from facetlab.hull import (
    Facet,
    HullCapExceeded,
    HullResult,
    SignMatrix,
    affine_rank,
    classify_points,
    facet_enum,
    facet_enum_bruteforce,
    membership,
    sample_polytope,
    verify_h_rep,
)
from facetlab.hullio import dumps_json, dumps_text, loads_json, loads_text, read_points
from facetlab.volume import VertexHullOracle, volume_fraction_mc, volume_sweep

CUBE3 = np.array(list(itertools.product((-1, 1), repeat=3)))
TETRA = np.array([(1, 1, 1), (1, -1, -1), (-1, 1, -1), (-1, -1, 1)])


def test_cube_and_tetrahedron():
    assert facet_enum(CUBE3).f_count == 6
    assert facet_enum_bruteforce(CUBE3).f_count == 6
    assert facet_enum(TETRA).f_count == 4
    assert facet_enum_bruteforce(TETRA).f_count == 4


@pytest.mark.parametrize("n", range(1, 8))
def test_full_cube_has_2n_facets(n):
    hull = facet_enum(sample_polytope(n, exhaustive=True))
    assert hull.f_count == 2 * n
    assert all(len(f.support) == 2 ** (n - 1) for f in hull.facets)


def test_segment_is_degenerate():
    hull = facet_enum(np.array([(1, 1), (-1, -1)]))
    assert hull.dim_affine == 1
    assert hull.facets == ()
    single = facet_enum(np.array([(1, -1, 1)]))
    assert single.dim_affine == 0


def test_simplex_from_independent_points():
    rng = np.random.default_rng(0)
    for n in range(2, 7):
        while True:
            pts = rng.choice([-1, 1], size=(n + 1, n))
            if affine_rank(pts) == n:
                break
        assert facet_enum(pts).f_count == n + 1
        assert facet_enum_bruteforce(pts).f_count == n + 1


@settings(max_examples=40, deadline=None)
@given(st.integers(3, 6), st.integers(4, 20), st.integers(0, 10**6))
def test_incremental_matches_bruteforce(n, N, seed):
    draws = sample_polytope(n, min(N, 2**n), seed)
    a = facet_enum(draws)
    b = facet_enum_bruteforce(draws)
    assert a.dim_affine == b.dim_affine
    assert a.keys() == b.keys()
    assert a.facets == b.facets
    if a.full_dimensional:
        assert verify_h_rep(draws, a)


def test_facets_are_primitive_and_outward():
    draws = sample_polytope(6, 30, 4)
    hull = facet_enum(draws)
    pts = hull.points
    for f in hull.facets:
        assert np.gcd.reduce(np.abs(np.array(f.normal + (f.offset,)))) == 1
        vals = pts @ np.array(f.normal)
        assert vals.max() == f.offset
        assert len(f.support) >= 6
        assert affine_rank(pts[list(f.support)]) == 5
        key = f.hyperplane_key()
        assert next(a for a in key[0] if a) > 0


def test_hadamard_bound():
    for n in range(3, 9):
        hull = facet_enum(sample_polytope(n, min(3 * n, 2**n), n))
        bound = (n - 1) ** ((n - 1) / 2)
        assert all(max(abs(a) for a in f.normal) <= bound for f in hull.facets)


def test_point_order_irrelevant():
    draws = sample_polytope(5, 18, 2)
    perm = np.random.default_rng(1).permutation(18)
    a = facet_enum(draws)
    b = facet_enum(draws.rows[perm])
    assert a.keys() == b.keys()


def test_coordinate_permutation_and_sign_flip_equivariance():
    draws = sample_polytope(5, 16, 9)
    base = facet_enum(draws).keys()
    perm = np.array([2, 0, 4, 1, 3])
    permuted = facet_enum(draws.rows[:, perm]).keys()
    assert permuted == {(tuple(a[i] for i in perm), b) for a, b in base}
    flipped_rows = draws.rows.copy()
    flipped_rows[:, 1] *= -1
    flipped = facet_enum(flipped_rows).keys()
    assert flipped == {(a[:1] + (-a[1],) + a[2:], b) for a, b in base}


def test_duplicates_and_existing_vertices_do_not_change_facets():
    draws = sample_polytope(5, 14, 6)
    base = facet_enum(draws)
    doubled = np.vstack([draws.rows, draws.rows[:5]])
    assert facet_enum(doubled).keys() == base.keys()


def test_interior_point_does_not_change_facets():
    base = facet_enum(CUBE3).keys()
    with_origin = np.vstack([CUBE3, [[0, 0, 0]]])
    assert facet_enum(with_origin).keys() == base
    assert facet_enum_bruteforce(with_origin).keys() == base


def test_euler_characteristic_in_dimension_three():
    for seed in range(10):
        draws = sample_polytope(3, 6, seed)
        hull = facet_enum(draws)
        if not hull.full_dimensional:
            continue
        V = len(hull.points)
        sup = [set(f.support) for f in hull.facets]
        edges = set()
        for i, j in itertools.combinations(range(len(sup)), 2):
            common = sup[i] & sup[j]
            if len(common) >= 2:
                edges.add(frozenset(common))
        assert V - len(edges) + len(sup) == 2


def test_verify_detects_mutations():
    draws = sample_polytope(5, 20, 3)
    hull = facet_enum(draws)
    assert verify_h_rep(draws, hull)
    f0 = hull.facets[0]
    shifted = Facet(f0.normal, f0.offset - 1, f0.support)
    bad = HullResult(hull.points, hull.dim_affine, (shifted,) + hull.facets[1:])
    assert not verify_h_rep(draws, bad)
    dropped = HullResult(hull.points, hull.dim_affine, hull.facets[1:])
    check = verify_h_rep(draws, dropped)
    assert not check
    assert any("ridge" in p for p in check.problems)
    dup = HullResult(hull.points, hull.dim_affine, hull.facets + hull.facets[:1])
    assert not verify_h_rep(draws, dup)


def test_membership_examples():
    hull = facet_enum(CUBE3)
    assert membership([0, 0, 0], hull) == "inside"
    assert membership([1, 1, 1], hull) == "boundary"
    assert membership([2, 0, 0], hull) == "outside"
    t = facet_enum(TETRA)
    assert membership([0.5, 0.5, 0.5], t) == "inside"
    assert membership([1, 0, 0], t) == "boundary"
    assert membership([0.9, 0.9, -0.9], t) == "outside"


def test_classify_points_agrees_with_exact():
    hull = facet_enum(sample_polytope(5, 20, 8))
    Y = np.random.default_rng(0).uniform(-1, 1, (300, 5))
    fast = classify_points(hull, Y)
    slow = np.array([membership(y, hull) != "outside" for y in Y])
    assert np.array_equal(fast, slow)


def test_sampler_determinism_and_means():
    a = sample_polytope(10, 10_000, 42, allow_oversample=True)
    b = sample_polytope(10, 10_000, 42, allow_oversample=True)
    assert np.array_equal(a.rows, b.rows)
    assert np.all(np.abs(a.rows.mean(axis=0)) < 0.05)
    assert a.dedup_count == 10_000 - len(a.distinct())


def test_sampler_prefix_nesting():
    big = sample_polytope(6, 64, 3).rows
    small = sample_polytope(6, 20, 3).rows
    assert np.array_equal(big[:20], small)


def test_sampler_ranges():
    with pytest.raises(ValueError):
        sample_polytope(0, 1)
    with pytest.raises(ValueError):
        sample_polytope(3, 9)
    assert sample_polytope(3, 9, allow_oversample=True).draws == 9
    with pytest.raises(ValueError):
        SignMatrix(np.array([[1, 0]]))


def test_caps():
    with pytest.raises(HullCapExceeded):
        facet_enum(sample_polytope(11, 20, 0))
    with pytest.raises(HullCapExceeded):
        facet_enum_bruteforce(sample_polytope(8, 200, 0), subset_cap=1000)


def test_serialisation_round_trip():
    hull = facet_enum(sample_polytope(6, 25, 5))
    text = dumps_text(hull)
    again = loads_text(text)
    assert again.facets == hull.facets
    assert np.array_equal(again.points, hull.points)
    assert dumps_text(again) == text
    js = loads_json(dumps_json(hull))
    assert js.facets == hull.facets
    assert np.array_equal(read_points(text), hull.points)
    assert np.array_equal(read_points(dumps_json(hull)), hull.points)
    with pytest.raises(ValueError):
        loads_text("3 2\n1 1 1\n")


def test_volume_cube_and_tetrahedron():
    cube = volume_fraction_mc(facet_enum(CUBE3), 20_000, 1)
    assert cube.value == 1.0
    tet = volume_fraction_mc(facet_enum(TETRA), 40_000, 2)
    assert abs(tet.value - 1 / 3) <= tet.half_width


def test_vertex_oracle_matches_h_representation():
    draws = sample_polytope(6, 24, 7)
    hull = facet_enum(draws)
    Y = np.random.default_rng(5).uniform(-1, 1, (2000, 6))
    oracle = VertexHullOracle(draws.rows)
    assert np.array_equal(oracle.contains(Y), classify_points(hull, Y))


def test_volume_sweep_nested_and_monotone():
    draws = sample_polytope(6, 64, 11)
    ests = volume_sweep(draws, [10, 20, 40, 64], 4000, 3)
    vals = [e.value for e in ests]
    assert vals == sorted(vals)
    direct = volume_fraction_mc(facet_enum(draws.prefix(20)), 4000, 3)
    assert direct.num == ests[1].num
