"""Acceptance suite: one test group per numbered criterion.

Each test records its outcome in ``conftest.CRITERIA``; the terminal summary
prints one PASS/FAIL line per criterion.  Two parts are known to be
unattainable at these sizes and are marked strict xfail, so they report FAIL
without breaking the run.
"""

import itertools
import time
from pathlib import Path

import mpmath
import numpy as np
import pytest

from conftest import CRITERIA
from facetlab.cli import main
from facetlab.entropy import derive_fixed_constants, f_entropy, fixed_constants
from facetlab.hull import facet_enum, facet_enum_bruteforce, sample_polytope, verify_h_rep
from facetlab.rng import stream
from facetlab.sandwich import facet_growth_experiment, sample_boundary_points, weingarten_audit
from facetlab.suites import CHECKS, SuiteConfig, rows_to_csv, run_checks
from facetlab.tilted import gamma_prefactor, tangent_tail_bounds

SEED = 0
SIZES = {"tangent": 50, "berry-esseen": 50, "montgomery-smith": 1000}


def record(k, part, passed, detail):
    CRITERIA[k].append((part, bool(passed), detail))


def suite_rows(name, threads=1):
    cfg = SuiteConfig(seed=SEED, samples=SIZES.get(name, 200), threads=threads)
    return list(run_checks([name], cfg))


def summarise(rows):
    bad = [r for r in rows if not r.passed]
    return len(bad), f"{len(rows)} checks, {len(bad)} violations"


# -- criterion 1 --------------------------------------------------------------


def test_criterion_1_chernoff():
    t0 = time.perf_counter()
    rows = suite_rows("chernoff")
    elapsed = time.perf_counter() - t0
    assert sorted({r.n for r in rows}) == [8, 12, 16]
    assert all(sum(r.n == n for r in rows) == 200 for n in (8, 12, 16))
    bad, msg = summarise(rows)
    ok = bad == 0 and elapsed <= 300
    record(1, "chernoff", ok, f"{msg}, {elapsed:.1f}s")
    assert ok


# -- criterion 2 --------------------------------------------------------------


def test_criterion_2_bracket_and_identity():
    rows = suite_rows("tangent")
    assert all(sum(r.n == n and r.check == "tilted-identity" for r in rows) == 50 for n in (10, 14, 18))
    bad, msg = summarise(rows)
    record(2, "bracket and identity on all samples", bad == 0, msg)
    assert bad == 0


def test_criterion_2_large_n_informative_bounds():
    rows = suite_rows("large-n")
    lowers = [r for r in rows if "lower" in r.check]
    bad, msg = summarise(rows)
    ok = bad == 0 and all(r.rhs > 0 for r in lowers)
    record(2, "grouped large-n with positive lower bounds", ok, msg)
    assert ok


@pytest.mark.xfail(strict=True, reason="the tangent lower bound is non-positive for every x when n < 3619")
def test_criterion_2_positive_lower_bound_samples():
    budget = 5000
    found = {}
    for n in (10, 14, 18):
        rng = stream(SEED, 0x5450, n)
        found[n] = sum(tangent_tail_bounds(rng.uniform(-0.3, 0.3, n)).lower > 0 for _ in range(budget))
    ok = all(v >= 50 for v in found.values())
    record(2, "50 samples with positive lower bound per n", ok,
           ", ".join(f"n={n}: {v} of {budget} draws" for n, v in found.items()))
    assert ok


# -- criteria 3 to 5 ----------------------------------------------------------


@pytest.mark.parametrize("k,name", [(3, "montgomery-smith"), (4, "majority"), (5, "berry-esseen")])
def test_criteria_3_to_5_suites(k, name):
    rows = suite_rows(name)
    if name == "majority":
        grid = {(r.n, r.check) for r in rows if r.check != "majority-weighted"}
        assert {m for m, _ in grid} == set(range(3, 25))
        assert all((m, "majority-simplified") in grid for m in range(3, 25))
    if name == "berry-esseen":
        assert all(sum(r.n == n for r in rows) == 50 for n in (10, 14))
    if name == "montgomery-smith":
        assert len(rows) == 1000 and max(r.n for r in rows) <= 20
    bad, msg = summarise(rows)
    record(k, name, bad == 0, msg)
    assert bad == 0


# -- criterion 6 --------------------------------------------------------------


def test_criterion_6_hull_equivalence():
    rng = stream(SEED, 0x4855)
    done = skipped = mismatches = unverified = 0
    trial = 0
    while done < 100:
        n = int(rng.integers(3, 7))
        N = int(rng.integers(n + 1, min(20, 2**n) + 1))
        draws = sample_polytope(n, N, SEED, path=(trial,))
        trial += 1
        a, b = facet_enum(draws), facet_enum_bruteforce(draws)
        if not a.full_dimensional:
            skipped += 1
            mismatches += a.dim_affine != b.dim_affine or b.facets != ()
            continue
        done += 1
        mismatches += a.facets != b.facets
        unverified += not verify_h_rep(draws, a)
    cube = np.array(list(itertools.product((-1, 1), repeat=3)))
    tetra = np.array([(1, 1, 1), (1, -1, -1), (-1, 1, -1), (-1, -1, 1)])
    fixed = [(cube, 6), (tetra, 4)]
    simplex_rng = stream(SEED, 0x5358)
    for n in range(2, 8):
        while True:
            pts = simplex_rng.choice([-1, 1], size=(n + 1, n))
            if facet_enum(pts).full_dimensional:
                break
        fixed.append((pts, n + 1))
    fixed_ok = all(
        facet_enum(p).f_count == c == facet_enum_bruteforce(p).f_count and verify_h_rep(p, facet_enum(p))
        for p, c in fixed
    )
    ok = mismatches == 0 and unverified == 0 and fixed_ok
    record(6, "hull oracle equivalence", ok,
           f"100 instances ({skipped} lower-dimensional draws also compared), {mismatches} mismatches, "
           f"{unverified} failed audits, fixed cases {'ok' if fixed_ok else 'wrong'}")
    assert ok


# -- criterion 7 --------------------------------------------------------------


def test_criterion_7_constants():
    with mpmath.workdps(40):
        g = mpmath.tanh(1 / (48 * mpmath.sqrt(2 * mpmath.pi)))
        c = 4 * mpmath.log(12)
        cosh_h = mpmath.cosh(mpmath.atanh(g))
        target = 5 / (6 * mpmath.sqrt(2 * mpmath.pi))
        k = 1
        while True:
            v = mpmath.sqrt(2 * k) / cosh_h
            m1 = (2 * v / (v + mpmath.sqrt(v * v + 4))) / mpmath.sqrt(2 * mpmath.pi)
            if m1 >= target:
                break
            k += 1
        fg = (1 + g) / 2 * mpmath.log(1 + g) + (1 - g) / 2 * mpmath.log(1 - g)
        pref = mpmath.sqrt(fg) / (10 * mpmath.atanh(g))
        g_ceiling = mpmath.tanh(1 / c)
    consts = fixed_constants()
    derived = derive_fixed_constants()
    parts = {
        "gamma to 12 digits": abs(consts.gamma - float(g)) <= 0.5e-12 * float(g),
        "gamma below ceiling": consts.gamma <= float(g_ceiling),
        "k(gamma) = 3": consts.k_gamma == k == derived["k_gamma"] == 3,
        "prefactor within 1e-4": abs(gamma_prefactor() - float(pref)) <= 1e-4 * float(pref),
        "prefactor rounds to 0.0707": round(gamma_prefactor(), 4) == 0.0707,
    }
    ok = all(parts.values())
    record(7, "constants", ok, ", ".join(f"{p}: {'ok' if v else 'no'}" for p, v in parts.items()))
    assert ok


# -- criterion 8 --------------------------------------------------------------


def test_criterion_8_curvature():
    gp = 0.3
    beta = 0.5 * float(f_entropy(gp))
    fails = {"trace": 0, "amgm": 0, "level": 0, "fd": 0}
    total = 0
    for n in range(3, 9):
        pts, _ = sample_boundary_points(n, beta, 100, stream(SEED, 0x4355, n), gamma_prime=gp)
        assert len(pts) == 100
        for bp in pts:
            r = weingarten_audit(bp, gamma_prime=gp, fd_step=1e-6)
            total += 1
            fails["trace"] += not r.trace_gap <= 1e-9
            fails["amgm"] += not 0 < r.kappa <= r.amgm_bound * (1 + 1e-12)
            fails["level"] += not (1 / r.kappa >= r.inv_kappa_bound * (1 - 1e-12)
                                   and r.inv_kappa_bound >= r.level_bound * (1 - 1e-12))
            fails["fd"] += not r.fd_error <= 1e-6
    ok = not any(fails.values())
    record(8, "curvature", ok, f"{total} points, violations {fails}")
    assert ok


# -- criterion 9 --------------------------------------------------------------


def test_criterion_9_volume_trend():
    from facetlab.volume import volume_sweep

    N_list = [12, 24, 48, 96, 192]
    t0 = time.perf_counter()
    draws = sample_polytope(10, max(N_list), SEED)
    ests = volume_sweep(draws, N_list, 10_000, SEED)
    elapsed = time.perf_counter() - t0
    steps = [(b.value - a.value, a.half_width + b.half_width) for a, b in zip(ests, ests[1:])]
    ok = all(d > hw for d, hw in steps) and elapsed <= 600
    record(9, "volume fraction strictly increasing", ok,
           ", ".join(f"{e.value:.4f}" for e in ests) + f", {elapsed:.1f}s")
    assert ok


@pytest.mark.xfail(strict=True, reason="at n = 7 the hull saturates the cube well before N = 160")
def test_criterion_9_facet_trend():
    t0 = time.perf_counter()
    rep = facet_growth_experiment(7, [20, 40, 80, 160], 30, SEED)
    elapsed = time.perf_counter() - t0
    means = [row["mean"] for row in rep.summary["per_N"]]
    ok = rep.summary["nondecreasing"] and elapsed <= 600
    record(9, "mean facet count nondecreasing", ok, ", ".join(f"{m:.1f}" for m in means) + f", {elapsed:.1f}s")
    assert ok


# -- criterion 10 -------------------------------------------------------------


@pytest.mark.parametrize("name", sorted(CHECKS))
def test_criterion_10_suite_determinism(name):
    first = rows_to_csv(suite_rows(name, threads=1))
    again = rows_to_csv(suite_rows(name, threads=1))
    wide = rows_to_csv(suite_rows(name, threads=8))
    ok = first == again == wide
    record(10, name, ok, f"{len(first.encode())} bytes")
    assert ok


EXPERIMENTS = {
    "hull": ["hull", "--n", "6", "--N", "30"],
    "scaling": ["scaling", "--n", "6", "--N-list", "10,20,40", "--trials", "12", "--mode", "both",
                "--samples", "4000"],
    "sandwich": ["sandwich", "--n", "6", "--N", "24", "--trials", "8", "--samples", "40"],
}


@pytest.mark.parametrize("name", sorted(EXPERIMENTS))
def test_criterion_10_cli_determinism(name, tmp_path):
    outputs = []
    for tag, threads in (("a", "1"), ("b", "1"), ("c", "8")):
        out = tmp_path / tag
        assert main([*EXPERIMENTS[name], "--seed", "5", "--threads", threads, "--output", str(out)]) == 0
        outputs.append({p.name: p.read_bytes() for p in sorted(Path(out).iterdir()) if p.suffix in (".csv", ".txt")})
    ok = bool(outputs[0]) and outputs[0] == outputs[1] == outputs[2]
    record(10, f"cli {name}", ok, f"{len(outputs[0])} data files")
    assert ok
