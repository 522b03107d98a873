"""Acceptance gate: one test per criterion, each reporting a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -s`` to see the lines inline; they
are also repeated in the terminal summary of any pytest run.
"""
import math
import time

import numpy as np
import pytest

from plwrithe.arrangement import build_arrangement, coordinate_guides, verify_corollary
from plwrithe.heatmap import grid_face_agreement, read_pgm, write_pgm
from plwrithe.indicatrix import build_indicatrix
from plwrithe.projection import tait_grid, tait_number, tait_numbers
from plwrithe.samples import (lattice_trefoil, random_lattice_polygon, random_planar_polygon, random_polygon,
                              random_rotation, smooth_trefoil)
from plwrithe.sphere import sample_directions
from plwrithe.writhe import (acn_monte_carlo, formula_arrangement, writhe_formula, writhe_from_base,
                             writhe_lattice, writhe_monte_carlo)

RESULTS: list[str] = []
ARRANGEMENTS: list = []


def report(number: int, title: str, ok: bool, detail: str) -> None:
    line = f"criterion {number} {'PASS' if ok else 'FAIL'}  {title}: {detail}"
    RESULTS.append(line)
    print(line)
    assert ok, line


def _arr(knot, **kw):
    arr = build_arrangement(build_indicatrix(knot), **kw)
    ARRANGEMENTS.append(arr)
    return arr


def test_criterion_1_planar_exact():
    rng = np.random.default_rng(101)
    worst, slowest, nonzero = 0.0, 0.0, 0
    for _ in range(20):
        k = random_planar_polygon(rng, int(rng.integers(4, 33)))
        t0 = time.perf_counter()
        w = writhe_formula(k).value
        t, _ = tait_numbers(k, sample_directions(rng, 2000))
        slowest = max(slowest, time.perf_counter() - t0)
        worst = max(worst, abs(w))
        nonzero += int(np.count_nonzero(t))
        ARRANGEMENTS.append(formula_arrangement(k))
    ok = worst <= 1e-12 and nonzero == 0 and slowest < 1.0
    report(1, "planar unknots", ok,
           f"max |Wr| = {worst:.2e}, nonzero Tait samples = {nonzero}, slowest = {slowest:.3f}s")


def test_criterion_2_lattice_structure():
    rng = np.random.default_rng(202)
    bad = []
    for _ in range(10):
        lk = random_lattice_polygon(rng, max_len=40)
        assert len(lk.moves) <= 40
        arr = _arr(lk.knot, guides=coordinate_guides())
        areas_ok = len(arr.faces) == 8 and all(abs(f.area - math.pi / 2) <= 1e-9 for f in arr.faces)
        lat = writhe_lattice(lk)
        quarter = isinstance(lat.numerator, int) and lat.denominator == 4 and lat.value * 4 == lat.numerator
        diff = abs(writhe_formula(lk).value - lat.value)
        if not (areas_ok and quarter and diff <= 1e-10):
            bad.append((lk.moves, len(arr.faces), lat.numerator, diff))
    report(2, "lattice walks", not bad, f"{10 - len(bad)}/10 with 8 faces of pi/2, 4Wr integer, |formula-lattice| <= 1e-10")


def test_criterion_3_oracle_equivalence():
    rng = np.random.default_rng(303)
    t0 = time.perf_counter()
    edges = failures = face_mismatch = 0
    for _ in range(100):
        k = random_polygon(rng, int(rng.integers(8, 13)))
        arr = _arr(k)
        rep = verify_corollary(arr, k)
        edges += len(rep.checks)
        failures += len(rep.failures)
        face_mismatch += sum(tait_number(k, f.representative) != f.tait for f in arr.faces)
    dt = time.perf_counter() - t0
    ok = failures == 0 and face_mismatch == 0 and dt < 60
    report(3, "corollary and propagation", ok,
           f"{edges - failures}/{edges} edges, {face_mismatch} face mismatches, {dt:.1f}s")


def test_criterion_4_formula_vs_monte_carlo():
    rng = np.random.default_rng(404)
    t0 = time.perf_counter()
    passing = 0
    zs = []
    for s in range(20):
        k = random_polygon(rng, int(rng.integers(8, 13)))
        wf = writhe_formula(k).value
        mc = writhe_monte_carlo(k, 10**6, seed=s)
        z = abs(wf - mc.value) / mc.std_error
        zs.append(z)
        passing += z <= 3
    dt = time.perf_counter() - t0
    ok = passing >= 19 and dt < 120
    report(4, "formula vs Monte Carlo", ok, f"{passing}/20 within 3 sigma (max z = {max(zs):.2f}), {dt:.1f}s")


def test_criterion_5_antipodal_symmetry():
    rng = np.random.default_rng(505)
    knots = [random_polygon(rng, int(rng.integers(6, 16))) for _ in range(10)]
    knots += [lattice_trefoil().knot, smooth_trefoil(200)]
    fails = total = 0
    for k in knots:
        xs = sample_directions(rng, 1000)
        a, ma = tait_numbers(k, xs)
        b, mb = tait_numbers(k, -xs)
        generic = ~(ma | mb)
        total += int(generic.sum())
        fails += int(np.count_nonzero(a[generic] != b[generic]))
    report(5, "antipodal symmetry", fails == 0, f"{fails} failures over {total} generic directions")


def test_criterion_6_invariance():
    rng = np.random.default_rng(606)
    rigid = rev = base = 0.0
    for _ in range(10):
        k = random_polygon(rng, int(rng.integers(8, 13)))
        w = writhe_formula(k).value
        moved = k.transformed(random_rotation(rng), rng.normal(0, 10, 3), float(rng.uniform(0.05, 20)))
        rigid = max(rigid, abs(writhe_formula(moved).value - w))
        rev = max(rev, abs(writhe_formula(k.reversed()).value - w))
        arr = formula_arrangement(k)
        ARRANGEMENTS.append(arr)
        picks = rng.choice(len(arr.faces), size=min(5, len(arr.faces)), replace=False)
        for b in picks:
            base = max(base, abs(writhe_from_base(arr, k, int(b)) - w))
    ok = rigid <= 1e-6 and rev <= 1e-10 and base <= 1e-10
    report(6, "invariance", ok, f"rigid/scale {rigid:.1e}, reversal {rev:.1e}, base face {base:.1e}")


def test_criterion_7_trefoil_grid(tmp_path):
    k = smooth_trefoil(200)
    tait, mask = tait_grid(k, 360, 900)
    arr = formula_arrangement(k)
    ARRANGEMENTS.append(arr)
    agree = grid_face_agreement(tait, arr)
    values = sorted(int(v) for v in np.unique(tait))
    path = tmp_path / "trefoil.pgm"
    write_pgm(path, tait)
    emitted = read_pgm(path).shape == (360, 900)
    ok = tait.dtype.kind == "i" and len(values) <= 20 and agree.fraction >= 0.99 and emitted
    report(7, "trefoil Tait grid", ok,
           f"values {values}, agreement {agree.fraction:.4%} of {agree.checked} cells, graymap {'written' if emitted else 'missing'}")


def test_criterion_8_acn_bound():
    rng = np.random.default_rng(808)
    knots = [(lattice_trefoil(), 10**6)] + [(random_polygon(rng, int(rng.integers(8, 13))), 10**6) for _ in range(5)]
    knots.append((smooth_trefoil(200), 200_000))
    bound_bad = seed_bad = 0
    for k, n in knots:
        a1 = acn_monte_carlo(k, n, seed=1)
        a2 = acn_monte_carlo(k, n, seed=2)
        wr = writhe_monte_carlo(k, n, seed=3)
        bound_bad += a1.value < abs(wr.value) - 3 * math.hypot(a1.std_error, wr.std_error)
        seed_bad += abs(a1.value - a2.value) > 6 * math.hypot(a1.std_error, a2.std_error)
    ok = bound_bad == 0 and seed_bad == 0
    report(8, "ACN bound", ok, f"{len(knots)} knots, bound violations {bound_bad}, seed disagreements {seed_bad}")


def test_criterion_9_arrangement_sanity():
    rng = np.random.default_rng(909)
    arrs = list(ARRANGEMENTS)
    for n in (3, 4, 5, 8, 16, 32, 64):
        arrs.append(_arr(random_polygon(rng, n)))
    arrs.append(_arr(random_planar_polygon(rng, 10)))
    arrs.append(_arr(lattice_trefoil().knot))
    arrs.append(_arr(lattice_trefoil().knot, guides=coordinate_guides()))
    euler_bad = sum(a.euler_characteristic != 2 for a in arrs)
    area_dev = max(abs(a.total_area - 4 * math.pi) for a in arrs)
    report(9, "arrangement sanity", euler_bad == 0 and area_dev <= 1e-8,
           f"{len(arrs)} arrangements, Euler failures {euler_bad}, max |sum(area) - 4pi| = {area_dev:.1e}")
