import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from plwrithe.arrangement import build_arrangement, coordinate_guides, offsets_from_base, verify_corollary
from plwrithe.errors import OnBoundary
from plwrithe.indicatrix import build_indicatrix
from plwrithe.projection import tait_number
from plwrithe.samples import random_lattice_polygon, random_planar_polygon, random_polygon


def _check_global(arr):
    assert arr.euler_characteristic == 2
    assert arr.total_area == pytest.approx(4 * math.pi, abs=1e-8)
    assert all(0 < f.area <= 4 * math.pi for f in arr.faces)


def test_lattice_octants(trefoil_lattice):
    arr = build_arrangement(build_indicatrix(trefoil_lattice.knot), guides=coordinate_guides())
    _check_global(arr)
    assert (len(arr.vertices), len(arr.edges), len(arr.faces)) == (6, 12, 8)
    assert all(f.area == pytest.approx(math.pi / 2, abs=1e-9) for f in arr.faces)
    f = arr.locate_face(np.ones(3) / math.sqrt(3))
    assert np.all(arr.faces[f].representative > 0)


def test_planar_two_hemispheres(rng):
    k = random_planar_polygon(rng, 7)
    arr = build_arrangement(build_indicatrix(k))
    _check_global(arr)
    assert len(arr.faces) == 2
    assert [f.area for f in arr.faces] == pytest.approx([2 * math.pi] * 2, abs=1e-9)
    assert [f.offset for f in arr.faces] == [0, 0]
    assert [tait_number(k, f.representative) for f in arr.faces] == [0, 0]
    assert verify_corollary(arr, k).passed


def test_lattice_trefoil_corollary(trefoil_lattice):
    k = trefoil_lattice.knot
    arr = build_arrangement(build_indicatrix(k))
    _check_global(arr)
    assert verify_corollary(arr, k).passed


@pytest.fixture(scope="module")
def random_arrangements():
    rng = np.random.default_rng(99)
    out = []
    for _ in range(20):
        k = random_polygon(rng, 8)
        out.append((k, build_arrangement(build_indicatrix(k))))
    return out


def test_random_sanity_and_corollary(random_arrangements):
    for k, arr in random_arrangements:
        _check_global(arr)
        assert verify_corollary(arr, k).passed


def test_locate_round_trip_and_antipodes(random_arrangements):
    for k, arr in random_arrangements[:8]:
        for f in arr.faces:
            assert arr.locate_face(f.representative) == f.id
            g = arr.faces[arr.antipodal_face(f.id)]
            assert g.tait == f.tait
            assert g.area == pytest.approx(f.area, abs=1e-9)


def test_on_boundary_rejected(random_arrangements):
    _, arr = random_arrangements[0]
    with pytest.raises(OnBoundary):
        arr.locate_face(arr.vertices[0])


def test_offsets_match_direct_projection(random_arrangements):
    for k, arr in random_arrangements[:8]:
        base = arr.faces[arr.base]
        t0 = tait_number(k, base.representative)
        for f in arr.faces:
            assert tait_number(k, f.representative) - t0 == f.offset


def test_simple_arc_jump_is_one(random_arrangements):
    for k, arr in random_arrangements[:5]:
        for e in arr.edges:
            if e.cover == 1:
                jump = arr.faces[e.north_face].offset - arr.faces[e.south_face].offset
                assert abs(jump) == 1


def test_path_independence(random_arrangements):
    for _, arr in random_arrangements[:8]:
        a = offsets_from_base(arr, 0)
        b = offsets_from_base(arr, len(arr.faces) - 1)
        shift = {a[f] - b[f] for f in a}
        assert len(shift) == 1


def test_json_dump(random_arrangements):
    _, arr = random_arrangements[0]
    d = json.loads(arr.to_json())
    assert len(d["faces"]) == len(arr.faces)
    assert sum(f["area"] for f in d["faces"]) == pytest.approx(4 * math.pi, abs=1e-8)
    assert {"multiplicity", "north_face", "south_face"} <= set(d["edges"][0])


def test_random_lattice_guided(rng):
    for _ in range(3):
        lk = random_lattice_polygon(rng)
        arr = build_arrangement(build_indicatrix(lk.knot), guides=coordinate_guides())
        _check_global(arr)
        assert len(arr.faces) == 8


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(4, 12))
def test_euler_and_area_property(seed, n):
    k = random_polygon(np.random.default_rng(seed), n)
    _check_global(build_arrangement(build_indicatrix(k)))
