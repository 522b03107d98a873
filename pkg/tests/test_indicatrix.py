import json
import math

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from plwrithe.indicatrix import build_indicatrix
from plwrithe.knot import edge_directions
from plwrithe.projection import DirectionClass, classify_direction
from plwrithe.samples import random_lattice_polygon, random_planar_polygon, random_polygon
from plwrithe.sphere import sample_directions


def test_planar_arcs_on_one_circle(rng):
    k = random_planar_polygon(rng, 8)
    ind = build_indicatrix(k)
    nrm = ind.normals
    assert np.allclose(np.abs(nrm @ nrm[0]), 1.0)


def test_lattice_arcs_on_coordinate_circles(rng):
    for _ in range(5):
        ind = build_indicatrix(random_lattice_polygon(rng).knot)
        # every arc normal is a coordinate axis
        assert np.allclose(np.max(np.abs(ind.normals), axis=1), 1.0)


def test_two_n_arcs(rng):
    k = random_polygon(rng, 11)
    assert len(build_indicatrix(k)) == 22


def test_lattice_contains(trefoil_lattice):
    ind = build_indicatrix(trefoil_lattice.knot)
    assert not ind.contains(np.ones(3) / math.sqrt(3))
    assert ind.contains(np.array([1.0, 1.0, 0.0]) / math.sqrt(2))


def test_json_export(square):
    d = json.loads(build_indicatrix(square).to_json())
    assert len(d["arcs"]) == 8
    assert all(set(a) == {"start", "end", "multiplicity"} for a in d["sub_arcs"])


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(5, 12))
def test_antipodal_closure(seed, n):
    rng = np.random.default_rng(seed)
    ind = build_indicatrix(random_polygon(rng, n))
    arcs = {(tuple(np.round(p, 9)), tuple(np.round(q, 9))) for p, q in zip(ind.starts, ind.ends)}
    neg = {(tuple(np.round(-q, 9)), tuple(np.round(-p, 9))) for p, q in zip(ind.starts, ind.ends)}
    assert {frozenset(a) for a in arcs} == {frozenset(a) for a in neg}
    for x in sample_directions(rng, 50):
        assert ind.contains(x) == ind.contains(-x)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_edge_directions_on_indicatrix(seed):
    rng = np.random.default_rng(seed)
    k = random_polygon(rng, 9)
    ind = build_indicatrix(k)
    for s in edge_directions(k):
        assert ind.contains(s)
        assert classify_direction(k, s) is DirectionClass.EDGE_PARALLEL
