import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from plwrithe.errors import (Backtracking, BadCharacter, KnotValidationError, NotClosed, NotClosedDegenerate,
                             SelfIntersecting, ZeroEdge)
from plwrithe.knot import (build_pl_knot, edge_directions, is_axis_aligned, load_knot, parse_lattice,
                           sample_closed_curve)
from plwrithe.samples import random_lattice_polygon, random_polygon, random_rotation
from plwrithe.writhe import writhe_formula, writhe_monte_carlo

AXES = {tuple(v) for v in np.vstack([np.eye(3), -np.eye(3)]).astype(int).tolist()}


def test_unit_square(square):
    assert square.n_edges == 4
    assert len(square) == 4


def test_collinear_midpoint_merged():
    k = build_pl_knot([[0, 0, 0], [0.5, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0]])
    assert k.n_edges == 4


def test_bowtie_rejected():
    with pytest.raises(SelfIntersecting):
        build_pl_knot([[0, 0, 0], [1, 1, 0], [1, 0, 0], [0, 1, 0]])


@pytest.mark.parametrize("verts, err", [
    ([[0, 0, 0], [1, 0, 0]], NotClosedDegenerate),
    ([[0, 0, 0], [2, 0, 0], [1, 0, 0], [1, 1, 0]], Backtracking),
    ([[0, 0, 0], [1, 0, 0], [1, 0, 0], [0, 1, 0]], ZeroEdge),
    ([[0, 0, 0], [1, 0, 0], [np.nan, 1, 0]], KnotValidationError),
])
def test_invalid_vertices(verts, err):
    with pytest.raises(err):
        build_pl_knot(verts)


def test_collinear_triple_degenerate():
    with pytest.raises(NotClosedDegenerate):
        build_pl_knot([[0, 0, 0], [1, 1, 1], [2, 2, 2]])


def test_repeated_closing_vertex_dropped(square):
    k = build_pl_knot(np.vstack([square.vertices, square.vertices[:1]]))
    assert k == square


def test_lattice_square():
    lk = parse_lattice("RRUULLDD")
    assert lk.knot.n_edges == 4
    assert np.array_equal(lk.positions[0], [0, 0, 0])
    assert set(map(tuple, lk.positions.tolist())) >= {(2, 0, 0), (2, 0, 2), (0, 0, 2)}


@pytest.mark.parametrize("moves, err", [
    ("RU", NotClosed),
    ("RLUD", Backtracking),
    ("RULDX", BadCharacter),
    ("", BadCharacter),
    ("RFLBRFLB", SelfIntersecting),
])
def test_lattice_errors(moves, err):
    with pytest.raises(err):
        parse_lattice(moves)


def test_lattice_whitespace_ignored():
    assert parse_lattice(" RU\nLD ").moves == "RULD"


def test_sampled_circle():
    t = np.linspace(0, 2 * math.pi, 64, endpoint=False)
    k = sample_closed_curve(np.stack([np.cos(t), np.sin(t), np.zeros_like(t)], axis=1))
    assert k.n_edges == 64


@pytest.mark.slow
def test_smooth_trefoil_formula_matches_monte_carlo(trefoil_smooth):
    wf = writhe_formula(trefoil_smooth).value
    mc = writhe_monte_carlo(trefoil_smooth, 10**6, seed=5)
    assert abs(wf - mc.value) <= 3 * mc.std_error


def test_edge_directions_square(square):
    expect = [[1, 0, 0], [0, 1, 0], [-1, 0, 0], [0, -1, 0]]
    assert np.array_equal(edge_directions(square), expect)


def test_edge_directions_reversed(rng):
    k = random_polygon(rng, 9)
    d = edge_directions(k)
    dr = edge_directions(k.reversed())
    assert np.allclose(dr, -d[::-1])


def test_lattice_directions_are_axes(rng):
    for _ in range(5):
        lk = random_lattice_polygon(rng)
        d = edge_directions(lk.knot)
        assert {tuple(x) for x in np.rint(d).astype(int).tolist()} <= AXES
        assert np.allclose(d, np.rint(d))
        assert is_axis_aligned(lk.knot)


def test_knot_is_immutable(square):
    with pytest.raises(ValueError):
        square.vertices[0, 0] = 5.0


def test_load_formats(tmp_path, square):
    p = tmp_path / "sq.json"
    p.write_text(square.to_json())
    assert load_knot(p) == square
    q = tmp_path / "t.lat"
    q.write_text("RRUULLDD\n")
    assert load_knot(q).moves == "RRUULLDD"
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps([1, 2]))
    with pytest.raises(KnotValidationError):
        load_knot(bad)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(5, 14))
def test_build_idempotent(seed, n):
    k = random_polygon(np.random.default_rng(seed), n)
    assert build_pl_knot(k.vertices) == k


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_rotation_commutes_with_build(seed):
    rng = np.random.default_rng(seed)
    k = random_polygon(rng, 8)
    rot = random_rotation(rng)
    built = build_pl_knot(k.vertices @ rot.T)
    assert np.allclose(built.vertices, k.vertices @ rot.T, atol=1e-12)
