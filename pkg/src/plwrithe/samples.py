"""Reference knots and seeded random generators used by tests and the CLI docs."""
from __future__ import annotations

import math

import numpy as np

from .errors import KnotValidationError
from .knot import LatticeKnot, PLKnot, build_pl_knot, parse_lattice

# 24 steps, the minimal length for a trefoil on the cubic lattice
LATTICE_TREFOIL = "LLUBBRRRFFLLBDBBURUFFDDF"

_INVERSE = {"R": "L", "L": "R", "U": "D", "D": "U", "F": "B", "B": "F"}


def lattice_trefoil() -> LatticeKnot:
    return parse_lattice(LATTICE_TREFOIL)


def smooth_trefoil_points(n: int = 200) -> np.ndarray:
    t = np.linspace(0.0, 2.0 * math.pi, n, endpoint=False)
    return np.stack([np.sin(t) + 2 * np.sin(2 * t), np.cos(t) - 2 * np.cos(2 * t), -np.sin(3 * t)], axis=1)


def smooth_trefoil(n: int = 200) -> PLKnot:
    return build_pl_knot(smooth_trefoil_points(n))


def unit_square() -> PLKnot:
    return build_pl_knot([[0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0]])


def random_rotation(rng: np.random.Generator) -> np.ndarray:
    q = rng.standard_normal(4)
    q /= np.linalg.norm(q)
    w, x, y, z = q
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)],
        [2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)],
        [2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)],
    ])


def random_polygon(rng: np.random.Generator, n: int) -> PLKnot:
    """Embedded polygon with ``n`` vertices drawn uniformly in the unit cube."""
    for _ in range(1000):
        try:
            k = build_pl_knot(rng.random((n, 3)))
        except KnotValidationError:
            continue
        if k.n_edges == n:
            return k
    raise RuntimeError("could not draw an embedded polygon")  # pragma: no cover


def random_planar_polygon(rng: np.random.Generator, n: int, rotate: bool = True) -> PLKnot:
    """Star-shaped simple polygon in a random plane."""
    ang = np.sort(rng.uniform(0, 2 * math.pi, n))
    while np.min(np.diff(np.concatenate([ang, [ang[0] + 2 * math.pi]]))) < 1e-3:
        ang = np.sort(rng.uniform(0, 2 * math.pi, n))
    r = rng.uniform(0.5, 1.5, n)
    pts = np.stack([r * np.cos(ang), r * np.sin(ang), np.zeros(n)], axis=1)
    if rotate:
        pts = pts @ random_rotation(rng).T + rng.standard_normal(3)
    return build_pl_knot(pts)


def _valid(moves: str) -> bool:
    try:
        parse_lattice(moves)
    except KnotValidationError:
        return False
    return True


def random_lattice_polygon(rng: np.random.Generator, max_len: int = 40, min_len: int = 12) -> LatticeKnot:
    """Self-avoiding closed lattice walk grown by random kink insertions and corner flips."""
    target = int(rng.integers(min_len // 2, max_len // 2 + 1)) * 2
    dirs = "RLUDFB"
    while True:
        a, b = rng.choice(list("RUF"), 2, replace=False)
        moves = a + b + _INVERSE[a] + _INVERSE[b]
        stalls = 0
        while len(moves) < target and stalls < 2000:
            k = int(rng.integers(len(moves)))
            if rng.random() < 0.5:
                y = dirs[int(rng.integers(6))]
                cand = moves[:k] + y + moves[k] + _INVERSE[y] + moves[k + 1:]
            else:
                r = moves[k:] + moves[:k]
                cand = r[1] + r[0] + r[2:]
            if _valid(cand):
                moves = cand
            else:
                stalls += 1
        for _ in range(4 * len(moves)):
            k = int(rng.integers(len(moves)))
            r = moves[k:] + moves[:k]
            cand = r[1] + r[0] + r[2:]
            if _valid(cand):
                moves = cand
        if _valid(moves):
            return parse_lattice(moves)
