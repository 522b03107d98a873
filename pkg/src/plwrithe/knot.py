"""Polygonal and lattice knots: construction, validation and file formats."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

from .errors import (Backtracking, BadCharacter, KnotValidationError, NotClosed,
                     NotClosedDegenerate, SelfIntersecting, ZeroEdge)
from .sphere import EPS_GEO, EPS_LEN

LATTICE_STEPS = {
    "R": (1, 0, 0), "L": (-1, 0, 0),
    "U": (0, 0, 1), "D": (0, 0, -1),
    "F": (0, 1, 0), "B": (0, -1, 0),
}
_INVERSE = {"R": "L", "L": "R", "U": "D", "D": "U", "F": "B", "B": "F"}


@dataclass(frozen=True, eq=False)
class PLKnot:
    """A validated closed polygon; edge ``i`` joins vertex ``i`` to ``i+1 (mod n)``.

    Build instances with :func:`build_pl_knot`.  Derived quantities used by
    the projection and arrangement code are memoized on the instance.
    """

    vertices: np.ndarray
    cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        v = np.array(self.vertices, dtype=float)
        v.setflags(write=False)
        object.__setattr__(self, "vertices", v)

    def __eq__(self, other):
        if not isinstance(other, PLKnot):
            return NotImplemented
        return self.vertices.shape == other.vertices.shape and bool(
            np.array_equal(self.vertices, other.vertices))

    __hash__ = object.__hash__

    def __len__(self):
        return len(self.vertices)

    @property
    def n_edges(self) -> int:
        return len(self.vertices)

    @cached_property
    def edge_vectors(self) -> np.ndarray:
        return np.roll(self.vertices, -1, axis=0) - self.vertices

    @cached_property
    def scale(self) -> float:
        """Largest vertex distance from the centroid (never below 1e-300)."""
        c = self.vertices.mean(axis=0)
        return max(float(np.max(np.linalg.norm(self.vertices - c, axis=1))), 1e-300)

    def reversed(self) -> PLKnot:
        """Same polygon traversed backwards; edge k is minus edge n-1-k."""
        return PLKnot(np.roll(self.vertices[::-1], 1, axis=0))

    def transformed(self, rotation=None, translation=None, scale: float = 1.0) -> PLKnot:
        v = self.vertices * scale
        if rotation is not None:
            v = v @ np.asarray(rotation, dtype=float).T
        if translation is not None:
            v = v + np.asarray(translation, dtype=float)
        return PLKnot(v)

    def to_json(self) -> str:
        return json.dumps({"vertices": self.vertices.tolist()})


@dataclass(frozen=True, eq=False)
class LatticeKnot:
    moves: str
    knot: PLKnot
    positions: np.ndarray = field(repr=False)


def _segment_distances(p0, p1, q0, q1) -> np.ndarray:
    """Vectorized minimum distance between 3D segments ``p0p1`` and ``q0q1``."""
    d1 = p1 - p0
    d2 = q1 - q0
    r = p0 - q0
    a = np.einsum("ij,ij->i", d1, d1)
    e = np.einsum("ij,ij->i", d2, d2)
    f = np.einsum("ij,ij->i", d2, r)
    c = np.einsum("ij,ij->i", d1, r)
    b = np.einsum("ij,ij->i", d1, d2)
    denom = a * e - b * b
    with np.errstate(divide="ignore", invalid="ignore"):
        s = np.where(denom > 1e-300 * (a * e + 1e-300), np.clip((b * f - c * e) / denom, 0, 1), 0.0)
        t = (b * s + f) / e
        s = np.where(t < 0, np.clip(-c / a, 0, 1), np.where(t > 1, np.clip((b - c) / a, 0, 1), s))
        t = np.clip(t, 0, 1)
    diff = (p0 + d1 * s[:, None]) - (q0 + d2 * t[:, None])
    return np.linalg.norm(diff, axis=1)


def _merge_collinear(v: np.ndarray, eps: float) -> np.ndarray:
    changed = True
    while changed and len(v) >= 3:
        changed = False
        e = np.roll(v, -1, axis=0) - v
        prev = np.roll(e, 1, axis=0)
        lens = np.linalg.norm(e, axis=1)
        plen = np.roll(lens, 1)
        cross = np.linalg.norm(np.cross(prev, e), axis=1)
        dots = np.einsum("ij,ij->i", prev, e)
        same = (cross <= eps * plen * lens) & (dots > 0)
        if np.any(same):
            # drop one vertex at a time so neighbouring tests stay valid
            k = int(np.argmax(same))
            v = np.delete(v, k, axis=0)
            changed = True
    return v


def build_pl_knot(vertices, eps: float = EPS_LEN) -> PLKnot:
    """Validate a vertex cycle and return a :class:`PLKnot`.

    Adjacent collinear edges pointing the same way are merged.  A trailing
    vertex that exactly repeats the first one is dropped, since closure is
    implied.
    """
    v = np.asarray(vertices, dtype=float)
    if v.ndim != 2 or v.shape[1] != 3:
        raise KnotValidationError(f"vertices must be an (n, 3) array, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise KnotValidationError("vertex coordinates must be finite")
    if len(v) >= 2 and np.array_equal(v[0], v[-1]):
        v = v[:-1]
    if len(v) < 3:
        raise NotClosedDegenerate(f"need at least 3 vertices, got {len(v)}")
    scale = max(float(np.max(np.linalg.norm(v - v.mean(axis=0), axis=1))), 1.0)
    e = np.roll(v, -1, axis=0) - v
    lens = np.linalg.norm(e, axis=1)
    if np.any(lens <= eps * scale):
        k = int(np.argmin(lens))
        raise ZeroEdge(f"edge {k} has length {lens[k]:.3g}")

    v = _merge_collinear(v, EPS_GEO)
    if len(v) < 3:
        raise NotClosedDegenerate("fewer than 3 vertices remain after merging collinear edges")

    e = np.roll(v, -1, axis=0) - v
    lens = np.linalg.norm(e, axis=1)
    prev = np.roll(e, 1, axis=0)
    plen = np.roll(lens, 1)
    cross = np.linalg.norm(np.cross(prev, e), axis=1)
    dots = np.einsum("ij,ij->i", prev, e)
    back = (cross <= EPS_GEO * plen * lens) & (dots < 0)
    if np.any(back):
        k = int(np.argmax(back))
        raise Backtracking(f"edges {(k - 1) % len(v)} and {k} are anti-parallel")

    n = len(v)
    if n > 3:
        ii, jj = np.triu_indices(n, 2)
        keep = ~((ii == 0) & (jj == n - 1))
        ii, jj = ii[keep], jj[keep]
        w = np.roll(v, -1, axis=0)
        dist = _segment_distances(v[ii], w[ii], v[jj], w[jj])
        bad = dist <= eps * scale
        if np.any(bad):
            k = int(np.argmax(bad))
            raise SelfIntersecting(f"edges {ii[k]} and {jj[k]} intersect")
    return PLKnot(v)


def parse_lattice(moves: str) -> LatticeKnot:
    """Parse a closed lattice walk over ``R L U D F B`` (+x -x +z -z +y -y)."""
    s = "".join(moves.split())
    if not s:
        raise BadCharacter("empty move string")
    for k, ch in enumerate(s):
        if ch not in LATTICE_STEPS:
            raise BadCharacter(f"bad move {ch!r} at position {k}")
    n = len(s)
    for k in range(n):
        if s[(k + 1) % n] == _INVERSE[s[k]]:
            raise Backtracking(f"moves {k} and {(k + 1) % n} backtrack ({s[k]}{s[(k + 1) % n]})")
    steps = np.array([LATTICE_STEPS[ch] for ch in s], dtype=np.int64)
    pos = np.cumsum(steps, axis=0)
    if np.any(pos[-1] != 0):
        raise NotClosed(f"walk ends at {tuple(int(x) for x in pos[-1])}, not the origin")
    pos = np.vstack([np.zeros((1, 3), dtype=np.int64), pos[:-1]])
    if len({tuple(p) for p in pos.tolist()}) != n:
        raise SelfIntersecting("lattice walk revisits a vertex")
    knot = build_pl_knot(pos.astype(float))
    return LatticeKnot(moves=s, knot=knot, positions=pos)


def sample_closed_curve(points) -> PLKnot:
    """PL knot through ordered samples of a closed curve.

    Its writhe approximates the smooth curve's writhe as the sampling is
    refined; no error bound is attached.
    """
    return build_pl_knot(points)


def edge_directions(knot: PLKnot) -> np.ndarray:
    """Unit direction of every edge, in cyclic order, as an ``(n, 3)`` array."""
    d = knot.cache.get("directions")
    if d is None:
        e = knot.edge_vectors
        d = e / np.linalg.norm(e, axis=1, keepdims=True)
        d.setflags(write=False)
        knot.cache["directions"] = d
    return d


def is_axis_aligned(knot: PLKnot) -> bool:
    d = np.abs(edge_directions(knot))
    return bool(np.all(np.isclose(d.max(axis=1), 1.0, atol=1e-12)))


def load_knot(path) -> PLKnot | LatticeKnot:
    """Read a ``.json`` vertex file or a ``.lat`` move string.

    Other extensions are sniffed: JSON objects are vertex files, anything
    else is treated as a lattice walk.
    """
    path = Path(path)
    text = path.read_text()
    suffix = path.suffix.lower()
    if suffix == ".lat":
        return parse_lattice(text)
    if suffix != ".json" and not text.lstrip().startswith("{"):
        return parse_lattice(text)
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise KnotValidationError(f"{path}: invalid JSON ({exc})") from None
    if not isinstance(data, dict) or "vertices" not in data:
        raise KnotValidationError(f'{path}: expected an object with a "vertices" list')
    return build_pl_knot(data["vertices"])


def as_pl_knot(k: PLKnot | LatticeKnot) -> PLKnot:
    return k.knot if isinstance(k, LatticeKnot) else k
