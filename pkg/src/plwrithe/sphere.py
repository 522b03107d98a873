"""Primitives on the unit sphere.

Points of S^2 are plain ``numpy`` arrays of shape ``(3,)``.  All predicates
share one angular tolerance, :data:`EPS_GEO`, applied to dot and cross
products of unit vectors.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateCircle, OpenCycle, ZeroVector

EPS_UNIT = 1e-12
EPS_LEN = 1e-12
EPS_GEO = 1e-9

TWO_PI = 2.0 * math.pi


def as_vec3(v) -> np.ndarray:
    a = np.asarray(v, dtype=float).reshape(-1)
    if a.shape != (3,):
        raise ValueError(f"expected 3 coordinates, got shape {np.shape(v)}")
    if not np.all(np.isfinite(a)):
        raise ValueError("coordinates must be finite")
    return a


def normalize(v, eps: float = EPS_LEN) -> np.ndarray:
    """Return ``v / |v|``; raise :class:`ZeroVector` when ``|v| <= eps``."""
    a = as_vec3(v)
    n = math.sqrt(float(a @ a))
    if n <= eps:
        raise ZeroVector(f"cannot normalize vector of length {n:.3g}")
    return a / n


def normalize_rows(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    return a / np.linalg.norm(a, axis=-1, keepdims=True)


def is_unit(v, eps: float = EPS_UNIT) -> bool:
    a = as_vec3(v)
    return abs(float(a @ a) - 1.0) <= eps


def angle_between(a, b) -> float:
    """Angle between two unit vectors, stable near 0 and pi."""
    return math.atan2(float(np.linalg.norm(np.cross(a, b))), float(np.dot(a, b)))


def tangent_frame(xi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal ``(e1, e2)`` spanning xi-perp with ``e1 x e2 = xi``.

    Counterclockwise in the ``(e1, e2)`` coordinates is counterclockwise as
    seen from the tip of ``xi``.
    """
    xi = np.asarray(xi, dtype=float)
    k = int(np.argmin(np.abs(xi)))
    helper = np.zeros(3)
    helper[k] = 1.0
    e1 = np.cross(helper, xi)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(xi, e1)
    return e1, e2


class Side(enum.Enum):
    NORTH = 1
    SOUTH = -1
    ON = 0


def side_of_great_circle(p1, p2, xi, eps: float = EPS_GEO) -> Side:
    """Which side of the oriented great circle through ``p1 -> p2`` holds ``xi``.

    North is where ``(p1 x p2) . xi > 0``.  The cross product is normalized
    first so ``eps`` is an angular distance from the circle.
    """
    c = np.cross(as_vec3(p1), as_vec3(p2))
    n = float(np.linalg.norm(c))
    if n <= eps:
        raise DegenerateCircle("p1 and p2 are equal or antipodal")
    s = float(c @ as_vec3(xi)) / n
    if s > eps:
        return Side.NORTH
    if s < -eps:
        return Side.SOUTH
    return Side.ON


@dataclass(frozen=True, eq=False)
class GreatArc:
    """Oriented minor geodesic from ``start`` to ``end``."""

    start: np.ndarray
    end: np.ndarray
    eps: float = field(default=EPS_GEO, repr=False)

    def __post_init__(self):
        s = as_vec3(self.start)
        e = as_vec3(self.end)
        if not (is_unit(s, 1e-9) and is_unit(e, 1e-9)):
            raise ValueError("arc endpoints must be unit vectors")
        if np.linalg.norm(np.cross(s, e)) <= self.eps:
            raise DegenerateCircle("arc endpoints are equal or antipodal")
        object.__setattr__(self, "start", s)
        object.__setattr__(self, "end", e)

    @property
    def normal(self) -> np.ndarray:
        c = np.cross(self.start, self.end)
        return c / np.linalg.norm(c)

    @property
    def length(self) -> float:
        return angle_between(self.start, self.end)

    @property
    def midpoint(self) -> np.ndarray:
        return normalize(self.start + self.end)

    def reversed(self) -> GreatArc:
        return GreatArc(self.end, self.start, self.eps)

    def tangent_at_start(self) -> np.ndarray:
        return np.cross(self.normal, self.start)

    def tangent_at_end(self) -> np.ndarray:
        return np.cross(self.normal, self.end)

    def contains(self, x, eps: float | None = None) -> bool:
        """Closed membership test with angular slack ``eps``."""
        eps = self.eps if eps is None else eps
        x = as_vec3(x)
        n = self.normal
        if abs(float(n @ x)) > eps:
            return False
        if float(x @ (self.start + self.end)) <= 0.0:
            return False
        return (float(np.cross(self.start, x) @ n) >= -eps
                and float(np.cross(x, self.end) @ n) >= -eps)

    def point_at(self, t: float) -> np.ndarray:
        """Point a fraction ``t`` of the way along the arc."""
        ang = t * self.length
        return math.cos(ang) * self.start + math.sin(ang) * np.cross(self.normal, self.start)


@dataclass(frozen=True)
class ArcIntersection:
    """Result of :func:`arc_pair_intersections`.

    Exactly one of ``points`` (possibly empty) or ``overlap`` is meaningful:
    when the arcs share a sub-arc, ``overlap`` holds it and ``points`` is empty.
    """

    points: tuple = ()
    overlap: GreatArc | None = None

    @property
    def empty(self) -> bool:
        return not self.points and self.overlap is None


def arc_pair_intersections(a: GreatArc, b: GreatArc, eps: float = EPS_GEO) -> ArcIntersection:
    na, nb = a.normal, b.normal
    if np.linalg.norm(np.cross(na, nb)) > eps:
        x = normalize(np.cross(na, nb))
        pts = tuple(p for p in (x, -x) if a.contains(p, eps) and b.contains(p, eps))
        return ArcIntersection(points=pts)

    # same great circle: compare angular intervals in a's orientation
    u = a.start
    v = np.cross(na, u)

    def ang(x):
        return math.atan2(float(x @ v), float(x @ u)) % TWO_PI

    la = ang(a.end)
    if float(na @ nb) > 0:
        b0, b1 = ang(b.start), ang(b.end)
    else:
        b0, b1 = ang(b.end), ang(b.start)
    lb = (b1 - b0) % TWO_PI
    # shift b so that its interval starts within (-2pi, 0] or [0, 2pi)
    lo, hi = None, None
    for shift in (0.0, -TWO_PI):
        s0, s1 = b0 + shift, b0 + shift + lb
        l, h = max(0.0, s0), min(la, s1)
        if h >= l - eps:
            lo, hi = l, h
            break
    if lo is None:
        return ArcIntersection()

    def at(t):
        return math.cos(t) * u + math.sin(t) * v

    if hi - lo <= eps:
        return ArcIntersection(points=(at(0.5 * (lo + hi)),))
    overlap = GreatArc(at(lo), at(hi), a.eps)
    return ArcIntersection(overlap=overlap)


def turning_angle(t_in: np.ndarray, t_out: np.ndarray, at: np.ndarray, eps: float = EPS_GEO) -> float:
    """Signed turn from tangent ``t_in`` to ``t_out`` at point ``at``; left is positive.

    A full reversal (a dangling-edge tip) counts as ``-pi``: the boundary
    walks clockwise around the tip.
    """
    c = float(np.cross(t_in, t_out) @ at)
    d = float(t_in @ t_out)
    if abs(c) <= eps and d < 0:
        return -math.pi
    return math.atan2(c, d)


def spherical_face_area(boundary_cycles, euler_char: int = 1, eps: float = EPS_GEO) -> float:
    """Gauss-Bonnet area of a region bounded by geodesic cycles.

    Each cycle is a sequence of :class:`GreatArc` traversed with the region on
    the left.  Returns ``2*pi*euler_char - sum(turning angles)``.
    """
    total = 0.0
    tol = max(eps, 1e-7)
    for cycle in boundary_cycles:
        arcs = list(cycle)
        if not arcs:
            raise OpenCycle("empty boundary cycle")
        for k, arc in enumerate(arcs):
            nxt = arcs[(k + 1) % len(arcs)]
            if np.linalg.norm(arc.end - nxt.start) > tol:
                raise OpenCycle(f"arc {k} does not end where arc {k + 1} starts")
            total += turning_angle(arc.tangent_at_end(), nxt.tangent_at_start(), arc.end, eps)
    return TWO_PI * euler_char - total


def sample_uniform_direction(rng: np.random.Generator) -> np.ndarray:
    """One direction drawn uniformly from S^2."""
    return sample_directions(rng, 1)[0]


def sample_directions(rng: np.random.Generator, n: int) -> np.ndarray:
    """``n`` uniform directions, normalized Gaussian draws."""
    g = rng.standard_normal((n, 3))
    norms = np.linalg.norm(g, axis=1)
    bad = norms < 1e-12
    while np.any(bad):  # pragma: no cover - probability ~0
        g[bad] = rng.standard_normal((int(bad.sum()), 3))
        norms = np.linalg.norm(g, axis=1)
        bad = norms < 1e-12
    return g / norms[:, None]


def group_great_circles(normals: np.ndarray, eps: float = EPS_GEO):
    """Cluster unit normals that span the same great circle.

    Returns ``(labels, canon, orient)``: a circle label per input, the
    canonical normal per circle and ``+1/-1`` telling whether each input
    normal agrees with its circle's canonical normal.
    """
    normals = np.asarray(normals, dtype=float)
    labels = np.full(len(normals), -1, dtype=int)
    orient = np.ones(len(normals), dtype=int)
    canon: list[np.ndarray] = []
    for i in range(len(normals)):
        if labels[i] >= 0:
            continue
        c = len(canon)
        canon.append(normals[i])
        rest = np.nonzero(labels < 0)[0]
        cr = np.linalg.norm(np.cross(normals[rest], normals[i]), axis=1)
        same = rest[cr <= eps]
        labels[same] = c
        orient[same] = np.where(normals[same] @ normals[i] > 0, 1, -1)
    return labels, np.array(canon).reshape(-1, 3), orient
