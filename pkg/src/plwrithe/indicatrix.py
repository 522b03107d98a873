"""The spherical indicatrix of a PL knot.

Arc ``i`` of the forward curve runs from edge direction ``s_i`` to
``s_{i+1}``.  The antipodal copy is traversed the way the reversed knot
would traverse it, from ``-s_{i+1}`` to ``-s_i``; with this orientation the
two copies cancel over a planar knot, matching its identically zero Tait
number.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .knot import PLKnot, edge_directions
from .sphere import EPS_GEO, TWO_PI, GreatArc, group_great_circles


@dataclass(frozen=True, eq=False)
class Indicatrix:
    knot: PLKnot | None
    starts: np.ndarray
    ends: np.ndarray
    weights: np.ndarray
    eps: float = EPS_GEO
    sub_arcs: list = field(default_factory=list, repr=False)

    @cached_property
    def normals(self) -> np.ndarray:
        c = np.cross(self.starts, self.ends)
        return c / np.linalg.norm(c, axis=1, keepdims=True)

    @property
    def arcs(self) -> list[GreatArc]:
        return [GreatArc(p, q) for p, q in zip(self.starts, self.ends)]

    def __len__(self):
        return len(self.starts)

    def distance_flags(self, x: np.ndarray, eps: float) -> np.ndarray:
        n = self.normals
        p, q = self.starts, self.ends
        return ((np.abs(n @ x) <= eps)
                & ((p + q) @ x > 0)
                & (np.einsum("ij,ij->i", np.cross(p, x), n) >= -eps)
                & (np.einsum("ij,ij->i", np.cross(x, q), n) >= -eps))

    def contains(self, xi, eps: float | None = None) -> bool:
        """True iff ``xi`` lies within ``eps`` of some arc."""
        eps = self.eps if eps is None else eps
        return bool(np.any(self.distance_flags(np.asarray(xi, dtype=float), eps)))

    def crosses(self, a, b, eps: float | None = None) -> bool:
        """Does the minor geodesic from ``a`` to ``b`` meet any arc?"""
        eps = self.eps if eps is None else eps
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        if self.contains(a, eps) or self.contains(b, eps):
            return True
        m = np.cross(a, b)
        nm = np.linalg.norm(m)
        if nm <= 1e-15:
            return False
        m /= nm
        n = self.normals
        sa, sb = n @ a, n @ b
        sp, sq = self.starts @ m, self.ends @ m
        near = ((self.starts + self.ends) @ (a + b)) > 0
        return bool(np.any((sa * sb < 0) & (sp * sq <= 0) & near))

    def to_json(self) -> str:
        return json.dumps({
            "arcs": [{"start": p.tolist(), "end": q.tolist(), "weight": int(w)}
                     for p, q, w in zip(self.starts, self.ends, self.weights)],
            "sub_arcs": [{"start": p.tolist(), "end": q.tolist(), "multiplicity": int(m)}
                         for p, q, m in self.sub_arcs],
        })


def circle_basis(normal: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    k = int(np.argmin(np.abs(normal)))
    h = np.zeros(3)
    h[k] = 1.0
    u = np.cross(normal, h)
    u /= np.linalg.norm(u)
    return u, np.cross(normal, u)


def circle_angles(x: np.ndarray, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    return np.arctan2(x @ v, x @ u) % TWO_PI


def arc_intervals(starts, ends, orient, u, v):
    """Start angle and length of each arc, measured counterclockwise about the circle normal."""
    a0 = circle_angles(np.where(orient[:, None] > 0, starts, ends), u, v)
    a1 = circle_angles(np.where(orient[:, None] > 0, ends, starts), u, v)
    return a0, (a1 - a0) % TWO_PI


def coverage(mid: np.ndarray, a0: np.ndarray, length: np.ndarray, signed: np.ndarray):
    """Geometric cover count and signed multiplicity at angles ``mid``."""
    inside = ((mid[:, None] - a0[None, :]) % TWO_PI) < length[None, :]
    return inside.sum(axis=1), inside.astype(np.int64) @ signed


def _sub_arcs(starts, ends, weights, eps):
    normals = np.cross(starts, ends)
    normals /= np.linalg.norm(normals, axis=1, keepdims=True)
    labels, canon, orient = group_great_circles(normals, eps)
    out = []
    for c, nrm in enumerate(canon):
        idx = np.nonzero(labels == c)[0]
        u, v = circle_basis(nrm)
        a0, length = arc_intervals(starts[idx], ends[idx], orient[idx], u, v)
        cuts = np.sort(np.concatenate([a0, (a0 + length) % TWO_PI]))
        keep = np.concatenate([[True], np.diff(cuts) > eps])
        cuts = cuts[keep]
        if len(cuts) > 1 and (cuts[0] + TWO_PI - cuts[-1]) <= eps:
            cuts = cuts[:-1]
        nxt = np.roll(cuts, -1)
        span = (nxt - cuts) % TWO_PI
        span[span == 0] = TWO_PI
        mid = cuts + 0.5 * span
        cover, mult = coverage(mid, a0, length, orient[idx] * weights[idx])
        for t0, sp, cv, m in zip(cuts, span, cover, mult):
            if cv == 0:
                continue
            p = math.cos(t0) * u + math.sin(t0) * v
            q = math.cos(t0 + sp) * u + math.sin(t0 + sp) * v
            out.append((p, q, int(m)))
    return out


def build_indicatrix(knot: PLKnot, eps: float = EPS_GEO) -> Indicatrix:
    s = np.asarray(edge_directions(knot))
    s_next = np.roll(s, -1, axis=0)
    starts = np.vstack([s, -s_next])
    ends = np.vstack([s_next, -s])
    weights = np.ones(len(starts), dtype=np.int64)
    return Indicatrix(knot, starts, ends, weights, eps, _sub_arcs(starts, ends, weights, eps))
