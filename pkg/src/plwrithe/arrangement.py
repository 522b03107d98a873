"""Cell decomposition of the sphere cut out by the indicatrix.

Vertices are arc endpoints and pairwise arc intersections; edges are the
minimal covered sub-arcs between consecutive vertices on each great circle,
oriented counterclockwise about the circle's canonical normal.  Faces are
traced on a half-edge structure with the face on the left of each half-edge,
which is also the north side ``(p1 x p2) . xi > 0`` of that half-edge.

Crossing an edge from south to north changes the Tait number by the edge's
signed multiplicity.  Zero-weight guide arcs may be added to refine the
decomposition; they are also inserted automatically as bridges when the
indicatrix is disconnected, so that every face is a disk.
"""
from __future__ import annotations

import json
import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from .errors import DegenerateArrangement, InconsistentOffsets, OnBoundary
from .indicatrix import Indicatrix, arc_intervals, circle_angles, circle_basis, coverage
from .sphere import EPS_GEO, TWO_PI, GreatArc, group_great_circles, spherical_face_area, tangent_frame

MERGE_FACTOR = 10.0
MAX_BRIDGE_ROUNDS = 16
REP_FRACTIONS = (0.5, 0.3, 0.7, 0.15, 0.85, 0.05)


@dataclass
class ArrangementEdge:
    id: int
    start: int
    end: int
    circle: int
    multiplicity: int
    cover: int
    north_face: int = -1
    south_face: int = -1

    @property
    def cancelled(self) -> bool:
        return self.multiplicity == 0

    @property
    def is_bridge(self) -> bool:
        return self.north_face == self.south_face


@dataclass
class Face:
    id: int
    boundary_cycles: list
    euler_char: int
    area: float
    representative: np.ndarray | None = None
    tait: int = 0
    offset: int = 0


@dataclass(eq=False)
class Arrangement:
    indicatrix: Indicatrix
    vertices: np.ndarray
    edges: list
    faces: list
    eps: float
    he_next: np.ndarray = field(repr=False)
    he_face: np.ndarray = field(repr=False)
    guides: np.ndarray = field(repr=False)
    base: int = 0
    base_tait: int = 0

    def __post_init__(self):
        ed = self.edges
        self.e_start = self.vertices[[e.start for e in ed]]
        self.e_end = self.vertices[[e.end for e in ed]]
        nrm = np.cross(self.e_start, self.e_end)
        self.e_normal = nrm / np.linalg.norm(nrm, axis=1, keepdims=True)

    # -- counts -------------------------------------------------------------
    @property
    def euler_characteristic(self) -> int:
        return len(self.vertices) - len(self.edges) + len(self.faces)

    @property
    def total_area(self) -> float:
        return float(sum(f.area for f in self.faces))

    def he_points(self, h: int) -> tuple[np.ndarray, np.ndarray]:
        e = self.edges[h >> 1]
        a, b = self.vertices[e.start], self.vertices[e.end]
        return (a, b) if h % 2 == 0 else (b, a)

    # -- geometric queries --------------------------------------------------
    def _on_edges(self, pts: np.ndarray, tol: float) -> np.ndarray:
        """``(len(pts), E)`` closed membership of points in edge arcs."""
        n, s, e = self.e_normal, self.e_start, self.e_end
        d = pts @ n.T
        c1 = np.einsum("pk,ek->pe", pts, np.cross(n, s))  # (s x P).n = P.(n x s)
        c2 = np.einsum("pk,ek->pe", pts, np.cross(e, n))  # (P x e).n = P.(e x n)
        return (np.abs(d) <= tol) & (c1 >= -tol) & (c2 >= -tol) & (pts @ (s + e).T > 0)

    def on_boundary(self, xi, eps: float | None = None) -> bool:
        eps = self.eps if eps is None else eps
        return bool(np.any(self._on_edges(np.asarray(xi, dtype=float)[None, :], eps)))

    def ray_hits(self, x0: np.ndarray, t: np.ndarray, min_theta: float = 1e-12):
        """First edge met by the geodesic ``cos(th) x0 + sin(th) t``, ``th > min_theta``.

        Returns ``(theta, edge, hit_point, slope)`` where ``slope`` is the rate
        of change of ``normal . x`` at the hit, or ``None`` if nothing is hit.
        """
        n = self.e_normal
        a, b = n @ x0, n @ t
        th0 = np.arctan2(-a, b)
        th = np.concatenate([th0 % TWO_PI, (th0 + math.pi) % TWO_PI])
        idx = np.concatenate([np.arange(len(n)), np.arange(len(n))])
        pts = np.cos(th)[:, None] * x0 + np.sin(th)[:, None] * t
        s, e = self.e_start[idx], self.e_end[idx]
        nn = n[idx]
        tol = 1e-12
        ok = ((np.einsum("ij,ij->i", np.cross(s, pts), nn) >= -tol)
              & (np.einsum("ij,ij->i", np.cross(pts, e), nn) >= -tol)
              & (np.einsum("ij,ij->i", s + e, pts) > 0)
              & (th > min_theta)
              & ~((np.abs(a) < 1e-14) & (np.abs(b) < 1e-14))[idx])
        if not np.any(ok):
            return None
        k = int(np.argmin(np.where(ok, th, np.inf)))
        theta = float(th[k])
        slope = float(nn[k] @ (-math.sin(theta) * x0 + math.cos(theta) * t))
        return theta, int(idx[k]), pts[k], slope

    def locate_face(self, xi) -> int:
        """Face whose interior contains ``xi`` (ray shooting along a geodesic)."""
        xi = np.asarray(xi, dtype=float)
        xi = xi / np.linalg.norm(xi)
        if self.on_boundary(xi):
            raise OnBoundary(f"{xi.tolist()} lies on the arrangement boundary")
        e1, e2 = tangent_frame(xi)
        for k in range(24):
            ang = 0.7 + k * 2.399963229728653
            t = math.cos(ang) * e1 + math.sin(ang) * e2
            hit = self.ray_hits(xi, t)
            if hit is None:
                continue
            theta, edge, p, slope = hit
            ed = self.edges[edge]
            near_vertex = min(np.linalg.norm(p - self.vertices[ed.start]),
                              np.linalg.norm(p - self.vertices[ed.end])) < 1e-7
            if near_vertex or abs(slope) < 1e-6:
                continue
            # normal . x decreases through zero when approaching from the north
            return ed.north_face if slope < 0 else ed.south_face
        raise DegenerateArrangement(f"could not locate {xi.tolist()}")

    def antipodal_face(self, f: int) -> int:
        return self.locate_face(-self.faces[f].representative)

    # -- Tait propagation ---------------------------------------------------
    def offsets_from_base(self, base: int) -> dict[int, int]:
        return offsets_from_base(self, base)

    def writhe_sum(self, base_tait: int, offsets: dict[int, int]) -> float:
        s = math.fsum((base_tait + offsets[f.id]) * f.area for f in self.faces)
        return s / (4.0 * math.pi)

    def to_dict(self) -> dict:
        return {
            "vertices": self.vertices.tolist(),
            "edges": [{"id": e.id, "start": e.start, "end": e.end, "multiplicity": e.multiplicity,
                       "cover": e.cover, "north_face": e.north_face, "south_face": e.south_face}
                      for e in self.edges],
            "faces": [{"id": f.id, "area": f.area, "euler_char": f.euler_char,
                       "representative": None if f.representative is None else f.representative.tolist(),
                       "tait": f.tait, "offset": f.offset,
                       "boundary": [[int(h) for h in cyc] for cyc in f.boundary_cycles]}
                      for f in self.faces],
            "base": self.base,
            "base_tait": self.base_tait,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def offsets_from_base(arr: Arrangement, base: int) -> dict[int, int]:
    """Tait offsets of all faces relative to ``base``, by breadth-first search.

    Crossing an edge from its south face to its north face adds the edge's
    multiplicity.  Every edge is re-checked afterwards; any disagreement
    raises :class:`InconsistentOffsets`.
    """
    adj: dict[int, list] = {f.id: [] for f in arr.faces}
    for e in arr.edges:
        adj[e.south_face].append((e.north_face, e.multiplicity))
        adj[e.north_face].append((e.south_face, -e.multiplicity))
    off = {base: 0}
    q = deque([base])
    while q:
        f = q.popleft()
        for g, m in adj[f]:
            if g not in off:
                off[g] = off[f] + m
                q.append(g)
    if len(off) != len(arr.faces):
        raise InconsistentOffsets("face graph is disconnected")
    for e in arr.edges:
        if off[e.north_face] - off[e.south_face] != e.multiplicity:
            raise InconsistentOffsets(
                f"edge {e.id}: offsets {off[e.south_face]} -> {off[e.north_face]} "
                f"disagree with multiplicity {e.multiplicity}")
    return off


def coordinate_guides() -> tuple[np.ndarray, np.ndarray]:
    """The three coordinate great circles as twelve quarter arcs."""
    axes = np.eye(3)
    starts, ends = [], []
    for a in range(3):
        for b in range(a + 1, 3):
            for sa in (1, -1):
                for sb in (1, -1):
                    starts.append(sa * axes[a])
                    ends.append(sb * axes[b])
    return np.array(starts), np.array(ends)


# -- construction ------------------------------------------------------------

def _on_arcs(x, p, q, n, tol):
    return ((np.abs(np.einsum("ij,ij->i", n, x)) <= tol)
            & (np.einsum("ij,ij->i", p + q, x) > 0)
            & (np.einsum("ij,ij->i", np.cross(p, x), n) >= -tol)
            & (np.einsum("ij,ij->i", np.cross(x, q), n) >= -tol))


def _cluster(points: np.ndarray, radius: float):
    tree = cKDTree(points)
    pairs = tree.query_pairs(radius, output_type="ndarray")
    n = len(points)
    g = coo_matrix((np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(n, n))
    ncl, lab = connected_components(g, directed=False)
    sums = np.zeros((ncl, 3))
    np.add.at(sums, lab, points)
    reps = sums / np.linalg.norm(sums, axis=1, keepdims=True)
    spread = np.linalg.norm(points - reps[lab], axis=1)
    if np.any(spread > 50 * radius):
        raise DegenerateArrangement(
            f"vertex clustering collapsed points {spread.max():.3g} apart; tolerance too coarse")
    return reps, lab


def _assemble(starts, ends, weights, eps):
    tol = eps
    normals = np.cross(starts, ends)
    normals /= np.linalg.norm(normals, axis=1, keepdims=True)
    labels, canon, orient = group_great_circles(normals, eps)
    n_arcs = len(starts)

    # candidate vertices with the circles they were produced on
    pts = [starts, ends]
    prov = [np.stack([labels, labels], 1), np.stack([labels, labels], 1)]
    ii, jj = np.triu_indices(n_arcs, 1)
    sel = labels[ii] != labels[jj]
    ii, jj = ii[sel], jj[sel]
    if len(ii):
        x = np.cross(normals[ii], normals[jj])
        x /= np.linalg.norm(x, axis=1, keepdims=True)
        for sgn in (1.0, -1.0):
            y = sgn * x
            ok = (_on_arcs(y, starts[ii], ends[ii], normals[ii], tol)
                  & _on_arcs(y, starts[jj], ends[jj], normals[jj], tol))
            pts.append(y[ok])
            prov.append(np.stack([labels[ii][ok], labels[jj][ok]], 1))
    pts = np.vstack(pts)
    prov = np.vstack(prov)
    verts, lab = _cluster(pts, MERGE_FACTOR * eps)

    n_circ = len(canon)
    on_circle = np.zeros((len(verts), n_circ), dtype=bool)
    on_circle[lab, prov[:, 0]] = True
    on_circle[lab, prov[:, 1]] = True
    near = np.abs(verts @ canon.T) <= tol
    for v, c in zip(*np.nonzero(near & ~on_circle)):
        idx = np.nonzero(labels == c)[0]
        x = np.broadcast_to(verts[v], (len(idx), 3))
        if np.any(_on_arcs(x, starts[idx], ends[idx], normals[idx], tol)):
            on_circle[v, c] = True

    edges: list[ArrangementEdge] = []
    for c in range(n_circ):
        idx = np.nonzero(labels == c)[0]
        vids = np.nonzero(on_circle[:, c])[0]
        if len(vids) < 2:
            raise DegenerateArrangement(f"great circle {c} carries fewer than two vertices")
        u, w = circle_basis(canon[c])
        ang = circle_angles(verts[vids], u, w)
        order = np.argsort(ang)
        vids, ang = vids[order], ang[order]
        span = (np.roll(ang, -1) - ang) % TWO_PI
        if np.any(span <= 1e-13):
            raise DegenerateArrangement(f"coincident vertices on great circle {c}")
        a0, length = arc_intervals(starts[idx], ends[idx], orient[idx], u, w)
        cover, mult = coverage(ang + 0.5 * span, a0, length, orient[idx] * weights[idx])
        for k in range(len(vids)):
            if cover[k] == 0:
                continue
            if span[k] >= math.pi - 1e-9:
                raise DegenerateArrangement(f"edge on great circle {c} is not a minor arc")
            edges.append(ArrangementEdge(len(edges), int(vids[k]), int(vids[(k + 1) % len(vids)]),
                                         c, int(mult[k]), int(cover[k])))

    used = np.zeros(len(verts), dtype=bool)
    for e in edges:
        used[e.start] = used[e.end] = True
    remap = -np.ones(len(verts), dtype=int)
    remap[used] = np.arange(int(used.sum()))
    verts = verts[used]
    for e in edges:
        e.start, e.end = int(remap[e.start]), int(remap[e.end])
    return verts, edges, canon


def _components(n_verts, edges):
    if not edges:
        return n_verts, np.arange(n_verts)
    r = [e.start for e in edges]
    c = [e.end for e in edges]
    g = coo_matrix((np.ones(len(r)), (r, c)), shape=(n_verts, n_verts))
    return connected_components(g, directed=False)


def _bridges(verts, comp_labels, n_comp):
    """Zero-weight arcs joining every component to its nearest other component."""
    starts, ends = [], []
    for k in range(1, n_comp) if n_comp > 1 else []:
        mine = np.nonzero(comp_labels == k)[0]
        other = np.nonzero(comp_labels != k)[0]
        d = verts[mine] @ verts[other].T
        d[d < -1 + 1e-6] = -np.inf
        a, b = np.unravel_index(int(np.argmax(d)), d.shape)
        starts.append(verts[mine[a]])
        ends.append(verts[other[b]])
    return np.array(starts).reshape(-1, 3), np.array(ends).reshape(-1, 3)


def _trace_faces(verts, edges, canon, eps):
    n_he = 2 * len(edges)
    origin = np.empty(n_he, dtype=int)
    normal = np.empty((n_he, 3))
    for e in edges:
        origin[2 * e.id], origin[2 * e.id + 1] = e.start, e.end
        normal[2 * e.id] = canon[e.circle]
        normal[2 * e.id + 1] = -canon[e.circle]
    out: list[list[int]] = [[] for _ in range(len(verts))]
    for h in range(n_he):
        out[origin[h]].append(h)
    pos = np.empty(n_he, dtype=int)
    for v, hs in enumerate(out):
        e1, e2 = tangent_frame(verts[v])
        tang = np.cross(normal[hs], verts[v])
        ang = np.arctan2(tang @ e2, tang @ e1)
        hs[:] = [hs[i] for i in np.argsort(ang, kind="stable")]
        for p, h in enumerate(hs):
            pos[h] = p
    he_next = np.empty(n_he, dtype=int)
    for h in range(n_he):
        twin = h ^ 1
        dest = origin[twin]
        hs = out[dest]
        he_next[h] = hs[(pos[twin] - 1) % len(hs)]

    he_face = -np.ones(n_he, dtype=int)
    faces: list[Face] = []
    for h0 in range(n_he):
        if he_face[h0] >= 0:
            continue
        cyc = []
        h = h0
        while he_face[h] < 0:
            he_face[h] = len(faces)
            cyc.append(h)
            h = he_next[h]
        if h != h0:
            raise DegenerateArrangement("half-edge cycle did not close")
        arcs = [GreatArc(verts[origin[h]], verts[origin[h ^ 1]]) for h in cyc]
        area = spherical_face_area([arcs], 1, eps)
        faces.append(Face(len(faces), [cyc], 1, area))
    for e in edges:
        e.north_face = int(he_face[2 * e.id])
        e.south_face = int(he_face[2 * e.id + 1])
    return faces, he_next, he_face


def _pick_representative(arr: Arrangement, face: Face, knot, margin: float):
    from .projection import is_generic

    hs = list(face.boundary_cycles[0])
    lengths = []
    for h in hs:
        a, b = arr.he_points(h)
        lengths.append(float(np.linalg.norm(a - b)))
    for h in [hs[i] for i in np.argsort(lengths)[::-1][:12]]:
        a, b = arr.he_points(h)
        m = a + b
        m /= np.linalg.norm(m)
        left = np.cross(a, b)
        left /= np.linalg.norm(left)
        hit = arr.ray_hits(m, left, min_theta=1e-9)
        reach = math.pi / 2 if hit is None else min(hit[0], math.pi / 2)
        for frac in REP_FRACTIONS:
            th = frac * reach
            x = math.cos(th) * m + math.sin(th) * left
            if arr.on_boundary(x, margin):
                continue
            if knot is not None and not is_generic(knot, x, margin):
                continue
            try:
                if arr.locate_face(x) != face.id:
                    continue
            except (OnBoundary, DegenerateArrangement):
                continue
            return x
    raise DegenerateArrangement(f"no interior point found for face {face.id} (area {face.area:.3g})")


def build_arrangement(ind: Indicatrix, guides=None, eps: float = EPS_GEO,
                      with_tait: bool = True) -> Arrangement:
    """Arrangement of the indicatrix (plus optional zero-weight guide arcs).

    ``guides`` is a ``(starts, ends)`` pair of arrays.  When ``with_tait`` is
    set and the indicatrix knows its knot, the Tait number is evaluated at
    the largest face and propagated to all faces.
    """
    starts, ends, weights = ind.starts, ind.ends, ind.weights
    extra_s = np.zeros((0, 3))
    extra_e = np.zeros((0, 3))
    if guides is not None:
        extra_s = np.asarray(guides[0], dtype=float).reshape(-1, 3)
        extra_e = np.asarray(guides[1], dtype=float).reshape(-1, 3)

    for _ in range(MAX_BRIDGE_ROUNDS):
        all_s = np.vstack([starts, extra_s])
        all_e = np.vstack([ends, extra_e])
        all_w = np.concatenate([weights, np.zeros(len(extra_s), dtype=np.int64)])
        verts, edges, canon = _assemble(all_s, all_e, all_w, eps)
        n_comp, comp = _components(len(verts), edges)
        if n_comp == 1:
            break
        bs, be = _bridges(verts, comp, n_comp)
        extra_s = np.vstack([extra_s, bs])
        extra_e = np.vstack([extra_e, be])
    else:
        raise DegenerateArrangement("could not connect the indicatrix with bridges")

    faces, he_next, he_face = _trace_faces(verts, edges, canon, eps)
    arr = Arrangement(ind, verts, edges, faces, eps, he_next, he_face,
                      np.stack([extra_s, extra_e], axis=1))
    if arr.euler_characteristic != 2:
        raise DegenerateArrangement(f"V - E + F = {arr.euler_characteristic}, expected 2")
    for f in faces:
        if f.area <= 0:
            raise DegenerateArrangement(f"face {f.id} has non-positive area {f.area:.3g}")

    knot = ind.knot if with_tait else None
    for f in faces:
        f.representative = _pick_representative(arr, f, knot, max(100 * eps, 1e-9))
    off = offsets_from_base(arr, 0)
    for f in faces:
        f.offset = off[f.id]
    if knot is not None:
        from .projection import tait_number

        base = max(faces, key=lambda f: f.area).id
        arr.base = base
        off = offsets_from_base(arr, base)
        arr.base_tait = tait_number(knot, faces[base].representative, eps)
        for f in faces:
            f.offset = off[f.id]
            f.tait = arr.base_tait + f.offset
    return arr


# -- cross-check of the crossing rule ------------------------------------------

@dataclass(frozen=True)
class EdgeCheck:
    edge: int
    expected: int
    observed: int

    @property
    def passed(self) -> bool:
        return self.expected == self.observed


@dataclass(frozen=True)
class CorollaryReport:
    checks: tuple

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failures(self) -> list:
        return [c for c in self.checks if not c.passed]


def verify_corollary(arr: Arrangement, knot) -> CorollaryReport:
    """Directly project on both sides of every edge and compare the jump with its multiplicity."""
    from .projection import tait_number

    checks = []
    for e in arr.edges:
        a, b = arr.vertices[e.start], arr.vertices[e.end]
        m = (a + b) / np.linalg.norm(a + b)
        left = arr.e_normal[e.id]
        side = []
        for sgn in (1.0, -1.0):
            hit = arr.ray_hits(m, sgn * left, min_theta=1e-9)
            reach = math.pi / 2 if hit is None else min(hit[0], math.pi / 2)
            th = 0.5 * reach
            x = math.cos(th) * m + sgn * math.sin(th) * left
            side.append(tait_number(knot, x, arr.eps, seed=e.id))
        checks.append(EdgeCheck(e.id, e.multiplicity, side[0] - side[1]))
    return CorollaryReport(tuple(checks))
