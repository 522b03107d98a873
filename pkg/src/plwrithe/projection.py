"""Orthogonal projections of PL knots: genericity, diagrams, Tait numbers.

Two routes compute Tait numbers.  :func:`project_diagram` builds the diagram
explicitly in a 2D frame and signs each crossing with :func:`crossing_sign`.
The batched route used by :func:`tait_numbers` and :func:`tait_grid` relies
on the fact that a non-adjacent, non-coplanar edge pair crosses in
projection along ``xi`` iff four triple products change sign, and that the
crossing sign is then fixed by the pair alone.  Directions that sit within
``eps`` of one of those sign changes are handed back to the explicit route.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import NotGeneric, OnIndicatrix, ParallelStrands
from .indicatrix import Indicatrix, build_indicatrix
from .knot import PLKnot, edge_directions
from .sphere import EPS_GEO, as_vec3, normalize, tangent_frame

PERTURB_ATTEMPTS = 400
# long knots: MC directions are bucketed and tested only against nearby pairs
BUCKET_MIN_PAIRS = 1000
BUCKET_GRID = (90, 180)


class DirectionClass(enum.Enum):
    GENERIC = "Generic"
    EDGE_PARALLEL = "EdgeParallel"
    VERTEX_HIT = "VertexHit"
    TRIPLE_POINT = "TriplePoint"
    COLLINEAR_OVERLAP = "CollinearOverlap"

    @property
    def generic(self) -> bool:
        return self is DirectionClass.GENERIC


@dataclass(frozen=True)
class Crossing:
    plane_point: tuple[float, float]
    over_edge: int
    under_edge: int
    sign: int


@dataclass(frozen=True)
class Diagram:
    direction: np.ndarray
    frame: tuple[np.ndarray, np.ndarray]
    crossings: tuple[Crossing, ...]

    @property
    def tait(self) -> int:
        return sum(c.sign for c in self.crossings)


def nonadjacent_pairs(n: int) -> tuple[np.ndarray, np.ndarray]:
    ii, jj = np.triu_indices(n, 2)
    keep = ~((ii == 0) & (jj == n - 1))
    return ii[keep], jj[keep]


@dataclass(frozen=True, eq=False)
class PairTable:
    """Per-pair data for the batched crossing test.

    ``planes`` holds, for each pair, the unit normals of the four planes
    ``(a,b,c)``, ``(a,b,d)``, ``(c,d,a)``, ``(c,d,b)``; their dot products
    with ``xi`` are the projected orientation tests.
    """

    i: np.ndarray
    j: np.ndarray
    sign: np.ndarray
    planes: np.ndarray  # (P, 4, 3)
    corners: np.ndarray  # (P, 4, 3) unit chord directions edge i -> edge j


def pair_table(knot: PLKnot) -> PairTable:
    tab = knot.cache.get("pair_table")
    if tab is not None:
        return tab
    v = knot.vertices / knot.scale
    w = np.roll(v, -1, axis=0)
    ii, jj = nonadjacent_pairs(len(v))
    a, b, c, d = v[ii], w[ii], v[jj], w[jj]
    di, dj = b - a, d - c
    triple = np.einsum("ij,ij->i", c - a, np.cross(dj, di))
    size = np.linalg.norm(di, axis=1) * np.linalg.norm(dj, axis=1)
    # coplanar pairs never cross in a projection that is injective on their plane
    keep = np.abs(triple) > 1e-12 * size
    a, b, c, d, di, dj = a[keep], b[keep], c[keep], d[keep], di[keep], dj[keep]
    planes = np.stack([np.cross(di, c - a), np.cross(di, d - a),
                       np.cross(dj, a - c), np.cross(dj, b - c)], axis=1)
    planes /= np.linalg.norm(planes, axis=2, keepdims=True)
    corners = np.stack([c - a, d - a, c - b, d - b], axis=1)
    corners /= np.linalg.norm(corners, axis=2, keepdims=True)
    tab = PairTable(ii[keep], jj[keep], np.sign(triple[keep]).astype(np.int64), planes, corners)
    knot.cache["pair_table"] = tab
    return tab


def _knot_indicatrix(knot: PLKnot) -> Indicatrix:
    ind = knot.cache.get("indicatrix")
    if ind is None:
        ind = build_indicatrix(knot)
        knot.cache["indicatrix"] = ind
    return ind


def _batch(tab: PairTable, xs: np.ndarray, eps: float):
    """Tait numbers and an ambiguity flag for each row of ``xs``."""
    n = len(xs)
    tait = np.zeros(n, dtype=np.int64)
    amb = np.zeros(n, dtype=bool)
    npairs = len(tab.sign)
    if npairs == 0 or n == 0:
        return tait, amb
    flat = tab.planes.reshape(-1, 3).T
    chunk = max(64, 4_000_000 // (4 * npairs))
    for s in range(0, n, chunk):
        o = (xs[s:s + chunk] @ flat).reshape(-1, npairs, 4)
        crosses = (o[..., 0] * o[..., 1] < 0) & (o[..., 2] * o[..., 3] < 0)
        tait[s:s + chunk] = crosses @ tab.sign
        amb[s:s + chunk] = np.any(np.abs(o) <= eps, axis=(1, 2))
    return tait, amb


def crossing_sign(d_over, d_under, xi, eps: float = EPS_GEO) -> int:
    """+1 when the projected upper strand turns counterclockwise onto the lower one.

    The plane is oriented by ``xi``, i.e. viewed from its tip.  Reversing both
    strands leaves the sign unchanged.
    """
    xi = normalize(xi)
    po = as_vec3(d_over) - float(np.dot(d_over, xi)) * xi
    pu = as_vec3(d_under) - float(np.dot(d_under, xi)) * xi
    c = float(np.cross(po, pu) @ xi)
    if abs(c) <= eps * np.linalg.norm(po) * np.linalg.norm(pu):
        raise ParallelStrands("projected strands are parallel")
    return 1 if c > 0 else -1


def _cross2(a, b):
    return a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]


def _point_segment_distance(p, a, b) -> float:
    ab = b - a
    t = float(np.clip(np.dot(p - a, ab) / np.dot(ab, ab), 0.0, 1.0))
    return float(np.linalg.norm(p - (a + t * ab)))


def _projected(knot: PLKnot, xi: np.ndarray):
    e1, e2 = tangent_frame(xi)
    v = knot.vertices / knot.scale
    return np.stack([v @ e1, v @ e2], axis=1), (e1, e2)


def _scan(knot: PLKnot, xi: np.ndarray, eps: float):
    """Walk all edge pairs in the projection.

    Returns the direction class and, when generic, the list of transversal
    crossings as ``(i, j, s, t, point)`` with edge parameters ``s``, ``t``.
    """
    n = knot.n_edges
    dirs = edge_directions(knot)
    if np.any(np.linalg.norm(np.cross(dirs, xi), axis=1) <= eps):
        return DirectionClass.EDGE_PARALLEL, []
    p, _ = _projected(knot, xi)
    q = np.roll(p, -1, axis=0)

    # adjacent edges fold onto each other when xi lies on the indicatrix
    back = p - q  # from vertex i+1 back along edge i
    fwd = np.roll(q - p, -1, axis=0)  # from vertex i+1 along edge i+1
    c = _cross2(back, fwd) / (np.linalg.norm(back, axis=1) * np.linalg.norm(fwd, axis=1))
    dot = np.einsum("ij,ij->i", back, fwd)
    if np.any((np.abs(c) <= eps) & (dot > 0)):
        return DirectionClass.COLLINEAR_OVERLAP, []

    found = []
    ii, jj = nonadjacent_pairs(n)
    for i, j in zip(ii.tolist(), jj.tolist()):
        a, b, cc, d = p[i], q[i], p[j], q[j]
        near = min(_point_segment_distance(cc, a, b), _point_segment_distance(d, a, b),
                   _point_segment_distance(a, cc, d), _point_segment_distance(b, cc, d))
        if near <= eps:
            u, w = b - a, d - cc
            par = abs(float(_cross2(u, w))) <= eps * np.linalg.norm(u) * np.linalg.norm(w)
            return (DirectionClass.COLLINEAR_OVERLAP if par else DirectionClass.VERTEX_HIT), []
        o1 = _cross2(b - a, cc - a)
        o2 = _cross2(b - a, d - a)
        o3 = _cross2(d - cc, a - cc)
        o4 = _cross2(d - cc, b - cc)
        if o1 * o2 < 0 and o3 * o4 < 0:
            s = o3 / (o3 - o4)
            t = o1 / (o1 - o2)
            found.append((i, j, float(s), float(t), a + s * (b - a)))

    for i, j, _, _, pt in found:
        for k in range(n):
            if k in (i, j):
                continue
            if _point_segment_distance(pt, p[k], q[k]) <= eps:
                return DirectionClass.TRIPLE_POINT, []
    return DirectionClass.GENERIC, found


def classify_direction(knot: PLKnot, xi, eps: float = EPS_GEO) -> DirectionClass:
    """Decide whether projecting along ``xi`` is generic.

    Lengths are measured in units of the knot's radius about its centroid,
    so ``eps`` is scale free.
    """
    return _scan(knot, normalize(xi), eps)[0]


def project_diagram(knot: PLKnot, xi, eps: float = EPS_GEO) -> Diagram:
    xi = normalize(xi)
    cls, found = _scan(knot, xi, eps)
    if not cls.generic:
        raise NotGeneric(f"projection along {xi.tolist()} is not generic ({cls.value})")
    _, frame = _projected(knot, xi)
    v = knot.vertices
    e = knot.edge_vectors
    crossings = []
    for i, j, s, t, pt in found:
        hi = float((v[i] + s * e[i]) @ xi)
        hj = float((v[j] + t * e[j]) @ xi)
        over, under = (i, j) if hi > hj else (j, i)
        sign = crossing_sign(e[over], e[under], xi)
        crossings.append(Crossing((float(pt[0]), float(pt[1])), over, under, sign))
    return Diagram(xi, frame, tuple(crossings))


def is_generic(knot: PLKnot, xi, eps: float = EPS_GEO) -> bool:
    """Cheap sufficient test: no batched orientation test is within ``eps``."""
    xi = normalize(xi)
    _, amb = _batch(pair_table(knot), xi[None, :], eps)
    if not amb[0]:
        ind = _knot_indicatrix(knot)
        return not ind.contains(xi, eps) and not np.any(
            np.linalg.norm(np.cross(edge_directions(knot), xi), axis=1) <= eps)
    return classify_direction(knot, xi, eps).generic


def _perturb(knot, ind, xi, eps, seed, allow_crossing=False):
    """Nearby generic direction reached without crossing the indicatrix.

    The radius starts at ``eps`` and doubles every few attempts.  With
    ``allow_crossing`` the walk may cross (used to leave the indicatrix).
    """
    rng = np.random.default_rng(seed)
    r = eps
    for attempt in range(PERTURB_ATTEMPTS):
        if attempt and attempt % 4 == 0:
            r *= 2.0
        g = rng.standard_normal(3)
        g -= (g @ xi) * xi
        ng = np.linalg.norm(g)
        if ng < 1e-12:
            continue
        cand = xi * math.cos(r) + (g / ng) * math.sin(r)
        cand /= np.linalg.norm(cand)
        if ind.contains(cand, eps):
            continue
        if not allow_crossing and ind.crosses(xi, cand, eps):
            continue
        _, amb = _batch(pair_table(knot), cand[None, :], eps)
        if not amb[0] or classify_direction(knot, cand, eps).generic:
            return cand
    raise NotGeneric(f"no generic direction found near {xi.tolist()}")


def resolve_direction(knot: PLKnot, xi, eps: float = EPS_GEO, seed: int = 0):
    """Return ``(direction, perturbed)`` with a generic direction in xi's face.

    Raises :class:`OnIndicatrix` if ``xi`` itself lies on the indicatrix.
    """
    xi = normalize(xi)
    ind = _knot_indicatrix(knot)
    if ind.contains(xi, eps):
        raise OnIndicatrix(f"{xi.tolist()} lies on the indicatrix")
    _, amb = _batch(pair_table(knot), xi[None, :], eps)
    if not amb[0] or classify_direction(knot, xi, eps).generic:
        return xi, False
    return _perturb(knot, ind, xi, eps, seed), True


def _fast_tait(knot: PLKnot, xi: np.ndarray, eps: float) -> int:
    t, amb = _batch(pair_table(knot), xi[None, :], eps)
    if not amb[0]:
        return int(t[0])
    return project_diagram(knot, xi, eps).tait


def tait_number(knot: PLKnot, xi, eps: float = EPS_GEO, seed: int = 0) -> int:
    """Tait number of the projection along ``xi``.

    Off the indicatrix but at a non-generic direction, the value of the
    surrounding component is returned, found by a seeded perturbation.
    """
    x, _ = resolve_direction(knot, xi, eps, seed)
    return _fast_tait(knot, x, eps)


def off_indicatrix(knot: PLKnot, xi, eps: float = EPS_GEO, seed: int = 0) -> np.ndarray:
    """Generic direction near ``xi``, allowed to leave the indicatrix on either side."""
    return _perturb(knot, _knot_indicatrix(knot), normalize(xi), eps, seed, allow_crossing=True)


def _fallback(knot, xi, eps, seed):
    try:
        x, moved = resolve_direction(knot, xi, eps, seed)
    except OnIndicatrix:
        x, moved = off_indicatrix(knot, xi, eps, seed), True
    return _fast_tait(knot, x, eps), moved


def tait_numbers(knot: PLKnot, xis, eps: float = EPS_GEO, seed: int = 0):
    """Tait numbers for many directions; returns ``(values, perturbed_mask)``.

    Rows within ``eps`` of a non-generic direction (or of the indicatrix) are
    perturbed with a seed derived from ``seed`` and the row index.
    """
    xs = np.asarray(xis, dtype=float).reshape(-1, 3)
    tab = pair_table(knot)
    if len(tab.sign) >= BUCKET_MIN_PAIRS:
        tait, amb = _batch_bucketed(knot, tab, xs, eps)
    else:
        tait, amb = _batch(tab, xs, eps)
    moved = np.zeros(len(xs), dtype=bool)
    for k in np.nonzero(amb)[0]:
        tait[k], moved[k] = _fallback(knot, xs[k], eps, (seed, int(k)))
    return tait, moved


# -- sphere grid --------------------------------------------------------------

def grid_directions(rows: int, cols: int) -> np.ndarray:
    """Cell-centre directions; colatitude from +z, longitude from +x toward +y."""
    th = math.pi * (np.arange(rows) + 0.5) / rows
    ph = 2.0 * math.pi * (np.arange(cols) + 0.5) / cols
    st, ct = np.sin(th)[:, None], np.cos(th)[:, None]
    return np.stack([st * np.cos(ph)[None, :], st * np.sin(ph)[None, :],
                     np.broadcast_to(ct, (rows, cols))], axis=-1)


def _cap_window(center, radius, rows, cols):
    """Row and column index arrays of grid cells whose centres may lie in a cap."""
    th_c = math.acos(max(-1.0, min(1.0, float(center[2]))))
    ph_c = math.atan2(float(center[1]), float(center[0]))
    pad_r = math.pi / rows
    lo, hi = th_c - radius - pad_r, th_c + radius + pad_r
    r0 = max(0, math.ceil(lo * rows / math.pi - 0.5))
    r1 = min(rows - 1, math.floor(hi * rows / math.pi - 0.5))
    if r1 < r0:
        return None
    row_idx = np.arange(r0, r1 + 1)
    if lo <= 0 or hi >= math.pi or radius >= th_c or radius >= math.pi - th_c:
        return row_idx, np.arange(cols)
    dph = math.asin(min(1.0, math.sin(radius) / math.sin(th_c))) + 2.0 * math.pi / cols
    if dph >= math.pi:
        return row_idx, np.arange(cols)
    j0 = math.ceil((ph_c - dph) * cols / (2 * math.pi) - 0.5)
    j1 = math.floor((ph_c + dph) * cols / (2 * math.pi) - 0.5)
    return row_idx, np.unique(np.arange(j0, j1 + 1) % cols)


def _merge_windows(windows):
    ws = [w for w in windows if w is not None]
    if len(ws) == 2:
        (ra, ca), (rb, cb) = ws
        if np.intersect1d(ra, rb).size and np.intersect1d(ca, cb).size:
            return [(np.union1d(ra, rb), np.union1d(ca, cb))]
    return ws


def _cap_of(points: np.ndarray):
    c = points.sum(axis=0)
    nc = np.linalg.norm(c)
    if nc < 1e-12:
        return None, math.pi
    c /= nc
    rad = float(np.max(np.arccos(np.clip(points @ c, -1.0, 1.0))))
    return c, rad


def indicatrix_mask(ind: Indicatrix, grid: np.ndarray, eps: float = EPS_GEO) -> np.ndarray:
    rows, cols = grid.shape[:2]
    on = np.zeros((rows, cols), dtype=bool)
    for p, q, nrm in zip(ind.starts, ind.ends, ind.normals):
        c, rad = _cap_of(np.stack([p, q]))
        win = _cap_window(c, rad + 2 * eps, rows, cols)
        if win is None:
            continue
        ri, ci = win
        x = grid[np.ix_(ri, ci)]
        hit = ((np.abs(x @ nrm) <= eps) & (x @ (p + q) > 0)
               & (np.cross(p, x) @ nrm >= -eps) & (np.cross(x, q) @ nrm >= -eps))
        on[np.ix_(ri, ci)] |= hit
    return on


def _pair_windows(tab: PairTable, p: int, rows: int, cols: int):
    c, rad = _cap_of(tab.corners[p])
    if c is None or rad >= 0.5 * math.pi - 1e-6:
        return [(np.arange(rows), np.arange(cols))]
    return _merge_windows([_cap_window(c, rad, rows, cols), _cap_window(-c, rad, rows, cols)])


def _pair_buckets(knot: PLKnot, tab: PairTable):
    """CSR table: for each bucket cell, the pairs whose crossing caps may reach it."""
    got = knot.cache.get("pair_buckets")
    if got is not None:
        return got
    rows, cols = BUCKET_GRID
    npairs = len(tab.sign)
    keys = []
    for p in range(npairs):
        for ri, ci in _pair_windows(tab, p, rows, cols):
            keys.append(((ri[:, None] * cols + ci[None, :]) * npairs + p).ravel())
    keys = np.unique(np.concatenate(keys)) if keys else np.zeros(0, dtype=np.int64)
    cells, pairs = keys // npairs, keys % npairs
    indptr = np.searchsorted(cells, np.arange(rows * cols + 1))
    knot.cache["pair_buckets"] = (indptr, pairs)
    return indptr, pairs


def _batch_bucketed(knot: PLKnot, tab: PairTable, xs: np.ndarray, eps: float):
    """Same contract as :func:`_batch`, testing each direction only against
    the pairs whose caps cover its bucket cell.  Pays off for long knots."""
    rows, cols = BUCKET_GRID
    indptr, pairs = _pair_buckets(knot, tab)
    n = len(xs)
    tait = np.zeros(n, dtype=np.int64)
    amb = np.zeros(n, dtype=bool)
    th = np.arccos(np.clip(xs[:, 2], -1.0, 1.0))
    ph = np.arctan2(xs[:, 1], xs[:, 0]) % (2.0 * math.pi)
    ci = np.clip((th * rows / math.pi).astype(np.int64), 0, rows - 1)
    cj = np.clip((ph * cols / (2.0 * math.pi)).astype(np.int64), 0, cols - 1)
    cell = ci * cols + cj
    order = np.argsort(cell, kind="stable")
    bounds = np.searchsorted(cell[order], np.arange(rows * cols + 1))
    for c in np.nonzero(np.diff(bounds))[0]:
        idx = order[bounds[c]:bounds[c + 1]]
        cand = pairs[indptr[c]:indptr[c + 1]]
        if len(cand) == 0:
            continue
        o = (xs[idx] @ tab.planes[cand].reshape(-1, 3).T).reshape(len(idx), len(cand), 4)
        crosses = (o[..., 0] * o[..., 1] < 0) & (o[..., 2] * o[..., 3] < 0)
        tait[idx] = crosses @ tab.sign[cand]
        amb[idx] = np.any(np.abs(o) <= eps, axis=(1, 2))
    return tait, amb


def tait_grid(knot: PLKnot, rows: int, cols: int, eps: float = EPS_GEO):
    """Tait numbers on a ``rows x cols`` colatitude/longitude grid.

    Returns ``(values, mask)``; ``mask`` flags cells whose centre was
    perturbed, either because it lies on the indicatrix or because the
    projection there is not generic.  Perturbation seeds are derived from
    the cell index, so the output is reproducible.
    """
    if rows < 1 or cols < 1:
        raise ValueError("rows and cols must be positive")
    grid = grid_directions(rows, cols)
    tab = pair_table(knot)
    tait = np.zeros((rows, cols), dtype=np.int64)
    amb = np.zeros((rows, cols), dtype=bool)
    for p in range(len(tab.sign)):
        planes = tab.planes[p].T
        for ri, ci in _pair_windows(tab, p, rows, cols):
            blk = np.ix_(ri, ci)
            o = grid[blk] @ planes
            crosses = (o[..., 0] * o[..., 1] < 0) & (o[..., 2] * o[..., 3] < 0)
            tait[blk] += tab.sign[p] * crosses
            amb[blk] |= np.any(np.abs(o) <= eps, axis=-1)

    ind = _knot_indicatrix(knot)
    on = indicatrix_mask(ind, grid, eps)
    mask = np.zeros((rows, cols), dtype=bool)
    for i, j in zip(*np.nonzero(amb | on)):
        seed = int(i) * cols + int(j)
        tait[i, j], mask[i, j] = _fallback(knot, grid[i, j], eps, seed)
    return tait, mask
