"""Tait-field grid export and comparison against the arrangement."""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import ndimage

from .arrangement import Arrangement
from .projection import grid_directions


def gray_levels(tait: np.ndarray) -> np.ndarray:
    """Pixel value ``clamp(128 + 16 T, 0, 255)``."""
    return np.clip(128 + 16 * np.asarray(tait, dtype=np.int64), 0, 255).astype(np.uint8)


def write_int_csv(path, values: np.ndarray) -> None:
    with open(path, "w", newline="\n") as fh:
        for row in np.asarray(values, dtype=np.int64):
            fh.write(",".join(str(int(v)) for v in row))
            fh.write("\n")


def read_int_csv(path) -> np.ndarray:
    return np.loadtxt(path, delimiter=",", dtype=np.int64, ndmin=2)


def write_pgm(path, tait: np.ndarray) -> None:
    """Binary (P5) graymap, one pixel per grid cell, north row first."""
    px = gray_levels(tait)
    rows, cols = px.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{cols} {rows}\n255\n".encode("ascii"))
        fh.write(px.tobytes())


def read_pgm(path) -> np.ndarray:
    data = Path(path).read_bytes()
    parts = data.split(b"\n", 3)
    if parts[0] != b"P5":
        raise ValueError("not a binary PGM")
    cols, rows = (int(x) for x in parts[1].split())
    return np.frombuffer(parts[3], dtype=np.uint8).reshape(rows, cols)


def antipodal_index_map(values: np.ndarray) -> np.ndarray:
    """Grid of values read at the antipodal cell of each cell.

    Exact for even ``cols``: the antipode of cell ``(i, j)`` is
    ``(rows - 1 - i, (j + cols/2) mod cols)``.
    """
    cols = values.shape[1]
    return np.roll(values[::-1], -(cols // 2), axis=1)


def boundary_cells(arr: Arrangement, rows: int, cols: int) -> np.ndarray:
    """Cells met by an arrangement edge, dilated by one cell (longitude wraps)."""
    hit = np.zeros((rows, cols), dtype=bool)
    dth = math.pi / rows
    dph = 2 * math.pi / cols
    for e in arr.edges:
        a, b = arr.vertices[e.start], arr.vertices[e.end]
        length = math.atan2(float(np.linalg.norm(np.cross(a, b))), float(a @ b))
        coarse = _arc_points(a, b, length, 64)
        smin = max(float(np.min(np.hypot(coarse[:, 0], coarse[:, 1]))), math.sin(0.5 * dth))
        step = 0.25 * min(dth, dph * smin)
        pts = _arc_points(a, b, length, int(math.ceil(length / step)) + 2)
        th = np.arccos(np.clip(pts[:, 2], -1, 1))
        ph = np.arctan2(pts[:, 1], pts[:, 0]) % (2 * math.pi)
        i = np.clip((th / dth).astype(int), 0, rows - 1)
        j = np.clip((ph / dph).astype(int), 0, cols - 1)
        hit[i, j] = True
    grown = hit.copy()
    grown[1:, :] |= hit[:-1, :]
    grown[:-1, :] |= hit[1:, :]
    grown |= np.roll(hit, 1, axis=1) | np.roll(hit, -1, axis=1)
    return grown


def _arc_points(a, b, length, n):
    t = np.linspace(0.0, 1.0, max(n, 2))
    normal = np.cross(a, b)
    normal /= np.linalg.norm(normal)
    perp = np.cross(normal, a)
    ang = t * length
    return np.cos(ang)[:, None] * a + np.sin(ang)[:, None] * perp


@dataclass(frozen=True)
class GridAgreement:
    checked: int
    matching: int
    excluded: int
    components: int

    @property
    def fraction(self) -> float:
        return self.matching / self.checked if self.checked else 1.0


def grid_face_agreement(tait: np.ndarray, arr: Arrangement, samples_per_component: int = 3) -> GridAgreement:
    """Compare a Tait grid with the face values of an arrangement.

    Cells away from the indicatrix are grouped into connected regions; each
    region is located in the arrangement at a few of its cells and every
    cell is compared with that face's propagated Tait number.
    """
    rows, cols = tait.shape
    near = boundary_cells(arr, rows, cols)
    lab, n = ndimage.label(~near)
    # glue regions across the longitude seam
    parent = np.arange(n + 1)

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in zip(lab[:, 0], lab[:, -1]):
        if a and b:
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)
    roots = np.array([find(x) for x in range(n + 1)])
    lab = roots[lab]
    dirs = grid_directions(rows, cols)
    face_tait = np.array([f.tait for f in arr.faces])
    matching = checked = 0
    comp_ids = np.unique(lab[lab > 0])
    for c in comp_ids:
        ii, jj = np.nonzero(lab == c)
        picks = np.unique(np.linspace(0, len(ii) - 1, samples_per_component).astype(int))
        located = {arr.locate_face(dirs[ii[p], jj[p]]) for p in picks}
        if len(located) == 1:
            expected = np.full(len(ii), face_tait[located.pop()])
        else:
            expected = np.array([face_tait[arr.locate_face(dirs[i, j])] for i, j in zip(ii, jj)])
        checked += len(ii)
        matching += int(np.sum(tait[ii, jj] == expected))
    return GridAgreement(checked, matching, int(near.sum()), len(comp_ids))
