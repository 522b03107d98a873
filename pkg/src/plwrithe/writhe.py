"""Writhe by the arrangement formula, the lattice fast path, and Monte Carlo."""
from __future__ import annotations

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np

from .arrangement import Arrangement, build_arrangement, offsets_from_base
from .errors import KnotValidationError
from .indicatrix import build_indicatrix
from .knot import LatticeKnot, PLKnot, as_pl_knot, is_axis_aligned
from .projection import tait_number, tait_numbers
from .sphere import EPS_GEO, normalize, sample_directions

MC_BLOCK = 1 << 16

# small irrational tilt keeping the octant probes off lattice-generated planes
_TILT = np.array([0.0123456789, -0.0271828183, 0.0314159265])


@dataclass
class WritheReport:
    method: str
    value: float
    numerator: int | None = None
    denominator: int | None = None
    std_error: float | None = None
    samples: int | None = None
    seed: int | None = None
    face_count: int | None = None
    base_tait: int | None = None
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {k: v for k, v in asdict(self).items() if v is not None and v != {}}

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_json(cls, text: str) -> WritheReport:
        return cls(**json.loads(text))


def formula_arrangement(knot: PLKnot, eps: float = EPS_GEO) -> Arrangement:
    arr = knot.cache.get(("arrangement", eps))
    if arr is None:
        arr = build_arrangement(build_indicatrix(knot, eps), eps=eps)
        knot.cache[("arrangement", eps)] = arr
    return arr


def writhe_from_base(arr: Arrangement, knot: PLKnot, base: int, eps: float = EPS_GEO) -> float:
    """Writhe recomputed with ``base`` as the reference face."""
    t0 = tait_number(knot, arr.faces[base].representative, eps)
    return arr.writhe_sum(t0, offsets_from_base(arr, base))


def writhe_formula(knot: PLKnot | LatticeKnot, eps: float = EPS_GEO) -> WritheReport:
    """Closed-form writhe: Tait number at one face plus area-weighted offsets.

    The sum runs over the faces of the whole sphere and is divided by 4 pi,
    which equals the hemisphere form by antipodal symmetry.
    """
    knot = as_pl_knot(knot)
    arr = formula_arrangement(knot, eps)
    value = arr.writhe_sum(arr.base_tait, {f.id: f.offset for f in arr.faces})
    return WritheReport(
        method="Formula", value=value, face_count=len(arr.faces), base_tait=arr.base_tait,
        diagnostics={
            "base_face": arr.base,
            "offsets": [f.offset for f in arr.faces],
            "areas": [f.area for f in arr.faces],
            "vertices": len(arr.vertices),
            "edges": len(arr.edges),
        })


def octant_probes() -> np.ndarray:
    """Four directions, one inside each open octant with z > 0."""
    return np.array([normalize(np.array([sx, sy, 1.0]) / math.sqrt(3) + _TILT)
                     for sx, sy in ((1, 1), (-1, 1), (-1, -1), (1, -1))])


def writhe_lattice(lk: LatticeKnot | PLKnot, eps: float = EPS_GEO) -> WritheReport:
    """Quarter-integer writhe of a lattice knot from four Tait numbers."""
    knot = as_pl_knot(lk)
    if not is_axis_aligned(knot):
        raise KnotValidationError("writhe_lattice needs a knot with axis-parallel edges")
    taits = [tait_number(knot, x, eps) for x in octant_probes()]
    k = sum(taits)
    return WritheReport(method="Lattice", value=k / 4, numerator=k, denominator=4,
                        diagnostics={"taits": taits})


def _block_sums(knot, n, seed_seq, eps, absolute, hemisphere):
    rng = np.random.default_rng(seed_seq)
    xs = sample_directions(rng, n)
    if hemisphere:
        xs[xs[:, 2] < 0] *= -1.0
    t, moved = tait_numbers(knot, xs, eps, seed=int(seed_seq.generate_state(1)[0]))
    if absolute:
        t = np.abs(t)
    return int(t.sum()), int((t * t).sum()), int(moved.sum())


def _monte_carlo(knot, samples, seed, eps, absolute, workers, hemisphere):
    if samples < 1:
        raise ValueError("samples must be >= 1")
    knot = as_pl_knot(knot)
    # fixed block layout: the estimate does not depend on the worker count
    sizes = [MC_BLOCK] * (samples // MC_BLOCK)
    if samples % MC_BLOCK:
        sizes.append(samples % MC_BLOCK)
    seqs = np.random.SeedSequence(seed).spawn(len(sizes))
    if workers is None:
        workers = min(len(sizes), os.cpu_count() or 1)
    args = [(knot, n, s, eps, absolute, hemisphere) for n, s in zip(sizes, seqs)]
    if workers <= 1:
        parts = [_block_sums(*a) for a in args]
    else:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(lambda a: _block_sums(*a), args))
    s1 = sum(p[0] for p in parts)
    s2 = sum(p[1] for p in parts)
    moved = sum(p[2] for p in parts)
    mean = Fraction(s1, samples)
    if samples > 1:
        var = (Fraction(s2) - Fraction(s1 * s1, samples)) / (samples - 1)
        se = math.sqrt(float(var) / samples)
    else:
        se = float("nan")
    return float(mean), se, moved


def writhe_monte_carlo(knot, samples: int = 100_000, seed: int = 0, eps: float = EPS_GEO,
                       workers: int | None = None, hemisphere: bool = False) -> WritheReport:
    """Average Tait number over uniformly random directions.

    ``hemisphere`` folds every sample into ``z >= 0``; the Tait number is
    even under the antipodal map, so the estimator is unchanged in law.
    """
    mean, se, moved = _monte_carlo(knot, samples, seed, eps, False, workers, hemisphere)
    return WritheReport(method="MonteCarlo", value=mean, std_error=se, samples=samples, seed=seed,
                        diagnostics={"perturbed": moved})


def acn_monte_carlo(knot, samples: int = 100_000, seed: int = 0, eps: float = EPS_GEO,
                    workers: int | None = None) -> WritheReport:
    """Monte Carlo estimate of the mean absolute Tait number."""
    mean, se, moved = _monte_carlo(knot, samples, seed, eps, True, workers, False)
    return WritheReport(method="MonteCarlo", value=mean, std_error=se, samples=samples, seed=seed,
                        diagnostics={"quantity": "average_crossing_number", "perturbed": moved})
