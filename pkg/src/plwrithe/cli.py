"""Command-line front end: ``plwrithe {writhe,tait,acn,heatmap,validate} INPUT``.

Exit codes: 0 success, 1 a ``validate`` check failed, 2 invalid input,
3 numerical or arrangement failure.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .arrangement import verify_corollary
from .errors import GeometryError, KnotValidationError
from .heatmap import write_int_csv, write_pgm
from .knot import LatticeKnot, as_pl_knot, load_knot
from .projection import resolve_direction, tait_grid, tait_number
from .sphere import normalize
from .writhe import acn_monte_carlo, formula_arrangement, writhe_formula, writhe_lattice, writhe_monte_carlo

EXIT_OK, EXIT_CHECK_FAILED, EXIT_INVALID, EXIT_NUMERIC = 0, 1, 2, 3


@dataclass
class RunConfig:
    command: str
    input: Path
    method: str = "formula"
    samples: int = 100_000
    seed: int = 0
    eps: float = 1e-9
    rows: int = 360
    cols: int = 900
    output: Path | None = None
    json: bool = False
    direction: str | None = None

    def __post_init__(self):
        if self.samples < 1:
            raise KnotValidationError("--samples must be >= 1")
        if self.rows < 1 or self.cols < 1:
            raise KnotValidationError("--rows and --cols must be >= 1")
        if not self.eps > 0:
            raise KnotValidationError("--eps must be positive")


def fmt(x) -> str:
    return f"{x:.12g}"


def _round12(obj):
    if isinstance(obj, float):
        return float(fmt(obj)) if math.isfinite(obj) else obj
    if isinstance(obj, dict):
        return {k: _round12(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round12(v) for v in obj]
    return obj


def dumps(obj) -> str:
    return json.dumps(_round12(obj), sort_keys=True)


def _emit(cfg: RunConfig, text: str) -> None:
    if cfg.output is not None:
        Path(cfg.output).write_text(text + "\n")
    else:
        print(text)


def _summary(d: dict) -> str:
    lines = []
    for key in ("method", "value", "numerator", "denominator", "std_error", "samples", "seed",
                "face_count", "base_tait"):
        if key in d:
            v = d[key]
            lines.append(f"{key}: {fmt(v) if isinstance(v, float) else v}")
    return "\n".join(lines)


def cmd_writhe(cfg: RunConfig) -> int:
    obj = load_knot(cfg.input)
    if cfg.method == "formula":
        rep = writhe_formula(obj, cfg.eps)
    elif cfg.method == "lattice":
        rep = writhe_lattice(obj, cfg.eps)
    else:
        rep = writhe_monte_carlo(as_pl_knot(obj), cfg.samples, cfg.seed, cfg.eps)
    d = rep.to_dict()
    if not cfg.json:
        d.pop("diagnostics", None)
    _emit(cfg, dumps(d) if cfg.json else _summary(d))
    return EXIT_OK


def cmd_acn(cfg: RunConfig) -> int:
    knot = as_pl_knot(load_knot(cfg.input))
    d = acn_monte_carlo(knot, cfg.samples, cfg.seed, cfg.eps).to_dict()
    _emit(cfg, dumps(d) if cfg.json else _summary(d))
    return EXIT_OK


def cmd_tait(cfg: RunConfig) -> int:
    knot = as_pl_knot(load_knot(cfg.input))
    if not cfg.direction:
        raise KnotValidationError("tait needs --dir x,y,z")
    try:
        xi = normalize([float(s) for s in cfg.direction.split(",")])
    except ValueError as exc:
        raise KnotValidationError(f"bad --dir {cfg.direction!r}: {exc}") from None
    x, moved = resolve_direction(knot, xi, cfg.eps, cfg.seed)
    t = tait_number(knot, x, cfg.eps, cfg.seed)
    d = {"direction": xi.tolist(), "tait": t, "perturbed": moved}
    _emit(cfg, dumps(d) if cfg.json else f"tait: {t}" + (" (perturbed)" if moved else ""))
    return EXIT_OK


def cmd_heatmap(cfg: RunConfig) -> int:
    knot = as_pl_knot(load_knot(cfg.input))
    tait, mask = tait_grid(knot, cfg.rows, cfg.cols, cfg.eps)
    prefix = Path(cfg.output) if cfg.output is not None else cfg.input.with_name(cfg.input.stem + "_tait")
    paths = {"csv": prefix.with_suffix(".csv"), "pgm": prefix.with_suffix(".pgm"),
             "mask": prefix.with_name(prefix.name + "_mask.csv")}
    write_int_csv(paths["csv"], tait)
    write_pgm(paths["pgm"], tait)
    write_int_csv(paths["mask"], mask.astype(np.int64))
    d = {"rows": cfg.rows, "cols": cfg.cols, "values": sorted(int(v) for v in np.unique(tait)),
         "perturbed": int(mask.sum()), **{k: str(v) for k, v in paths.items()}}
    if cfg.json:
        print(dumps(d))
    else:
        print(f"grid {cfg.rows}x{cfg.cols}, values {d['values']}, perturbed cells {d['perturbed']}")
        for k, v in paths.items():
            print(f"{k}: {v}")
    return EXIT_OK


def validation_checks(obj, samples: int, seed: int, eps: float) -> list[tuple[str, bool, str]]:
    knot = as_pl_knot(obj)
    checks = [("embedding", True, f"{knot.n_edges} edges")]
    arr = formula_arrangement(knot, eps)
    chi = arr.euler_characteristic
    checks.append(("euler", chi == 2, f"V-E+F = {chi}"))
    dev = abs(arr.total_area - 4 * math.pi)
    checks.append(("area", dev <= 1e-8, f"|sum(area) - 4pi| = {dev:.3g}"))
    rep = verify_corollary(arr, knot)
    checks.append(("corollary", rep.passed, f"{len(rep.checks) - len(rep.failures)}/{len(rep.checks)} edges"))
    bad = sum(tait_number(knot, f.representative, eps) != f.tait for f in arr.faces)
    checks.append(("propagation", bad == 0, f"{len(arr.faces) - bad}/{len(arr.faces)} faces"))
    wf = writhe_formula(knot, eps).value
    mc = writhe_monte_carlo(knot, samples, seed, eps)
    diff = abs(wf - mc.value)
    checks.append(("formula_vs_mc", diff <= 3 * mc.std_error + 1e-9,
                   f"|{fmt(wf)} - {fmt(mc.value)}| = {diff:.3g}, 3se = {3 * mc.std_error:.3g}"))
    if isinstance(obj, LatticeKnot):
        wl = writhe_lattice(obj, eps)
        checks.append(("lattice", abs(wl.value - wf) <= 1e-10,
                       f"{wl.numerator}/4 vs formula {fmt(wf)}"))
    return checks


def cmd_validate(cfg: RunConfig) -> int:
    obj = load_knot(cfg.input)
    checks = validation_checks(obj, cfg.samples, cfg.seed, cfg.eps)
    ok = all(c[1] for c in checks)
    if cfg.json:
        print(dumps({"passed": ok, "checks": [{"name": n, "passed": p, "detail": d} for n, p, d in checks]}))
    else:
        width = max(len(n) for n, _, _ in checks)
        for n, p, d in checks:
            print(f"{n:<{width}}  {'PASS' if p else 'FAIL'}  {d}")
    return EXIT_OK if ok else EXIT_CHECK_FAILED


COMMANDS = {"writhe": cmd_writhe, "heatmap": cmd_heatmap, "tait": cmd_tait,
            "acn": cmd_acn, "validate": cmd_validate}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="plwrithe", description="Writhe of polygonal and lattice knots.")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("input", type=Path, help="knot file: .json vertices or .lat move string")
        s.add_argument("--method", choices=["formula", "lattice", "mc"], default="formula")
        s.add_argument("--samples", type=int, default=100_000)
        s.add_argument("--seed", type=int, default=0)
        s.add_argument("--eps", type=float, default=1e-9)
        s.add_argument("--rows", type=int, default=360)
        s.add_argument("--cols", type=int, default=900)
        s.add_argument("--dir", dest="direction")
        s.add_argument("--json", action="store_true")
        s.add_argument("-o", "--output", type=Path)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = RunConfig(**vars(args))
        return COMMANDS[cfg.command](cfg)
    except (KnotValidationError, OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (GeometryError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
