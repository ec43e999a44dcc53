"""Command-line front end.

    dickehubbard bands --zeta 0.18 --lambda 0.3 --out bands.csv
    dickehubbard classify --k 0 --lambda 0.48 --zeta 0.18
    dickehubbard phase-diagram --config run.json --grid 256x256 --format json --out pd.json

Exit codes: 0 ok, 2 invalid configuration, 3 domain error, 4 I/O failure.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
import time
from dataclasses import dataclass, field
from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from . import bands as bd
from . import phase as ph
from .errors import ContractViolation, DickeHubbardError
from .io import render_csv, render_json, write_atomic
from .model import Branch, Geometry, ModelParams

TASKS = ("bands", "phase-diagram", "ldos", "classify", "flatband-scan", "crossings", "intersection-2d")
SUBCOMMANDS = {"bands": "bands", "phase-diagram": "phase-diagram", "ldos": "ldos", "classify": "classify",
               "flatband-scan": "flatband-scan", "crossings": "crossings", "intersect2d": "intersection-2d"}

EXIT_OK, EXIT_CONFIG, EXIT_DOMAIN, EXIT_IO = 0, 2, 3, 4


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", populate_by_name=True)


class ModelConfig(_Strict):
    omega_a: float = 1.0
    omega_b: float = 1.0
    omega_spin: float = 1.0
    zeta: float = 0.0
    lam: float = Field(0.0, alias="lambda")
    geometry: Geometry = Geometry.CHAIN_1D


class GridConfig(_Strict):
    k_points: int = Field(1024, ge=1)
    k_range: Optional[tuple[float, float]] = None
    k_mesh: tuple[int, int] = (64, 64)
    lambda_points: int = Field(256, ge=1)
    lambda_range: tuple[float, float] = (0.2, 0.7)
    lambda_values: Optional[list[float]] = None
    bins: int = Field(bd.DEFAULT_BINS, ge=1)
    energy_window: tuple[float, float] = bd.DEFAULT_WINDOW
    n_range: tuple[int, int] = (-1, 1)
    resolution: int = Field(512, ge=8)


class OutputConfig(_Strict):
    path: Optional[str] = None
    format: Literal["csv", "json"] = "csv"


class ToleranceConfig(_Strict):
    flat: float = Field(1e-9, gt=0)


class RunConfig(_Strict):
    model: ModelConfig = ModelConfig()
    task: Literal[TASKS]  # type: ignore[valid-type]
    grids: GridConfig = GridConfig()
    output: OutputConfig = OutputConfig()
    broadening: float = Field(bd.DEFAULT_SIGMA, gt=0)
    tolerances: ToleranceConfig = ToleranceConfig()
    branch: Literal["auto", "normal", "superradiant"] = "auto"
    k: Optional[list[float]] = None
    band: int = Field(1, ge=0, le=2)

    @model_validator(mode="after")
    def _task_fields(self):
        if self.task == "classify" and self.k is None:
            raise ValueError("task 'classify' requires field 'k'")
        if self.k is not None:
            want = 1 if self.model.geometry is Geometry.CHAIN_1D else 2
            if len(self.k) != want:
                raise ValueError(f"field 'k' needs {want} component(s) for geometry {self.model.geometry.value}")
        lo, hi = self.grids.n_range
        if lo > hi:
            raise ValueError("grids.n_range must be ordered")
        return self

    def params(self) -> ModelParams:
        m = self.model
        return ModelParams(m.omega_a, m.omega_b, m.omega_spin, m.zeta, m.lam, m.geometry)


@dataclass
class TaskResult:
    task: str
    columns: list
    rows: list
    grid: dict
    n_nodes: int = 0
    n_unstable: int = 0
    report: dict = field(default_factory=dict)


def _branch_for(cfg: RunConfig, params: ModelParams) -> Branch:
    if cfg.branch != "auto":
        return Branch(cfg.branch)
    if params.lam > ph.lambda_sc(params):
        return Branch.SUPERRADIANT
    return Branch.NORMAL


def _k_columns(params):
    return ["k"] if params.geometry is Geometry.CHAIN_1D else ["kx", "ky"]


def _k_cells(params, k):
    return [float(k)] if params.geometry is Geometry.CHAIN_1D else [float(k[0]), float(k[1])]


def _path(cfg, params, default_range):
    g = cfg.grids
    if params.geometry is Geometry.CHAIN_1D:
        lo, hi = g.k_range or default_range
        return np.linspace(lo, hi, g.k_points), {"k_points": g.k_points, "k_range": [lo, hi]}
    x0, x1, y0, y1 = ph.honeycomb_window()
    nx, ny = g.k_mesh
    xs, ys = np.linspace(x0, x1, nx), np.linspace(y0, y1, ny)
    xx, yy = np.meshgrid(xs, ys, indexing="ij")
    return (np.column_stack([xx.ravel(), yy.ravel()]),
            {"k_mesh": [nx, ny], "k_window": [x0, x1, y0, y1]})


def _bz_samples(cfg, params):
    g = cfg.grids
    if params.geometry is Geometry.CHAIN_1D:
        return bd.bz_samples_1d(g.k_points), {"k_points": g.k_points, "sampling": "uniform [-pi, pi)"}
    return bd.bz_mesh_2d(*g.k_mesh), {"k_mesh": list(g.k_mesh), "sampling": "uniform reciprocal cell"}


def _task_bands(cfg, params):
    branch = _branch_for(cfg, params)
    path, grid = _path(cfg, params, (-math.pi, math.pi))
    bs = bd.band_sweep(params, path, branch)
    cols = _k_columns(params) + ["E_l_re", "E_l_im", "E_m_re", "E_m_im", "E_h_re", "E_h_im", "stable"]
    rows = []
    for k, e, s in zip(bs.path, bs.bands, bs.stability_mask):
        rows.append(_k_cells(params, k) + [x for v in e for x in (v.real, v.imag)] + [bool(s)])
    grid["branch"] = branch.value
    report = {"branch": branch.value}
    if bs.all_stable:
        report["flat_bands"] = bd.detect_flat_bands(bs, cfg.tolerances.flat)
    return TaskResult("bands", cols, rows, grid, len(rows), int(np.sum(~bs.stability_mask)), report)


def _task_phase_diagram(cfg, params):
    g = cfg.grids
    ks, grid = _path(cfg, params, (-2 * math.pi, 2 * math.pi))
    lams = np.linspace(*g.lambda_range, g.lambda_points)
    grid.update(lambda_points=g.lambda_points, lambda_range=list(g.lambda_range))
    pd = ph.scan(params, ks, lams)
    cols = _k_columns(params) + ["lambda", "label", "E_nor_re", "E_nor_im", "E_sup_re", "E_sup_im"]
    rows = []
    for i, k in enumerate(pd.k_axis):
        kc = _k_cells(params, k)
        for j, lam in enumerate(pd.lambda_axis):
            en, es = pd.lowest_energy_nor[i, j], pd.lowest_energy_sup[i, j]
            rows.append(kc + [float(lam), str(pd.labels[i, j]), en.real, en.imag, es.real, es.imag])
    counts = pd.counts()
    report = {"lambda_sc": ph.lambda_sc(params), "region_counts": counts}
    return TaskResult("phase-diagram", cols, rows, grid, pd.labels.size, counts["Unstable"], report)


def _task_ldos(cfg, params):
    branch = _branch_for(cfg, params)
    ks, grid = _bz_samples(cfg, params)
    g = cfg.grids
    hists = [bd.ldos(params, branch, m, cfg.band, ks, g.bins, cfg.broadening, g.energy_window)
             for m in bd.Mode]
    grid.update(bins=g.bins, energy_window=list(g.energy_window), sigma=cfg.broadening,
                band=cfg.band, branch=branch.value)
    cols = ["energy"] + [m.value for m in bd.Mode]
    rows = [[float(c)] + [float(h.weights[i]) for h in hists] for i, c in enumerate(hists[0].centers)]
    total = sum(h.total for h in hists)
    report = {"branch": branch.value, "band": cfg.band,
              "mode_fractions": {h.mode.value: (h.total / total if total else float("nan")) for h in hists}}
    n = hists[0].n_samples + hists[0].n_unstable
    return TaskResult("ldos", cols, rows, grid, n, hists[0].n_unstable, report)


def _task_classify(cfg, params):
    k = cfg.k[0] if params.geometry is Geometry.CHAIN_1D else np.array(cfg.k)
    label = ph.classify(params, k, params.lam)
    cols = _k_columns(params) + ["lambda", "label"]
    rows = [_k_cells(params, k) + [params.lam, label.value]]
    report = {"label": label.value, "lambda_sc": ph.lambda_sc(params)}
    if params.is_resonant:
        report["boundary_normal"] = ph.boundary_normal(params, k)
    try:
        report["boundary_super"] = ph.boundary_super(params, k)
    except DickeHubbardError:
        pass
    return TaskResult("classify", cols, rows, {"k": list(cfg.k)}, 1, int(label is ph.Region.UNSTABLE), report)


def _task_flatband_scan(cfg, params):
    lams = cfg.grids.lambda_values or [params.lam]
    ks, grid = _bz_samples(cfg, params)
    grid.update(lambda_values=list(lams), tolerance=cfg.tolerances.flat)
    cols = ["lambda", "branch", "band", "mean_energy", "flatness", "flat", "n_unstable"]
    rows, detected, n_bad_total = [], [], 0
    for lam in lams:
        p = params.with_lambda(lam)
        branch = _branch_for(cfg, p)
        bs = bd.band_sweep(p, ks, branch)
        ok = bs.stability_mask
        n_bad = int(np.sum(~ok))
        n_bad_total += n_bad
        e = bs.bands.real[ok]
        for j in range(3):
            if e.size:
                flat = float(e[:, j].max() - e[:, j].min())
                mean = float(e[:, j].mean())
            else:
                flat = mean = float("nan")
            is_flat = n_bad == 0 and flat < cfg.tolerances.flat
            rows.append([float(lam), branch.value, j, mean, flat, is_flat, n_bad])
            if is_flat:
                detected.append({"lambda": float(lam), "band": j, "energy": mean, "flatness": flat})
    report = {"flat_bands": detected}
    return TaskResult("flatband-scan", cols, rows, grid, len(lams) * len(ks), n_bad_total, report)


def _task_crossings(cfg, params):
    lo, hi = cfg.grids.n_range
    pts = ph.crossing_points(lo, hi)
    cols = ["n", "kind", "k", "cos_k"]
    rows = []
    for i, (k, kind) in enumerate(pts):
        rows.append([lo + i // 2, kind, k, math.cos(k)])
    report = {"crossings": [k for k, _ in pts]}
    try:
        report["lambda_sc"] = ph.lambda_sc(params)
    except DickeHubbardError:
        pass
    return TaskResult("crossings", cols, rows, {"n_range": [lo, hi]}, len(rows), 0, report)


def _task_intersection(cfg, params):
    res = cfg.grids.resolution
    window = ph.honeycomb_window()
    pts = ph.intersection_curve_2d(None, window, res)
    g = ph.intersection_g(pts[:, 0], pts[:, 1]) if len(pts) else np.empty(0)
    cols = ["kx", "ky", "g"]
    rows = [[float(x), float(y), float(v)] for (x, y), v in zip(pts, g)]
    report = {"points": len(rows), "max_abs_g": float(np.max(np.abs(g))) if len(g) else 0.0,
              "lambda_sc": ph.lambda_sc(params)}
    return TaskResult("intersection-2d", cols, rows, {"resolution": res, "k_window": list(window)},
                      len(rows), 0, report)


_RUNNERS = {"bands": _task_bands, "phase-diagram": _task_phase_diagram, "ldos": _task_ldos,
            "classify": _task_classify, "flatband-scan": _task_flatband_scan,
            "crossings": _task_crossings, "intersection-2d": _task_intersection}


def execute(cfg: RunConfig) -> TaskResult:
    """Run the configured task without touching the filesystem."""
    params = cfg.params().require_valid()
    return _RUNNERS[cfg.task](cfg, params)


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.10g}"
    return str(v)


def emit_report(result: TaskResult) -> str:
    """Human-readable summary of a finished task."""
    lines = [f"[{result.task}]"]
    for key, value in result.report.items():
        if key == "flat_bands":
            if not value:
                lines.append("flat bands: none")
            for fb in value:
                if isinstance(fb, dict):
                    lines.append(f"flat band: lambda={_fmt(fb['lambda'])} band={fb['band']} "
                                 f"energy={_fmt(fb['energy'])} flatness={fb['flatness']:.3e}")
                else:
                    lines.append(f"flat band: band={fb.index} energy={_fmt(fb.energy)} "
                                 f"flatness={fb.flatness:.3e}")
        elif key == "crossings":
            lines.append("crossings k: " + ", ".join(f"{k:.12f}" for k in value))
        elif isinstance(value, dict):
            lines.append(f"{key}: " + ", ".join(f"{k}={_fmt(v)}" for k, v in value.items()))
        else:
            lines.append(f"{key}: {_fmt(value)}")
    lines.append(f"unstable nodes: {result.n_unstable}/{result.n_nodes}")
    return "\n".join(lines)


def _parse_grid(text: str) -> tuple[int, int]:
    try:
        a, b = text.lower().split("x")
        return int(a), int(b)
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid must look like NxM, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dickehubbard", description=__doc__.split("\n\n")[0])
    sub = ap.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="JSON run configuration")
        sp.add_argument("--out", help="output file (written atomically)")
        sp.add_argument("--format", choices=("csv", "json"))
        sp.add_argument("--lambda", dest="lam", type=float)
        sp.add_argument("--zeta", type=float)
        sp.add_argument("--k", help="wave number, or 'kx,ky' on the honeycomb lattice")
        sp.add_argument("--grid", type=_parse_grid, help="NxM: k points x lambda points (1D) or k mesh (2D)")
        sp.add_argument("--sigma", type=float, help="LDOS Gaussian width")
        sp.add_argument("--geometry", choices=[g.value for g in Geometry])
    return ap


def _merge(args) -> dict:
    raw: dict = {}
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            raw = json.load(fh)
        if not isinstance(raw, dict):
            raise ValueError("config must be a JSON object")
    task = SUBCOMMANDS[args.command]
    if raw.get("task", task) != task:
        raise ValueError(f"config task {raw['task']!r} does not match subcommand {args.command!r}")
    raw["task"] = task
    model = raw.setdefault("model", {})
    if not isinstance(model, dict):
        raise ValueError("field 'model' must be an object")
    if args.lam is not None:
        model["lambda"] = args.lam
    if args.zeta is not None:
        model["zeta"] = args.zeta
    if args.geometry is not None:
        model["geometry"] = args.geometry
    if args.k is not None:
        raw["k"] = [float(x) for x in args.k.split(",")]
    grids = raw.setdefault("grids", {})
    if args.grid is not None:
        n, m = args.grid
        geometry = model.get("geometry", Geometry.CHAIN_1D.value)
        if geometry == Geometry.HONEYCOMB_2D.value and task != "phase-diagram":
            grids["k_mesh"] = [n, m]
        elif task in ("phase-diagram",):
            if geometry == Geometry.HONEYCOMB_2D.value:
                grids["k_mesh"] = [n, n]
            else:
                grids["k_points"] = n
            grids["lambda_points"] = m
        elif task == "intersection-2d":
            grids["resolution"] = n
        else:
            grids["k_points"] = n
    if args.sigma is not None:
        raw["broadening"] = args.sigma
    out = raw.setdefault("output", {})
    if args.out is not None:
        out["path"] = args.out
    if args.format is not None:
        out["format"] = args.format
    return raw


def run(config: RunConfig | dict, stdout=None, stderr=None) -> int:
    """Execute a task, write its output file and print summary + report."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        cfg = config if isinstance(config, RunConfig) else RunConfig.model_validate(config)
        cfg.params()
    except ValidationError as exc:
        for err in exc.errors():
            loc = ".".join(str(p) for p in err["loc"]) or "config"
            print(f"invalid config: {loc}: {err['msg']}", file=stderr)
        return EXIT_CONFIG
    except ContractViolation as exc:
        print(f"invalid config: model: {exc}", file=stderr)
        return EXIT_CONFIG
    t0 = time.perf_counter()
    try:
        result = execute(cfg)
    except DickeHubbardError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=stderr)
        return EXIT_DOMAIN
    header = {"task": cfg.task, "model": cfg.params().to_dict(), "grid": result.grid}
    if cfg.output.path:
        render = render_csv if cfg.output.format == "csv" else render_json
        try:
            write_atomic(cfg.output.path, render(cfg.task, header, result.columns, result.rows))
        except OSError as exc:
            print(f"error: cannot write {cfg.output.path}: {exc}", file=stderr)
            return EXIT_IO
    wall = time.perf_counter() - t0
    if cfg.task == "classify":
        print(result.report["label"], file=stdout)
    grid_desc = ",".join(f"{k}={v}" for k, v in result.grid.items()
                         if k in ("k_points", "k_mesh", "lambda_points", "bins", "resolution", "n_range", "k"))
    print(f"{cfg.task}: grid[{grid_desc}] wall={wall:.3f}s "
          f"stable={result.n_nodes - result.n_unstable}/{result.n_nodes}", file=stdout)
    print(emit_report(result), file=stdout)
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        raw = _merge(args)
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"invalid config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return run(raw)


if __name__ == "__main__":
    raise SystemExit(main())
