"""Grid classification of amoeba and coamoeba approximations."""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from threadpoolctl import threadpool_limits

from .membership import Budget, Method, PointStatus, Verdict, classify_coamoeba_point, classify_point
from .polycore import ComplexPoly, DimensionError
from .sdp import SolverConfig

CSV_HEADER = "x,y,status,degree,iters,residual"
DOMAINS = {"centered": (-math.pi, math.pi), "positive": (0.0, 2 * math.pi)}


@dataclass
class GridReport:
    """Statuses are stored in image orientation: ``statuses[row, col]`` with row 0 at max y."""

    region: tuple[float, float, float, float]
    resolution: tuple[int, int]
    statuses: np.ndarray
    degrees: np.ndarray
    iterations: np.ndarray
    residuals: np.ndarray
    kind: str = "amoeba"
    meta: dict = field(default_factory=dict)

    @property
    def xs(self) -> np.ndarray:
        return cell_centers(self.region, self.resolution)[0]

    @property
    def ys(self) -> np.ndarray:
        return cell_centers(self.region, self.resolution)[1]

    def counts(self) -> dict[str, int]:
        return {v.name: int(np.sum(self.statuses == v.value)) for v in Verdict}


def cell_centers(region, resolution) -> tuple[np.ndarray, np.ndarray]:
    """Column x-centers (increasing) and row y-centers (decreasing from the top)."""
    xmin, xmax, ymin, ymax = region
    nx, ny = resolution
    hx, hy = (xmax - xmin) / nx, (ymax - ymin) / ny
    xs = xmin + (np.arange(nx) + 0.5) * hx
    ys = ymax - (np.arange(ny) + 0.5) * hy
    return xs, ys


def _check_grid(region, resolution, minimum: int):
    xmin, xmax, ymin, ymax = region
    if not (xmax > xmin and ymax > ymin) or not all(map(math.isfinite, region)):
        raise ValueError(f"degenerate region {region}")
    nx, ny = resolution
    if nx < minimum or ny < minimum:
        raise ValueError(f"resolution must be at least {minimum}x{minimum}")


def _init_worker():
    threadpool_limits(1)


def _amoeba_cell(task):
    fs, x, y, method, budget, cfg = task
    return classify_point(fs, (x, y), method, budget, cfg, log_space=True)


def _coamoeba_cell(task):
    fs, x, y, _, budget, cfg = task
    return classify_coamoeba_point(fs, (x, y), budget, cfg)


def _run(worker, tasks, workers: int) -> list[PointStatus]:
    with threadpool_limits(1):
        if workers <= 1:
            return [worker(t) for t in tasks]
        chunk = max(1, len(tasks) // (8 * workers))
        with ProcessPoolExecutor(max_workers=workers, initializer=_init_worker) as ex:
            return list(ex.map(worker, tasks, chunksize=chunk))


def _grid(fs, region, resolution, method, budget, cfg, workers, worker, kind) -> GridReport:
    xs, ys = cell_centers(region, resolution)
    nx, ny = resolution
    tasks = [(fs, float(x), float(y), method, budget, cfg) for y in ys for x in xs]
    results = _run(worker, tasks, workers)
    shape = (ny, nx)
    return GridReport(
        tuple(float(v) for v in region),
        (nx, ny),
        np.array([int(r.verdict) for r in results], dtype=np.int8).reshape(shape),
        np.array([r.degree if r.degree is not None else -1 for r in results], dtype=int).reshape(shape),
        np.array([r.iterations for r in results], dtype=int).reshape(shape),
        np.array([r.residual for r in results], dtype=float).reshape(shape),
        kind,
        {"method": method.value if method else None, "budget": budget},
    )


def _as_list(fs) -> list[ComplexPoly]:
    fs = [fs] if isinstance(fs, ComplexPoly) else list(fs)
    if fs[0].n != 2:
        raise DimensionError("grid scans need two variables")
    return fs


def scan_amoeba(
    fs,
    region: Sequence[float],
    resolution: Sequence[int],
    method: Method = Method.AUTO,
    budget: Budget = Budget(),
    cfg: SolverConfig | None = None,
    workers: int = 1,
) -> GridReport:
    """Classify the cell centers of a log-space grid."""
    fs = _as_list(fs)
    region, resolution = tuple(region), tuple(int(v) for v in resolution)
    _check_grid(region, resolution, 2)
    return _grid(fs, region, resolution, method, budget, cfg, workers, _amoeba_cell, "amoeba")


def scan_coamoeba(
    fs,
    resolution: Sequence[int],
    budget: Budget = Budget(t=0, k=1),
    cfg: SolverConfig | None = None,
    domain: str = "centered",
    workers: int = 1,
) -> GridReport:
    """Classify angle cells over ``[-pi, pi)^2`` (``centered``) or ``[0, 2pi)^2`` (``positive``)."""
    fs = _as_list(fs)
    lo, hi = DOMAINS[domain]
    region = (lo, hi, lo, hi)
    resolution = tuple(int(v) for v in resolution)
    _check_grid(region, resolution, 1)
    return _grid(fs, region, resolution, None, budget, cfg, workers, _coamoeba_cell, "coamoeba")


# -- output ---------------------------------------------------------------------------------


def _g9(x) -> str:
    return f"{float(x):.9g}"


def pgm_text(r: GridReport) -> str:
    nx, ny = r.resolution
    rows = "\n".join(" ".join(str(int(v)) for v in row) for row in r.statuses)
    return f"P2\n{nx} {ny}\n4\n{rows}\n"


def csv_text(r: GridReport) -> str:
    xs, ys = cell_centers(r.region, r.resolution)
    lines = [CSV_HEADER]
    for i, y in enumerate(ys):
        for j, x in enumerate(xs):
            lines.append(
                f"{_g9(x)},{_g9(y)},{int(r.statuses[i, j])},{int(r.degrees[i, j])},"
                f"{int(r.iterations[i, j])},{_g9(r.residuals[i, j])}"
            )
    return "\n".join(lines) + "\n"


def emit_report(r: GridReport, fmt: str, path: str | Path) -> None:
    fmt = fmt.lower()
    if fmt == "pgm":
        text = pgm_text(r)
    elif fmt == "csv":
        text = csv_text(r)
    else:
        raise ValueError(f"unknown format {fmt!r}")
    with open(path, "w", newline="\n") as fh:
        fh.write(text)


def read_csv_statuses(path: str | Path) -> np.ndarray:
    """Status matrix (image orientation) rebuilt from an emitted CSV."""
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    xs = sorted({float(r["x"]) for r in rows})
    ys = sorted({float(r["y"]) for r in rows}, reverse=True)
    col = {x: j for j, x in enumerate(xs)}
    row = {y: i for i, y in enumerate(ys)}
    out = np.full((len(ys), len(xs)), -1, dtype=np.int8)
    for r in rows:
        out[row[float(r["y"])], col[float(r["x"])]] = int(r["status"])
    return out


def read_pgm(path: str | Path) -> np.ndarray:
    tokens = Path(path).read_text().split()
    if tokens[0] != "P2":
        raise ValueError("not a plain PGM file")
    nx, ny = int(tokens[1]), int(tokens[2])
    return np.array([int(t) for t in tokens[4:]], dtype=np.int8).reshape(ny, nx)
