"""Lower bounds for the diameter of a bounded complement component.

A probe at ``d`` asks for a certificate that no variety point has squared
moduli on the sphere of radius ``d/2`` around ``(|delta_i|^2)``.  Bisection
over ``(0, d_max]`` keeps the largest certified ``d``.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from threadpoolctl import threadpool_limits

from .membership import Verdict, verdict_from_search
from .polycore import ComplexPoly, DimensionError, parse_poly
from .sdp import SolverConfig
from .soscert import search_certificate
from .systems import sphere_generators

SWEEP_HEADER = "c,bound_unlog,bound_log,flags"


@dataclass(frozen=True)
class DiameterQuery:
    f: ComplexPoly
    delta: tuple[float, ...]
    d_max: float = 4.0
    iterations: int = 14
    t: int = 3
    k: int | None = 3

    def __post_init__(self):
        if len(self.delta) != self.f.n:
            raise DimensionError("delta has wrong length")
        if any(not (x > 0) for x in self.delta):
            raise ValueError("delta must be strictly positive")
        if self.iterations < 1 or not self.d_max > 0:
            raise ValueError("need iterations >= 1 and d_max > 0")


@dataclass
class DiameterResult:
    bound: float
    probes: list[tuple[float, Verdict]] = field(default_factory=list)

    @property
    def flagged(self) -> bool:
        return any(v in (Verdict.NUMERICAL_FEASIBLE, Verdict.NUMERICAL_INFEASIBLE, Verdict.SOLVER_FAILURE)
                   for _, v in self.probes)

    @property
    def solves(self) -> int:
        return len(self.probes)


def probe(q: DiameterQuery, d: float, cfg: SolverConfig | None = None) -> Verdict:
    sys = sphere_generators(q.f, q.delta, d)
    return verdict_from_search(search_certificate(sys, q.t, q.k, cfg))


def diameter_lower_bound_unlog(q: DiameterQuery, cfg: SolverConfig | None = None) -> DiameterResult:
    """Bisection with exactly ``q.iterations`` probes; NUMERICAL counts as uncertified."""
    lo, hi = 0.0, q.d_max
    out = DiameterResult(0.0)
    for _ in range(q.iterations):
        d = 0.5 * (lo + hi)
        v = probe(q, d, cfg)
        out.probes.append((d, v))
        if v is Verdict.CERTIFIED_OUTSIDE:
            lo = d
        else:
            hi = d
    out.bound = lo
    return out


def insphere_diameter(vertices: Sequence[Sequence[float]]) -> float:
    """``2 * area / semiperimeter`` of a triangle."""
    a, b, c = (np.asarray(v, dtype=float) for v in vertices)
    area = 0.5 * abs((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
    s = 0.5 * (np.linalg.norm(b - a) + np.linalg.norm(c - b) + np.linalg.norm(a - c))
    return 0.0 if s == 0 else 2.0 * area / s


def log_triangle(delta: Sequence[float], r: float) -> list[np.ndarray]:
    if len(delta) != 2:
        raise DimensionError("the log-space bound is implemented for n = 2")
    if r < 0:
        raise ValueError("r must be nonnegative")
    c = np.log(np.asarray(delta, dtype=float))
    return [c + r * np.array([1.0, 0.0]), c + r * np.array([0.0, 1.0]), c + (r / math.sqrt(2)) * np.ones(2)]


def diameter_lower_bound_log(delta: Sequence[float], r: float) -> float:
    return insphere_diameter(log_triangle(delta, r))


def family_poly(c: float) -> ComplexPoly:
    """``1 + Z1^2 Z2 + Z1 Z2^2 + c Z1 Z2``."""
    return parse_poly(f"1 + Z1^2*Z2 + Z1*Z2^2 + ({c!r})*Z1*Z2", 2)


@dataclass(frozen=True)
class SweepRow:
    c: float
    bound_unlog: float
    bound_log: float
    flags: str

    def csv(self) -> str:
        return f"{self.c:.9g},{self.bound_unlog:.9g},{self.bound_log:.9g},{self.flags}"


def _sweep_one(task) -> SweepRow:
    builder, c, template, cfg = task
    q = replace(template, f=builder(c))
    res = diameter_lower_bound_unlog(q, cfg)
    # the squared-modulus radius d/2 is used as the log-space parameter r
    log_bound = diameter_lower_bound_log(q.delta, res.bound / 2)
    return SweepRow(float(c), res.bound, log_bound, "numerical" if res.flagged else "")


def sweep_coefficient(
    builder: Callable[[float], ComplexPoly],
    c_values: Sequence[float],
    template: DiameterQuery,
    cfg: SolverConfig | None = None,
    workers: int = 1,
) -> list[SweepRow]:
    tasks = [(builder, float(c), template, cfg) for c in c_values]
    with threadpool_limits(1):
        if workers <= 1:
            return [_sweep_one(t) for t in tasks]
        with ProcessPoolExecutor(max_workers=workers, initializer=threadpool_limits, initargs=(1,)) as ex:
            return list(ex.map(_sweep_one, tasks))


def sweep_csv(rows: Sequence[SweepRow]) -> str:
    return "\n".join([SWEEP_HEADER] + [r.csv() for r in rows]) + "\n"


def write_sweep(rows: Sequence[SweepRow], path: str | Path) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(sweep_csv(rows))
