"""Single-point membership queries with a five-valued verdict.

Only ``CERTIFIED_OUTSIDE`` is a proof.  ``NO_CERT_AT_DEGREE`` says the point
lies in the degree-bounded outer approximation of the amoeba; it does not say
the point is on the amoeba.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

from .lopsided import explicit_certificate, purbhoo_membership
from .polycore import ComplexPoly, DimensionError, scale_substitute
from .sdp import SolverConfig
from .soscert import Certificate, CertificateResult, SearchStatus, search_certificate, verify_certificate
from .systems import amoeba_generators, coamoeba_generators, monomial_generators


class Verdict(enum.IntEnum):
    CERTIFIED_OUTSIDE = 0
    NUMERICAL_FEASIBLE = 1
    NO_CERT_AT_DEGREE = 2
    NUMERICAL_INFEASIBLE = 3
    SOLVER_FAILURE = 4


class Method(enum.Enum):
    AUTO = "auto"
    SOS_STANDARD = "sos"
    SOS_MONOMIAL = "monomial"
    LOPSIDED = "lopsided"
    PURBHOO = "purbhoo"


@dataclass(frozen=True)
class Budget:
    """Degree budget: multiplier degree ``t``, Gram half-degree ``k`` (None = default), cyclic level ``r``."""

    t: int = 1
    k: int | None = None
    r: int = 1
    normalize: bool = True
    max_gram_degree: int = 6

    def __post_init__(self):
        if self.t < 0 or self.r < 1:
            raise ValueError("need t >= 0 and r >= 1")
        if self.k is not None and not 0 <= self.k <= self.max_gram_degree:
            raise ValueError(f"half-degree {self.k} outside [0, {self.max_gram_degree}]")


@dataclass
class PointStatus:
    verdict: Verdict
    method: Method
    degree: int | None = None  # total degree of the certificate search
    order: tuple[int, ...] | None = None
    certificate: Certificate | None = None
    iterations: int = 0
    residual: float = float("nan")
    detail: str = ""

    def line(self) -> str:
        if self.verdict is Verdict.CERTIFIED_OUTSIDE:
            parts = ["OUTSIDE"]
            if self.order is not None:
                parts.append(f"order=({','.join(map(str, self.order))})")
        else:
            parts = [self.verdict.name]
        if self.degree is not None:
            parts.append(f"degree={self.degree}")
        return " ".join(parts)


def verdict_from_search(res: CertificateResult) -> Verdict:
    if res.status is SearchStatus.CERTIFIED:
        return Verdict.CERTIFIED_OUTSIDE
    if res.status is SearchStatus.NO_CERT_AT_DEGREE:
        return Verdict.NO_CERT_AT_DEGREE
    if res.failed or res.lean is None:
        return Verdict.SOLVER_FAILURE
    return Verdict.NUMERICAL_FEASIBLE if res.lean == "feasible" else Verdict.NUMERICAL_INFEASIBLE


def _from_search(res: CertificateResult, method: Method) -> PointStatus:
    m = res.outcome.metrics
    return PointStatus(
        verdict_from_search(res),
        method,
        degree=2 * res.k,
        certificate=res.certificate,
        iterations=m.iterations,
        residual=float(res.report.residual) if res.report else m.residual,
        detail=m.message,
    )


def _lopsided_status(f: ComplexPoly, lam: Sequence[float], r: int) -> PointStatus:
    v = [math.log(x) for x in lam]
    res = purbhoo_membership(f, v, r)
    degree = 2 * r**f.n * f.total_degree()
    if not res.outside:
        return PointStatus(Verdict.NO_CERT_AT_DEGREE, Method.LOPSIDED if r == 1 else Method.PURBHOO, degree,
                           detail=f"not lopsided at r={r}")
    cert = None
    if r == 1:
        g = scale_substitute(f.to_float(), lam)
        cert, sys = explicit_certificate(g)
        rep = verify_certificate(cert, sys, tol=1e-8)
        if not rep.passed:  # cannot happen for a lopsided input; keep the guard honest
            return PointStatus(Verdict.NUMERICAL_FEASIBLE, Method.LOPSIDED, degree,
                               detail=f"explicit certificate residual {float(rep.residual):.3g}")
    return PointStatus(Verdict.CERTIFIED_OUTSIDE, Method.LOPSIDED if r == 1 else Method.PURBHOO, degree,
                       order=res.order, certificate=cert, residual=0.0)


def classify_point(
    fs: ComplexPoly | Sequence[ComplexPoly],
    point: Sequence[float],
    method: Method = Method.AUTO,
    budget: Budget = Budget(),
    cfg: SolverConfig | None = None,
    log_space: bool = False,
) -> PointStatus:
    """Classify ``point`` (unlog ``lambda``, or a log vector when ``log_space``)."""
    fs = [fs] if isinstance(fs, ComplexPoly) else list(fs)
    n = fs[0].n
    if len(point) != n:
        raise DimensionError(f"point has length {len(point)}, expected {n}")
    if log_space:
        lam = [math.exp(x) for x in point]
    else:
        if any(not (x > 0) for x in point):
            raise ValueError(f"unlog coordinates must be positive, got {tuple(point)}")
        lam = [float(x) for x in point]
    single = len(fs) == 1

    if method in (Method.LOPSIDED, Method.PURBHOO):
        if not single:
            raise ValueError("the lopsided path needs a single polynomial")
        r = 1 if method is Method.LOPSIDED else budget.r
        return _lopsided_status(fs[0], lam, r)

    if method is Method.AUTO and single:
        for r in range(1, budget.r + 1):
            st = _lopsided_status(fs[0], lam, r)
            if st.verdict is Verdict.CERTIFIED_OUTSIDE:
                return st

    if method is Method.SOS_MONOMIAL:
        if not single:
            raise ValueError("the monomial system needs a single polynomial")
        sys = monomial_generators(fs[0], lam, normalize=budget.normalize)
    else:
        sys = amoeba_generators(fs, lam, normalize=budget.normalize)
    used = Method.SOS_MONOMIAL if method is Method.SOS_MONOMIAL else Method.SOS_STANDARD
    return _from_search(search_certificate(sys, budget.t, budget.k, cfg), used)


def classify_coamoeba_point(
    fs: ComplexPoly | Sequence[ComplexPoly],
    mu: Sequence[float],
    budget: Budget = Budget(t=0, k=1),
    cfg: SolverConfig | None = None,
) -> PointStatus:
    """Certificate search for ``mu`` outside the closure-type coamoeba ``C'``."""
    fs = [fs] if isinstance(fs, ComplexPoly) else list(fs)
    sys = coamoeba_generators(fs, mu)
    return _from_search(search_certificate(sys, budget.t, budget.k, cfg), Method.SOS_STANDARD)
