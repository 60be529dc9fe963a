"""Sums-of-squares infeasibility certificates for real generator systems.

A certificate for generators ``g_1..g_s`` is a tuple of multipliers ``p_i``, a
PSD Gram matrix ``Q`` over a monomial vector ``M`` and a positive scale with

    scale * (sum_i p_i g_i + M^T Q M) + 1 == 0

identically.  Such an identity rules out a common real zero of the ``g_i``.
A search at budget ``(t, k)`` bounds each multiplier degree by ``t`` and the
Gram basis by degree ``k``.  Failing to find one only means that no certificate
exists within that budget; it never proves a real zero exists.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy import sparse

from .polycore import (
    ComplexPoly,
    DimensionError,
    Exponent,
    RealPoly,
    grlex_key,
    monomials_up_to,
    parse_real_poly,
    realify,
)
from .sdp import SdpOutcome, SdpProblem, SdpStatus, SolverConfig, solve_feasibility
from .systems import GeneratorSystem, SystemKind

DEFAULT_VERIFY_TOL = 1e-6
PSD_TOL = 1e-8


class BudgetError(ValueError):
    """Degree budget too small for the generator system."""


class TransferError(ValueError):
    pass


def _basis_key(e: Exponent):
    # ascending degree, descending lex inside a degree (matches monomials_up_to)
    return (sum(e), tuple(-x for x in e))


def _add_exp(a: Exponent, b: Exponent) -> Exponent:
    return tuple(x + y for x, y in zip(a, b))


# -- assembly -------------------------------------------------------------------------------


def min_half_degree(generators: Sequence[RealPoly]) -> int:
    return max(math.ceil(g.total_degree() / 2) for g in generators)


def default_half_degree(generators: Sequence[RealPoly], t: int) -> int:
    return math.ceil((t + max(g.total_degree() for g in generators)) / 2)


def multiplier_degree(g: RealPoly, t: int, k: int) -> int | None:
    """Degree cap for the multiplier of ``g``; ``None`` for the zero generator."""
    if g.is_zero():
        return None
    return min(t, 2 * k - g.total_degree())


@dataclass(frozen=True)
class SosProgram:
    problem: SdpProblem
    gram_basis: tuple[Exponent, ...]
    multiplier_bases: tuple[tuple[Exponent, ...], ...]
    t: int
    k: int
    generators: tuple[RealPoly, ...]

    @property
    def declared_degree(self) -> tuple[int, int]:
        return (self.t, 2 * self.k)


def assemble_sdp(sys: GeneratorSystem, t: int, k: int | None = None) -> SosProgram:
    gens = tuple(g.to_float() for g in sys.generators)
    N = sys.nvars
    if t < 0:
        raise BudgetError("multiplier degree must be >= 0")
    k0 = min_half_degree(gens)
    if k is None:
        k = default_half_degree(gens, t)
    if k < k0:
        raise BudgetError(f"half-degree {k} below the minimum {k0} for this system")

    basis = monomials_up_to(N, k)
    mbases = []
    for g in gens:
        d = multiplier_degree(g, t, k)
        mbases.append(tuple(monomials_up_to(N, d)) if d is not None else ())

    rows: dict[Exponent, int] = {(0,) * N: 0}

    def row(e):
        if e not in rows:
            rows[e] = len(rows)
        return rows[e]

    m = len(basis)
    a_r, a_c = [], []
    for i in range(m):
        for j in range(i, m):
            r = row(_add_exp(basis[i], basis[j]))
            a_r.append(r)
            a_c.append(i * m + j)
            if i != j:
                a_r.append(r)
                a_c.append(j * m + i)
    b_r, b_c, b_v = [], [], []
    col = 0
    for g, mb in zip(gens, mbases):
        for beta in mb:
            for alpha, c in g.terms.items():
                b_r.append(row(_add_exp(alpha, beta)))
                b_c.append(col)
                b_v.append(float(c))
            col += 1
    K = len(rows)
    A = sparse.csr_matrix((np.ones(len(a_r)), (a_r, a_c)), shape=(K, m * m))
    B = sparse.csr_matrix((b_v, (b_r, b_c)), shape=(K, col))
    c = np.zeros(K)
    c[0] = 1.0
    labels = tuple(sorted(rows, key=rows.get))
    problem = SdpProblem(m, col, A, B, c, labels)
    return SosProgram(problem, tuple(basis), tuple(mbases), t, k, gens)


# -- certificates ---------------------------------------------------------------------------


@dataclass
class Certificate:
    multipliers: tuple[RealPoly, ...]
    gram_basis: tuple[Exponent, ...]
    gram: np.ndarray
    scale: float | Fraction = 1.0
    declared_degree: tuple[int, int] = (0, 0)
    generators: tuple[RealPoly, ...] | None = None

    @property
    def nvars(self) -> int:
        return self.multipliers[0].n

    @property
    def exact(self) -> bool:
        return self.gram.dtype == object

    def sos_part(self) -> RealPoly:
        N = self.nvars
        acc: dict[Exponent, object] = {}
        for i, ei in enumerate(self.gram_basis):
            for j, ej in enumerate(self.gram_basis):
                q = self.gram[i, j]
                if q != 0:
                    e = _add_exp(ei, ej)
                    acc[e] = acc.get(e, 0) + q
        return RealPoly(N, acc, exact=self.exact)

    def total_degree(self) -> int:
        gens = self.generators or ()
        d = 2 * max((sum(e) for e in self.gram_basis), default=0)
        for p, g in zip(self.multipliers, gens):
            if not p.is_zero() and not g.is_zero():
                d = max(d, p.total_degree() + g.total_degree())
        return d

    def embed(self, k: int, t: int | None = None) -> Certificate:
        """Same certificate expressed over the Gram basis of all monomials up to ``k``."""
        basis = monomials_up_to(self.nvars, k)
        index = {e: i for i, e in enumerate(basis)}
        missing = [e for e in self.gram_basis if e not in index]
        if missing:
            raise BudgetError(f"basis monomials {missing[:3]} exceed degree {k}")
        Q = np.zeros((len(basis), len(basis)), dtype=self.gram.dtype)
        if self.exact:
            Q[:] = Fraction(0)
        pos = [index[e] for e in self.gram_basis]
        Q[np.ix_(pos, pos)] = self.gram
        t_new = self.declared_degree[0] if t is None else t
        return replace(self, gram_basis=tuple(basis), gram=Q, declared_degree=(t_new, 2 * k))


@dataclass(frozen=True)
class VerificationReport:
    residual: float | Fraction
    min_eigenvalue: float
    tol: float
    passed: bool


def gram_from_squares(squares: Sequence[tuple[object, RealPoly]], nvars: int, exact: bool = False):
    """Gram basis and matrix for ``sum_l w_l * q_l^2`` (weights must be >= 0)."""
    support = set()
    for _, q in squares:
        support.update(q.terms)
    basis = sorted(support, key=_basis_key)
    index = {e: i for i, e in enumerate(basis)}
    m = len(basis)
    if exact:
        Q = np.empty((m, m), dtype=object)
        Q[:] = Fraction(0)
    else:
        Q = np.zeros((m, m))
    for w, q in squares:
        if w < 0:
            raise ValueError("negative square weight")
        v = [(index[e], c) for e, c in q.terms.items()]
        for i, ci in v:
            for j, cj in v:
                Q[i, j] = Q[i, j] + w * ci * cj
    return tuple(basis), Q


def identity_polynomial(cert: Certificate, generators: Sequence[RealPoly]) -> dict[Exponent, object]:
    """Coefficients of ``scale*(sum p_i g_i + M^T Q M) + 1`` with no pruning."""
    acc: dict[Exponent, object] = {}
    for p, g in zip(cert.multipliers, generators):
        for a, ca in p.terms.items():
            for b, cb in g.terms.items():
                e = _add_exp(a, b)
                acc[e] = acc.get(e, 0) + ca * cb
    basis = cert.gram_basis
    for i, ei in enumerate(basis):
        for j, ej in enumerate(basis):
            q = cert.gram[i, j]
            if q != 0:
                e = _add_exp(ei, ej)
                acc[e] = acc.get(e, 0) + q
    out = {e: cert.scale * v for e, v in acc.items()}
    zero = (0,) * cert.nvars
    out[zero] = out.get(zero, 0) + 1
    return out


def verify_certificate(
    cert: Certificate,
    sys: GeneratorSystem | Sequence[RealPoly] | None = None,
    tol: float = DEFAULT_VERIFY_TOL,
    psd_tol: float = PSD_TOL,
) -> VerificationReport:
    if sys is None:
        gens = cert.generators
        if gens is None:
            raise ValueError("certificate carries no generators; pass the system")
    else:
        gens = sys.generators if isinstance(sys, GeneratorSystem) else tuple(sys)
    if len(gens) != len(cert.multipliers):
        raise DimensionError(f"{len(cert.multipliers)} multipliers for {len(gens)} generators")
    N = gens[0].n
    if any(g.n != N for g in gens) or any(p.n != N for p in cert.multipliers):
        raise DimensionError("variable counts differ between certificate and system")
    if any(len(e) != N for e in cert.gram_basis) or cert.gram.shape != (len(cert.gram_basis),) * 2:
        raise DimensionError("Gram basis does not match the matrix or the variable count")
    if not cert.scale > 0:
        raise ValueError("scale must be positive")

    coeffs = identity_polynomial(cert, gens)
    residual = max((abs(v) for v in coeffs.values()), default=0)
    Qf = np.asarray(cert.gram, dtype=float)
    asym = float(np.abs(Qf - Qf.T).max()) if Qf.size else 0.0
    min_eig = float(np.linalg.eigvalsh((Qf + Qf.T) / 2).min()) if Qf.size else 0.0
    passed = residual <= tol and min_eig >= -psd_tol and asym <= 1e-12
    return VerificationReport(residual, min_eig, tol, bool(passed))


def sos_decomposition(cert: Certificate, cutoff: float = PSD_TOL) -> list[tuple[float, RealPoly]]:
    """Weighted squares ``(w, q)`` with ``M^T Q M ~ sum w q^2`` from an eigen-decomposition."""
    Qf = np.asarray(cert.gram, dtype=float)
    w, V = np.linalg.eigh((Qf + Qf.T) / 2)
    out = []
    for lam, v in zip(w[::-1], V.T[::-1]):
        if lam <= cutoff:
            break
        q = RealPoly(cert.nvars, {e: float(x) for e, x in zip(cert.gram_basis, v)})
        out.append((float(lam), q))
    return out


# -- search ---------------------------------------------------------------------------------


class SearchStatus(enum.Enum):
    CERTIFIED = "certified"
    NO_CERT_AT_DEGREE = "no-cert-at-degree"
    NUMERICAL = "numerical"


@dataclass
class CertificateResult:
    status: SearchStatus
    certificate: Certificate | None
    t: int
    k: int
    outcome: SdpOutcome
    report: VerificationReport | None = None

    @property
    def lean(self) -> str | None:
        if self.status is not SearchStatus.NUMERICAL:
            return None
        return self.outcome.metrics.lean or ("feasible" if self.outcome.status is SdpStatus.FEASIBLE else None)

    @property
    def failed(self) -> bool:
        return self.outcome.metrics.failure


def certificate_from_solution(prog: SosProgram, Q: np.ndarray, u: np.ndarray) -> Certificate:
    N = len(prog.gram_basis[0])
    mults = []
    pos = 0
    for mb in prog.multiplier_bases:
        mults.append(RealPoly(N, {e: float(u[pos + i]) for i, e in enumerate(mb)}))
        pos += len(mb)
    Q = 0.5 * (np.asarray(Q) + np.asarray(Q).T)
    return Certificate(tuple(mults), prog.gram_basis, Q, 1.0, prog.declared_degree, prog.generators)


def search_certificate(
    sys: GeneratorSystem,
    t: int,
    k: int | None = None,
    cfg: SolverConfig | None = None,
    tol_verify: float = DEFAULT_VERIFY_TOL,
) -> CertificateResult:
    prog = assemble_sdp(sys, t, k)
    out = solve_feasibility(prog.problem, cfg)
    if out.status is SdpStatus.INFEASIBLE:
        return CertificateResult(SearchStatus.NO_CERT_AT_DEGREE, None, prog.t, prog.k, out)
    if out.status is SdpStatus.FEASIBLE:
        cert = certificate_from_solution(prog, out.Q, out.u)
        rep = verify_certificate(cert, prog.generators, tol=tol_verify)
        if rep.passed:
            return CertificateResult(SearchStatus.CERTIFIED, cert, prog.t, prog.k, out, rep)
        out.metrics.lean = "feasible"
        out.metrics.message = f"post-hoc verification failed (residual {float(rep.residual):.3g})"
        return CertificateResult(SearchStatus.NUMERICAL, None, prog.t, prog.k, out, rep)
    return CertificateResult(SearchStatus.NUMERICAL, None, prog.t, prog.k, out)


# -- transfer along monomial maps ------------------------------------------------------------


def _monomial_images(gamma: Sequence[Sequence[int]], exact: bool) -> list[RealPoly]:
    N = len(gamma[0])
    res, ims = [], []
    one = Fraction(1) if exact else 1.0
    for col in gamma:
        re_, im_ = realify(ComplexPoly(N, {tuple(col): one}, exact=exact))
        res.append(re_)
        ims.append(im_)
    return res + ims


def _transform_gram(cert: Certificate, images: list[RealPoly]):
    pulled = [RealPoly(cert.nvars, {e: 1.0}).compose(images) for e in cert.gram_basis]
    support = set()
    for p in pulled:
        support.update(p.terms)
    basis = sorted(support, key=_basis_key)
    index = {e: i for i, e in enumerate(basis)}
    T = np.zeros((len(pulled), len(basis)))
    for a, p in enumerate(pulled):
        for e, c in p.terms.items():
            T[a, index[e]] = c
    Q = np.asarray(cert.gram, dtype=float)
    return tuple(basis), T.T @ Q @ T


def transfer_certificate(
    cert: Certificate,
    base: GeneratorSystem,
    gamma: Sequence[Sequence[int]],
    lam: Sequence[float] | None = None,
    tol: float = DEFAULT_VERIFY_TOL,
) -> tuple[Certificate, GeneratorSystem]:
    """Pull a certificate back along ``z_i = P^gamma[i]``.

    Without ``lam`` the target is the pulled-back system (each generator
    composed with the map).  With ``lam`` the base must be an unnormalized
    standard system at ``rho = lam^gamma`` and the target is the standard
    system of the pulled-back polynomials at ``lam``; the circle multipliers
    are rewritten by telescoping ``prod a - prod b``.
    """
    rep = verify_certificate(cert, base, tol=tol)
    if not rep.passed:
        raise TransferError(f"certificate does not verify against the base system (residual {float(rep.residual):.3g})")
    gamma = [tuple(int(x) for x in col) for col in gamma]
    n = base.nvars // 2
    if len(gamma) != n:
        raise DimensionError(f"map has {len(gamma)} columns, system has {n} complex variables")
    if np.linalg.matrix_rank(np.array(gamma, dtype=float)) < n:
        raise TransferError("map columns are linearly dependent")
    N = len(gamma[0])
    D = max(sum(col) for col in gamma)
    images = _monomial_images(gamma, exact=False)
    mults = [p.to_float().compose(images) for p in cert.multipliers]
    gens = [g.to_float().compose(images) for g in base.generators]
    basis, Q = _transform_gram(cert, images)
    degree = (cert.declared_degree[0] * D, cert.declared_degree[1] * D)

    if lam is None:
        target = GeneratorSystem(base.kind, tuple(gens), base.point, base.normalized, {"pullback": gamma})
        out = Certificate(tuple(mults), basis, Q, cert.scale, degree, target.generators)
        return out, target

    if base.kind is not SystemKind.AMOEBA_STANDARD or base.normalized:
        raise TransferError("standard-system transfer needs an unnormalized standard base system")
    lam = [float(x) for x in lam]
    if len(lam) != N:
        raise DimensionError(f"lam has length {len(lam)}, expected {N}")
    rho = [math.prod(l**a for l, a in zip(lam, col)) for col in gamma]
    if not np.allclose(rho, [float(x) for x in base.point], rtol=1e-12, atol=0):
        raise TransferError(f"lam^gamma = {rho} does not match the base point {base.point}")

    nf = len(gens) - n
    mod_sq = [RealPoly(2 * N, {_unit_sq(N, j, 0): 1.0, _unit_sq(N, j, 1): 1.0}) for j in range(N)]
    new_mults = list(mults[:nf]) + [RealPoly(2 * N, {}) for _ in range(N)]
    for i, col in enumerate(gamma):
        factors = [j for j in range(N) for _ in range(col[j])]
        p = mults[nf + i]
        for l, j in enumerate(factors):
            coeff = p * math.prod(lam[jj] ** 2 for jj in factors[:l])
            for jj in factors[l + 1 :]:
                coeff = coeff * mod_sq[jj]
            new_mults[nf + j] = new_mults[nf + j] + coeff
    circles = [mod_sq[j] - lam[j] ** 2 for j in range(N)]
    target = GeneratorSystem(
        SystemKind.AMOEBA_STANDARD, tuple(gens[:nf]) + tuple(circles), tuple(lam), False, {"pullback": gamma}
    )
    return Certificate(tuple(new_mults), basis, Q, cert.scale, degree, target.generators), target


def _unit_sq(N: int, j: int, part: int) -> Exponent:
    e = [0] * (2 * N)
    e[j + part * N] = 2
    return tuple(e)


# -- text format ----------------------------------------------------------------------------


def _num(x) -> str:
    return str(x) if isinstance(x, Fraction) else repr(float(x))


def dump_certificate(cert: Certificate) -> str:
    N = cert.nvars
    lines = [
        f"certificate nvars {N} multipliers {len(cert.multipliers)} exact {int(cert.exact)}",
        f"degree {cert.declared_degree[0]} {cert.declared_degree[1]}",
    ]
    lines += [f"multiplier {p.to_text()}" for p in cert.multipliers]
    lines.append(f"basis {len(cert.gram_basis)}")
    lines += [" ".join(map(str, e)) for e in cert.gram_basis]
    lines.append("gram")
    for i in range(len(cert.gram_basis)):
        lines.append(" ".join(_num(cert.gram[i, j]) for j in range(i + 1)))
    lines.append(f"scale {_num(cert.scale)}")
    return "\n".join(lines) + "\n"


def load_certificate(text: str) -> Certificate:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    head = lines[0].split()
    N, count, exact = int(head[2]), int(head[4]), bool(int(head[6]))
    conv = Fraction if exact else float
    deg = tuple(int(x) for x in lines[1].split()[1:3])
    pos = 2
    mults = []
    for _ in range(count):
        body = lines[pos][len("multiplier "):]
        mults.append(parse_real_poly(body, N // 2, exact=exact))
        pos += 1
    m = int(lines[pos].split()[1])
    pos += 1
    basis = tuple(tuple(int(x) for x in lines[pos + i].split()) for i in range(m))
    pos += m + 1
    Q = np.empty((m, m), dtype=object) if exact else np.zeros((m, m))
    for i in range(m):
        vals = [conv(x) for x in lines[pos + i].split()]
        for j, v in enumerate(vals):
            Q[i, j] = Q[j, i] = v
    pos += m
    scale = conv(lines[pos].split()[1])
    return Certificate(tuple(mults), basis, Q, scale, deg)


def save_certificate(cert: Certificate, path: str | Path) -> None:
    Path(path).write_text(dump_certificate(cert))


def read_certificate(path: str | Path) -> Certificate:
    return load_certificate(Path(path).read_text())
