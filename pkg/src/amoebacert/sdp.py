"""Small dense semidefinite feasibility solver.

The feasibility problem is

    find Q >= 0 (m x m, symmetric), u free
    with <A_t, Q> + <b_t, u> + c_t = 0 for every constraint t.

It is solved by a primal-dual interior point method (HKM direction with a
Mehrotra corrector) on the margin problem

    maximize  lam   s.t.  Q - lam*I >= 0,  linear constraints,  tr(Q) <= R,

after the free variables have been projected out.  Both the margin problem
and its dual are strictly feasible, so the iteration is well posed whether or
not the original system has a solution.  The optimal margin lam* decides the
outcome: a Gram matrix with nonnegative spectrum (recovered and re-checked from
scratch) means FEASIBLE; a dual bound lam* < -threshold means INFEASIBLE;
anything in between is reported as NUMERICAL.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np
import scipy.linalg as sla
from scipy import sparse

log = logging.getLogger(__name__)


class SdpStatus(enum.Enum):
    FEASIBLE = "feasible"
    INFEASIBLE = "infeasible"
    NUMERICAL = "numerical"


@dataclass(frozen=True)
class SolverConfig:
    eps_feas: float = 1e-7
    eps_psd: float = 1e-8
    infeas_threshold: float = 1e-7
    max_iterations: int = 200
    # bound on tr(Q) in the margin problem; certificates with a larger trace are missed
    trace_bound: float = 1e3
    # INFEASIBLE needs a dual bound valid up to this trace; the bound is raised until it is
    trace_bound_max: float = 1e6
    gap_tol: float = 1e-11
    # alternating-projection polish when the optimal margin is within this of zero
    polish_window: float = 1e-5
    polish_iterations: int = 500

    def __post_init__(self):
        for name in ("eps_feas", "eps_psd", "infeas_threshold", "trace_bound", "gap_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.trace_bound_max < self.trace_bound:
            raise ValueError("trace_bound_max must be >= trace_bound")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")


@dataclass(frozen=True)
class SdpProblem:
    """Affine constraints ``<A_t, Q> + <B_t, u> + c_t = 0`` on a Gram matrix ``Q``.

    ``A`` is a sparse ``K x m^2`` matrix whose row ``t`` is ``vec(A_t)`` for a
    symmetric ``A_t``; ``B`` is ``K x p``; ``c`` has length ``K``.
    """

    gram_size: int
    free_count: int
    A: sparse.csr_matrix
    B: sparse.csr_matrix
    c: np.ndarray
    labels: tuple = ()

    def __post_init__(self):
        K = len(self.c)
        m, p = self.gram_size, self.free_count
        if K < 1:
            raise ValueError("need at least one constraint")
        if self.A.shape != (K, m * m) or self.B.shape != (K, p):
            raise ValueError(f"shape mismatch: A {self.A.shape}, B {self.B.shape}, K={K}, m={m}, p={p}")
        for name, arr in (("A", self.A.data), ("B", self.B.data), ("c", self.c)):
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"non-finite data in {name}")
        perm = np.arange(m * m).reshape(m, m).T.ravel()
        if m and abs(self.A - self.A[:, perm]).max() > 0:
            raise ValueError("constraint matrices must be symmetric")

    @property
    def constraint_count(self) -> int:
        return len(self.c)

    @classmethod
    def from_dense(cls, A_list: Sequence[np.ndarray], B: np.ndarray | None, c: Sequence[float], labels=()):
        A_list = [np.asarray(a, dtype=float) for a in A_list]
        m = A_list[0].shape[0] if A_list else 0
        K = len(c)
        A = sparse.csr_matrix(np.array([a.ravel() for a in A_list]).reshape(K, m * m))
        Bm = sparse.csr_matrix(np.zeros((K, 0)) if B is None else np.asarray(B, dtype=float).reshape(K, -1))
        return cls(m, Bm.shape[1], A, Bm, np.asarray(c, dtype=float), tuple(labels))

    def residual(self, Q: np.ndarray, u: np.ndarray) -> np.ndarray:
        return self.A @ np.asarray(Q).ravel() + self.B @ np.asarray(u) + self.c

    def scaled(self, factor: float) -> SdpProblem:
        return replace(self, A=self.A * factor, B=self.B * factor, c=self.c * factor)


@dataclass
class SolveMetrics:
    iterations: int = 0
    residual: float = float("nan")
    min_eigenvalue: float = float("nan")
    margin: float = float("nan")  # best primal estimate of max min-eigenvalue
    margin_bound: float = float("inf")  # dual upper bound on the margin
    lean: str | None = None  # "feasible" / "infeasible" for NUMERICAL outcomes
    trace_reach: float = float("inf")  # INFEASIBLE: no solution with tr(Q) below this
    failure: bool = False
    message: str = ""


@dataclass
class SdpOutcome:
    status: SdpStatus
    Q: np.ndarray | None = None
    u: np.ndarray | None = None
    metrics: SolveMetrics = field(default_factory=SolveMetrics)


def check_solution(p: SdpProblem, Q: np.ndarray, u: np.ndarray, cfg: SolverConfig) -> tuple[bool, float, float]:
    """Independent re-check of a candidate ``(Q, u)``: (ok, max residual, min eigenvalue)."""
    Q = np.asarray(Q, dtype=float)
    res = float(np.max(np.abs(p.residual(Q, u)))) if p.constraint_count else 0.0
    min_eig = float(np.linalg.eigvalsh((Q + Q.T) / 2).min()) if Q.size else 0.0
    ok = bool(np.allclose(Q, Q.T, atol=1e-12, rtol=0)) and res <= cfg.eps_feas and min_eig >= -cfg.eps_psd
    return ok, res, min_eig


# -- symmetric vectorisation ------------------------------------------------------------


class _Svec:
    def __init__(self, m: int):
        self.m = m
        self.iu = np.triu_indices(m)
        self.w = np.where(self.iu[0] == self.iu[1], 1.0, np.sqrt(2.0))
        self.size = len(self.w)

    def vec(self, Q: np.ndarray) -> np.ndarray:
        return Q[self.iu] * self.w

    def mat(self, v: np.ndarray) -> np.ndarray:
        """Inverse of :meth:`vec`; accepts a trailing-axis batch."""
        v = np.asarray(v)
        out = np.zeros(v.shape[:-1] + (self.m, self.m))
        vals = v / self.w
        out[..., self.iu[0], self.iu[1]] = vals
        out[..., self.iu[1], self.iu[0]] = vals
        return out


def _full_to_svec(A: sparse.csr_matrix, m: int) -> np.ndarray:
    sv = _Svec(m)
    index = -np.ones((m, m), dtype=int)
    index[sv.iu] = np.arange(sv.size)
    index = np.maximum(index, index.T)
    coo = A.tocoo()
    i, j = np.divmod(coo.col, m)
    scale = np.where(i == j, 1.0, 1.0 / np.sqrt(2.0))
    out = np.zeros((A.shape[0], sv.size))
    np.add.at(out, (coo.row, index[i, j]), coo.data * scale)
    return out


# -- public entry point ----------------------------------------------------------------


def solve_feasibility(p: SdpProblem, cfg: SolverConfig | None = None) -> SdpOutcome:
    """Three-way feasibility decision for ``p``.

    The margin problem bounds ``tr(Q)``.  An infeasibility verdict whose dual
    bound only covers traces up to some ``R* < trace_bound_max`` is not
    trusted; the solve is repeated with a larger bound.
    """
    cfg = cfg or SolverConfig()
    try:
        R = cfg.trace_bound
        while True:
            out = _solve(p, replace(cfg, trace_bound=R))
            reach = out.metrics.trace_reach
            if out.status is not SdpStatus.INFEASIBLE or reach >= cfg.trace_bound_max or R >= cfg.trace_bound_max:
                return out
            log.debug("infeasible only up to trace %.3g; retrying", reach)
            R = min(cfg.trace_bound_max, max(100.0 * R, 10.0 * reach))
    except (np.linalg.LinAlgError, sla.LinAlgError, FloatingPointError, ValueError) as exc:
        if isinstance(exc, ValueError) and "non-finite" in str(exc):
            raise
        log.debug("solver failure: %s", exc)
        return SdpOutcome(SdpStatus.NUMERICAL, metrics=SolveMetrics(failure=True, message=str(exc)))


def _infeasible(msg: str, bound: float = -np.inf, iterations: int = 0) -> SdpOutcome:
    return SdpOutcome(SdpStatus.INFEASIBLE, metrics=SolveMetrics(iterations=iterations, margin_bound=bound, message=msg))


def _solve(p: SdpProblem, cfg: SolverConfig) -> SdpOutcome:
    m = p.gram_size
    K = p.constraint_count
    Asv = _full_to_svec(p.A, m)
    B = p.B.toarray()
    c = np.asarray(p.c, dtype=float)
    sv_full = _Svec(m)

    keep, reason = _presolve(Asv, B, c, m)
    if reason:
        return _infeasible(reason)

    sv = _Svec(len(keep))
    cols = _svec_columns(sv_full, keep, m)
    A_red = Asv[:, cols]

    if B.shape[1]:
        W = sla.null_space(B.T)
        A2, b2 = W.T @ A_red, -(W.T @ c)
    else:
        A2, b2 = A_red, -c

    # orthonormal rows for the remaining constraints on Q
    if A2.shape[0] and A2.shape[1]:
        U, sig, Vt = np.linalg.svd(A2, full_matrices=False)
        rank = int(np.sum(sig > max(A2.shape) * np.finfo(float).eps * sig[0])) if sig.size and sig[0] > 0 else 0
    else:
        U, sig, Vt, rank = np.zeros((A2.shape[0], 0)), np.zeros(0), np.zeros((0, A2.shape[1])), 0
    U_r = U[:, :rank]
    inconsistency = float(np.linalg.norm(b2 - U_r @ (U_r.T @ b2))) if b2.size else 0.0
    if inconsistency > 1e-7 * (1.0 + float(np.linalg.norm(b2))):
        return _infeasible(f"linear constraints inconsistent (residual {inconsistency:.3g})")
    A3 = Vt[:rank]
    b3 = (U_r.T @ b2) / sig[:rank]

    def recover(q_red: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        if rank:
            q_red = q_red + A3.T @ (b3 - A3 @ q_red)
        Q = np.zeros((m, m))
        if len(keep):
            Q[np.ix_(keep, keep)] = sv.mat(q_red)
        rhs = -(c + Asv @ sv_full.vec(Q))
        u = np.linalg.lstsq(B, rhs, rcond=None)[0] if B.shape[1] else np.zeros(0)
        return Q, u

    if len(keep) == 0 or rank == 0:
        Q, u = recover(np.zeros(sv.size))
        ok, res, me = check_solution(p, Q, u, cfg)
        metrics = SolveMetrics(residual=res, min_eigenvalue=me, margin=np.inf if len(keep) else 0.0)
        if ok:
            return SdpOutcome(SdpStatus.FEASIBLE, Q, u, metrics)
        metrics.lean = "feasible"
        return SdpOutcome(SdpStatus.NUMERICAL, metrics=metrics)

    return _margin_ipm(p, cfg, A3, b3, sv, recover)


def _presolve(Asv: np.ndarray, B: np.ndarray, c: np.ndarray, m: int) -> tuple[list[int], str]:
    """Drop Gram indices whose diagonal is forced to zero.

    A constraint that involves no free variable and a single diagonal entry
    ``Q_ii`` pins that entry; pinned to zero it forces row/column ``i`` of a PSD
    matrix to vanish, pinned negative it proves infeasibility.
    """
    sv = _Svec(m)
    diag_col = {int(k): int(sv.iu[0][k]) for k in range(sv.size) if sv.iu[0][k] == sv.iu[1][k]}
    free_rows = ~np.any(B != 0, axis=1) if B.shape[1] else np.ones(len(c), dtype=bool)
    alive = np.ones(sv.size, dtype=bool)
    removed: set[int] = set()
    changed = True
    while changed:
        changed = False
        for t in np.flatnonzero(free_rows):
            nz = np.flatnonzero((Asv[t] != 0) & alive)
            if len(nz) == 0:
                if c[t] != 0:
                    return [], f"constraint {t} reads 0 = {-c[t]:g}"
                continue
            if len(nz) == 1 and int(nz[0]) in diag_col:
                i = diag_col[int(nz[0])]
                value = -c[t] / Asv[t, nz[0]]
                if value < 0:
                    return [], f"constraint {t} forces Q[{i},{i}] = {value:g} < 0"
                if value == 0 and i not in removed:
                    removed.add(i)
                    alive &= (sv.iu[0] != i) & (sv.iu[1] != i)
                    changed = True
    return [i for i in range(m) if i not in removed], ""


def _svec_columns(sv_full: _Svec, keep: list[int], m: int) -> np.ndarray:
    index = -np.ones((m, m), dtype=int)
    index[sv_full.iu] = np.arange(sv_full.size)
    k = np.asarray(keep, dtype=int)
    iu = np.triu_indices(len(k))
    return index[k[iu[0]], k[iu[1]]]


def _max_step(X: np.ndarray, dX: np.ndarray) -> float:
    L = np.linalg.cholesky(X)
    Li = sla.solve_triangular(L, np.eye(len(X)), lower=True)
    lam_min = float(np.linalg.eigvalsh(Li @ dX @ Li.T).min())
    return np.inf if lam_min >= 0 else -1.0 / lam_min


def _hkm_step(X, y, Z, At, Af, rp, Rd, mu):
    """One HKM predictor-corrector step; returns the new iterate and step lengths."""
    K, n = At.shape[0], X.shape[0]
    I = np.eye(n)
    Zi = sla.cho_solve((np.linalg.cholesky(Z), True), I)
    G = np.matmul(np.matmul(X, At), Zi)
    M = Af @ G.reshape(K, n * n).T
    M = 0.5 * (M + M.T)
    try:
        Mf = sla.cho_factor(M)
        solve_m = lambda r: sla.cho_solve(Mf, r)  # noqa: E731
    except sla.LinAlgError:
        Mp = np.linalg.pinv(M, rcond=1e-14)
        solve_m = lambda r: Mp @ r  # noqa: E731
    base = rp + Af @ (X @ Rd @ Zi).ravel()

    def direction(Rc):
        dy = solve_m(base - Af @ Rc.ravel())
        dZ = Rd - (dy @ Af).reshape(n, n)
        dZ = 0.5 * (dZ + dZ.T)
        dX = Rc - X @ dZ @ Zi
        return 0.5 * (dX + dX.T), dy, dZ

    dX, dy, dZ = direction(-X)
    ap = min(1.0, _max_step(X, dX))
    ad = min(1.0, _max_step(Z, dZ))
    mu_aff = float(np.sum((X + ap * dX) * (Z + ad * dZ))) / n
    sigma = min(1.0, max(0.0, (mu_aff / mu) ** 3)) if mu > 0 else 0.0
    dX, dy, dZ = direction(sigma * mu * Zi - X - dX @ dZ @ Zi)
    ap = min(1.0, 0.95 * _max_step(X, dX))
    ad = min(1.0, 0.95 * _max_step(Z, dZ))
    X = X + ap * dX
    Z = Z + ad * dZ
    X, Z = 0.5 * (X + X.T), 0.5 * (Z + Z.T)
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(Z))):
        raise FloatingPointError("non-finite iterate")
    return X, y + ad * dy, Z, ap, ad


def _alternating_projection(q, A3, b3, sv: _Svec, cfg: SolverConfig):
    for _ in range(cfg.polish_iterations):
        q = q + A3.T @ (b3 - A3 @ q)
        w, V = np.linalg.eigh(sv.mat(q))
        if w[0] >= -0.5 * cfg.eps_psd:
            break
        q = sv.vec((V * np.maximum(w, 0.0)) @ V.T)
    return q


def _margin_ipm(p: SdpProblem, cfg: SolverConfig, A3: np.ndarray, b3: np.ndarray, sv: _Svec, recover) -> SdpOutcome:
    mp = sv.m
    n = mp + 1
    K = len(b3)
    R = cfg.trace_bound
    # X = blockdiag(Q - lam*I, slack) with lam eliminated through the trace row
    a = A3 @ sv.vec(np.eye(mp))
    At = np.zeros((K, n, n))
    At[:, :mp, :mp] = sv.mat(A3) - (a / mp)[:, None, None] * np.eye(mp)
    At[:, mp, mp] = -a / mp
    Af = At.reshape(K, n * n)
    b = b3 - R * a / mp
    I = np.eye(n)

    X = I * max(1.0, R / n)
    y = np.zeros(K)
    Z = I.copy()
    metrics = SolveMetrics()
    best_margin, best_bound = -np.inf, np.inf
    stall, prev_mu = 0, np.inf
    breakdown = False
    best_X = best_y = None

    def reach(yb):
        # the bound at trace R' is (R' * slope - b3.y) / mp for the same dual point
        slope = 1.0 + float(a @ yb) / mp
        top = float(b3 @ yb) - mp * cfg.infeas_threshold
        return np.inf if slope <= 0 else top / slope

    def try_recover(Xc):
        S = Xc[:mp, :mp]
        lam = (R - np.trace(S) - Xc[mp, mp]) / mp
        Q, u = recover(sv.vec(S + lam * np.eye(mp)))
        ok, res, me = check_solution(p, Q, u, cfg)
        return Q, u, ok, res, me, lam

    for it in range(1, cfg.max_iterations + 1):
        metrics.iterations = it
        rp = b - Af @ X.ravel()
        Rd = I - (y @ Af).reshape(n, n) - Z
        mu = float(np.sum(X * Z)) / n
        pobj, dobj = float(np.trace(X)), float(b @ y)
        dual_ok = float(np.abs(Rd).max()) <= 1e-9
        if dual_ok and (R - dobj) / mp < best_bound:
            best_bound, best_y = (R - dobj) / mp, y
        if best_bound < -cfg.infeas_threshold:
            metrics.margin_bound = best_bound
            metrics.margin = max(best_margin, (R - pobj) / mp)
            metrics.trace_reach = reach(best_y)
            metrics.message = "dual bound below threshold"
            return SdpOutcome(SdpStatus.INFEASIBLE, metrics=metrics)

        Q, u, ok, res, me, lam = try_recover(X)
        pinf = float(np.linalg.norm(rp)) / (1.0 + float(np.linalg.norm(b)))
        if pinf < 1e-8 and lam > best_margin:
            best_margin, best_X = lam, X
        if ok:
            metrics.residual, metrics.min_eigenvalue = res, me
            metrics.margin, metrics.margin_bound = max(lam, me), best_bound
            return SdpOutcome(SdpStatus.FEASIBLE, Q, u, metrics)

        gap = (pobj - dobj) / mp
        if pinf < 1e-10 and dual_ok and gap < cfg.gap_tol:
            metrics.message = "converged to the boundary"
            break
        stall = stall + 1 if mu > 0.9 * prev_mu else 0
        if stall >= 8:
            metrics.message = "stalled"
            break
        prev_mu = mu
        try:
            X, y, Z, ap, ad = _hkm_step(X, y, Z, At, Af, rp, Rd, mu)
        except (np.linalg.LinAlgError, sla.LinAlgError, FloatingPointError) as exc:
            metrics.message = f"breakdown: {exc}"
            breakdown = True
            break
        log.debug("it=%d mu=%.3e pinf=%.2e gap=%.3e bound=%.4g ap=%.3f ad=%.3f", it, mu, pinf, gap, best_bound, ap, ad)
    else:
        metrics.message = "iteration limit"

    Q, u, ok, res, me, lam = try_recover(X)
    metrics.residual, metrics.min_eigenvalue = res, me
    metrics.margin = max(best_margin, lam) if pinf < 1e-8 else best_margin
    metrics.margin_bound = best_bound
    if ok:
        return SdpOutcome(SdpStatus.FEASIBLE, Q, u, metrics)
    if best_X is not None and best_margin > -cfg.polish_window and best_bound > -cfg.infeas_threshold:
        # margin near zero: the feasible set may have empty interior
        S = best_X[:mp, :mp]
        q = sv.vec(S + best_margin * np.eye(mp))
        Q, u = recover(_alternating_projection(q, A3, b3, sv, cfg))
        ok, res, me = check_solution(p, Q, u, cfg)
        if ok:
            metrics.residual, metrics.min_eigenvalue = res, me
            metrics.message = "accepted after alternating projections"
            return SdpOutcome(SdpStatus.FEASIBLE, Q, u, metrics)
    if best_bound < -cfg.infeas_threshold:
        metrics.trace_reach = reach(best_y)
        return SdpOutcome(SdpStatus.INFEASIBLE, metrics=metrics)
    if np.isfinite(metrics.margin):
        metrics.lean = "feasible" if metrics.margin >= -cfg.infeas_threshold else "infeasible"
    elif np.isfinite(best_bound):
        metrics.lean = "feasible" if best_bound >= cfg.infeas_threshold else "infeasible"
    metrics.failure = breakdown and metrics.lean is None
    return SdpOutcome(SdpStatus.NUMERICAL, metrics=metrics)



# -- debug dump ----------------------------------------------------------------------------


def dump_problem(p: SdpProblem, path: str | Path) -> None:
    """Write a problem as plain-text sparse triplets, one block per constraint."""
    m = p.gram_size
    A = p.A.tocsr()
    B = p.B.tocsr()
    lines = [f"sdp {m} {p.free_count} {p.constraint_count}"]
    for t in range(p.constraint_count):
        label = p.labels[t] if t < len(p.labels) else ""
        label_txt = ",".join(map(str, label)) if isinstance(label, tuple) else str(label)
        lines.append(f"constraint {t} {label_txt}".rstrip())
        row = A.getrow(t).tocoo()
        for idx, v in sorted(zip(row.col, row.data)):
            i, j = divmod(int(idx), m)
            if i <= j:
                lines.append(f"A {i} {j} {float(v)!r}")
        brow = B.getrow(t).tocoo()
        for j, v in sorted(zip(brow.col, brow.data)):
            lines.append(f"B {int(j)} {float(v)!r}")
        lines.append(f"c {float(p.c[t])!r}")
    Path(path).write_text("\n".join(lines) + "\n")


def load_problem(path: str | Path) -> SdpProblem:
    rows_a, cols_a, vals_a = [], [], []
    rows_b, cols_b, vals_b = [], [], []
    c: list[float] = []
    labels = []
    m = pcount = K = 0
    t = -1
    for line in Path(path).read_text().splitlines():
        parts = line.split()
        if not parts:
            continue
        tag = parts[0]
        if tag == "sdp":
            m, pcount, K = map(int, parts[1:4])
        elif tag == "constraint":
            t = int(parts[1])
            lab = parts[2] if len(parts) > 2 else ""
            labels.append(tuple(int(x) for x in lab.split(",")) if lab else ())
            c.append(0.0)
        elif tag == "A":
            i, j, v = int(parts[1]), int(parts[2]), float(parts[3])
            rows_a.append(t)
            cols_a.append(i * m + j)
            vals_a.append(v)
            if i != j:
                rows_a.append(t)
                cols_a.append(j * m + i)
                vals_a.append(v)
        elif tag == "B":
            rows_b.append(t)
            cols_b.append(int(parts[1]))
            vals_b.append(float(parts[2]))
        elif tag == "c":
            c[t] = float(parts[1])
    A = sparse.csr_matrix((vals_a, (rows_a, cols_a)), shape=(K, m * m))
    B = sparse.csr_matrix((vals_b, (rows_b, cols_b)), shape=(K, pcount))
    return SdpProblem(m, pcount, A, B, np.array(c), tuple(labels))
