"""Command-line front end.

Membership points (``--point``) are unlog coordinates ``lambda``; scan regions
are given in log coordinates.
"""

from __future__ import annotations

import argparse
import logging
import math
import os
import sys
from pathlib import Path
from typing import Sequence

from .diameter import (
    DiameterQuery,
    diameter_lower_bound_log,
    diameter_lower_bound_unlog,
    family_poly,
    sweep_coefficient,
    sweep_csv,
)
from .lopsided import NotLopsidedError, explicit_certificate, moduli_sequence, purbhoo_membership
from .membership import Budget, Method, Verdict, classify_point
from .polycore import ComplexPoly, PolySyntaxError, infer_nvars, parse_poly, scale_substitute
from .scan import emit_report, scan_amoeba, scan_coamoeba
from .sdp import SolverConfig
from .soscert import (
    SearchStatus,
    TransferError,
    read_certificate,
    save_certificate,
    search_certificate,
    transfer_certificate,
    verify_certificate,
)
from .systems import amoeba_generators, monomial_generators

EXIT_OK, EXIT_NUMERICAL, EXIT_USAGE = 0, 1, 2
NUMERICAL_VERDICTS = {Verdict.NUMERICAL_FEASIBLE, Verdict.NUMERICAL_INFEASIBLE, Verdict.SOLVER_FAILURE}


class UsageError(Exception):
    pass


def read_polys(path: str) -> list[ComplexPoly]:
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"no such polynomial file: {path}")
    lines = [ln.strip() for ln in p.read_text().splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines:
        raise UsageError(f"{path} contains no polynomial")
    n = max(infer_nvars(ln) for ln in lines)
    out = []
    for lineno, ln in enumerate(lines, 1):
        try:
            out.append(parse_poly(ln, n))
        except PolySyntaxError as exc:
            raise UsageError(f"{path}: polynomial {lineno}: {exc}") from exc
    return out


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",")]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _gamma(text: str) -> list[list[int]]:
    try:
        return [[int(x) for x in col.split(",")] for col in text.split(";")]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected columns like '1,0;0,1', got {text!r}") from exc


def _g9(x: float) -> str:
    return f"{float(x):.9g}"


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentDefaultsHelpFormatter
    common = argparse.ArgumentParser(add_help=False)
    sol = common.add_argument_group("solver")
    d = SolverConfig()
    sol.add_argument("--eps-feas", type=float, default=d.eps_feas, help="max constraint violation of a FEASIBLE solution")
    sol.add_argument("--eps-psd", type=float, default=d.eps_psd, help="allowed negative eigenvalue of a FEASIBLE Gram matrix")
    sol.add_argument("--infeas-threshold", type=float, default=d.infeas_threshold, help="dual margin bound that declares INFEASIBLE")
    sol.add_argument("--max-iter", type=int, default=d.max_iterations, help="interior point iteration limit")
    sol.add_argument("--trace-bound", type=float, default=d.trace_bound, help="bound on tr(Q) in the margin problem")
    sol.add_argument("--trace-bound-max", type=float, default=d.trace_bound_max,
                     help="largest trace bound tried before INFEASIBLE is accepted")
    common.add_argument("--log-level", default="WARNING", help="logging level")

    budget = argparse.ArgumentParser(add_help=False)
    b = budget.add_argument_group("degree budget")
    b.add_argument("--mult-degree", type=int, default=1, help="multiplier degree t")
    b.add_argument("--half-degree", type=int, default=None, help="Gram half-degree k (default ceil((t + max deg)/2))")
    b.add_argument("--r", type=int, default=1, help="cyclic-product level for the lopsided path")
    b.add_argument("--no-normalize", action="store_true", help="keep the raw point instead of rescaling to 1")

    ap = argparse.ArgumentParser(prog="amoebacert", description="Certified amoeba and coamoeba membership.", formatter_class=fmt)
    sub = ap.add_subparsers(dest="command", required=True)
    methods = [m.value for m in Method]

    p = sub.add_parser("membership", parents=[common, budget], formatter_class=fmt, help="classify one point")
    p.add_argument("--poly", required=True, help="polynomial file, one polynomial per line")
    p.add_argument("--point", required=True, type=_floats, help="unlog point lambda, e.g. 10,1")
    p.add_argument("--method", choices=methods, default="auto", help="classification path")
    p.add_argument("--cert-out", help="write the certificate here when one is found")

    p = sub.add_parser("scan", parents=[common, budget], formatter_class=fmt, help="classify a log-space grid")
    p.add_argument("--poly", required=True, help="polynomial file, one polynomial per line")
    for name, default in (("--xmin", -3.0), ("--xmax", 4.0), ("--ymin", -3.0), ("--ymax", 4.0)):
        p.add_argument(name, type=float, default=default, help="log-space region bound")
    p.add_argument("--nx", type=int, default=50, help="grid columns")
    p.add_argument("--ny", type=int, default=50, help="grid rows")
    p.add_argument("--method", choices=methods, default="auto", help="classification path")
    p.add_argument("--out", required=True, help="PGM output path")
    p.add_argument("--csv", help="optional CSV output path")
    p.add_argument("--threads", type=int, default=os.cpu_count() or 1, help="worker processes")

    p = sub.add_parser("coamoeba-scan", parents=[common], formatter_class=fmt, help="classify an angle grid")
    p.add_argument("--poly", required=True, help="polynomial file, one polynomial per line")
    p.add_argument("--nx", type=int, default=50, help="grid columns")
    p.add_argument("--ny", type=int, default=50, help="grid rows")
    p.add_argument("--domain", choices=["centered", "positive"], default="centered", help="[-pi,pi)^2 or [0,2pi)^2")
    p.add_argument("--mult-degree", type=int, default=0, help="multiplier degree t")
    p.add_argument("--half-degree", type=int, default=1, help="Gram half-degree k")
    p.add_argument("--out", required=True, help="PGM output path")
    p.add_argument("--csv", help="optional CSV output path")
    p.add_argument("--threads", type=int, default=os.cpu_count() or 1, help="worker processes")

    p = sub.add_parser("lopsided", parents=[common], formatter_class=fmt, help="term moduli and lopsidedness")
    p.add_argument("--poly", required=True, help="polynomial file, one polynomial per line")
    p.add_argument("--point", required=True, type=_floats, help="unlog point lambda")

    p = sub.add_parser("purbhoo", parents=[common], formatter_class=fmt, help="cyclic-product lopsidedness")
    p.add_argument("--poly", required=True, help="polynomial file, one polynomial per line")
    p.add_argument("--point", required=True, type=_floats, help="unlog point lambda")
    p.add_argument("--r", type=int, default=1, help="cyclic-product level")

    p = sub.add_parser("certify", parents=[common, budget], formatter_class=fmt, help="search and save a certificate")
    p.add_argument("--poly", required=True, help="polynomial file, one polynomial per line")
    p.add_argument("--point", required=True, type=_floats, help="unlog point lambda")
    p.add_argument("--system", choices=["standard", "monomial", "explicit"], default="standard", help="generator system")
    p.add_argument("--out", help="certificate output path")

    p = sub.add_parser("transfer", parents=[common], formatter_class=fmt, help="pull a certificate along a monomial map")
    p.add_argument("--cert", required=True, help="certificate for the unnormalized standard system")
    p.add_argument("--poly", required=True, help="polynomials of the base system")
    p.add_argument("--point", required=True, type=_floats, help="base point rho")
    p.add_argument("--map", required=True, type=_gamma, help="exponent columns, e.g. '1,0,0,0,0,1;0,1,0,0,1,0;0,0,1,1,0,0'")
    p.add_argument("--lam", type=_floats, help="target point; rewrites onto the target standard system")
    p.add_argument("--out", help="certificate output path")

    p = sub.add_parser("diameter", parents=[common], formatter_class=fmt, help="diameter lower bound")
    p.add_argument("--poly", required=True, help="polynomial file, one polynomial per line")
    p.add_argument("--delta", required=True, type=_floats, help="minimal point delta, e.g. 1,1")
    p.add_argument("--iters", type=int, default=14, help="bisection probes")
    p.add_argument("--dmax", type=float, default=4.0, help="upper end of the search interval")
    p.add_argument("--mult-degree", type=int, default=3, help="multiplier degree t")
    p.add_argument("--half-degree", type=int, default=3, help="Gram half-degree k")

    p = sub.add_parser("sweep", parents=[common], formatter_class=fmt,
                       help="diameter bounds for 1 + Z1^2 Z2 + Z1 Z2^2 + c Z1 Z2 over c")
    p.add_argument("--cmin", type=float, default=1.0, help="first coefficient")
    p.add_argument("--cmax", type=float, default=7.0, help="last coefficient")
    p.add_argument("--step", type=float, default=0.1, help="coefficient step")
    p.add_argument("--delta", type=_floats, default=[1.0, 1.0], help="minimal point delta")
    p.add_argument("--iters", type=int, default=14, help="bisection probes")
    p.add_argument("--dmax", type=float, default=4.0, help="upper end of the search interval")
    p.add_argument("--mult-degree", type=int, default=3, help="multiplier degree t")
    p.add_argument("--half-degree", type=int, default=3, help="Gram half-degree k")
    p.add_argument("--out", help="CSV path (stdout when omitted)")
    p.add_argument("--threads", type=int, default=os.cpu_count() or 1, help="worker processes")
    return ap


def parse_args(argv: Sequence[str] | None = None) -> argparse.Namespace:
    return build_parser().parse_args(argv)


def _cfg(a) -> SolverConfig:
    return SolverConfig(a.eps_feas, a.eps_psd, a.infeas_threshold, a.max_iter, a.trace_bound, a.trace_bound_max)


def _budget(a) -> Budget:
    return Budget(t=a.mult_degree, k=a.half_degree, r=getattr(a, "r", 1), normalize=not getattr(a, "no_normalize", False))


def _writable(path: str | None):
    if path and not Path(path).resolve().parent.is_dir():
        raise UsageError(f"output directory does not exist: {path}")


def _single(fs: list[ComplexPoly]) -> ComplexPoly:
    if len(fs) != 1:
        raise UsageError("this command needs exactly one polynomial")
    return fs[0]


def _check_point(point, n):
    if len(point) != n:
        raise UsageError(f"point has {len(point)} coordinates, polynomial has {n} variables")
    if any(not (x > 0) for x in point):
        raise UsageError("unlog coordinates must be positive")


def _cmd_membership(a) -> int:
    _writable(a.cert_out)
    fs = read_polys(a.poly)
    _check_point(a.point, fs[0].n)
    st = classify_point(fs, a.point, Method(a.method), _budget(a), _cfg(a))
    print(st.line())
    if a.cert_out and st.certificate is not None:
        save_certificate(st.certificate, a.cert_out)
    return EXIT_NUMERICAL if st.verdict in NUMERICAL_VERDICTS else EXIT_OK


def _grid_exit(report) -> int:
    counts = report.counts()
    for name, c in counts.items():
        print(f"{name}={c}")
    numerical = sum(counts[v.name] for v in NUMERICAL_VERDICTS)
    return EXIT_NUMERICAL if 2 * numerical > report.statuses.size else EXIT_OK


def _cmd_scan(a) -> int:
    _writable(a.out)
    _writable(a.csv)
    fs = read_polys(a.poly)
    rep = scan_amoeba(fs, (a.xmin, a.xmax, a.ymin, a.ymax), (a.nx, a.ny), Method(a.method), _budget(a), _cfg(a), a.threads)
    emit_report(rep, "pgm", a.out)
    if a.csv:
        emit_report(rep, "csv", a.csv)
    return _grid_exit(rep)


def _cmd_coamoeba(a) -> int:
    _writable(a.out)
    _writable(a.csv)
    fs = read_polys(a.poly)
    budget = Budget(t=a.mult_degree, k=a.half_degree)
    rep = scan_coamoeba(fs, (a.nx, a.ny), budget, _cfg(a), a.domain, a.threads)
    emit_report(rep, "pgm", a.out)
    if a.csv:
        emit_report(rep, "csv", a.csv)
    return _grid_exit(rep)


def _cmd_lopsided(a) -> int:
    f = _single(read_polys(a.poly))
    _check_point(a.point, f.n)
    seq = moduli_sequence(f, [math.log(x) for x in a.point])
    vals = ",".join(_g9(v) for v in seq.values)
    if seq.dominant is None:
        print(f"NOT-LOPSIDED moduli={vals}")
    else:
        print(f"LOPSIDED dominant={seq.dominant} moduli={vals}")
    return EXIT_OK


def _cmd_purbhoo(a) -> int:
    f = _single(read_polys(a.poly))
    _check_point(a.point, f.n)
    print(purbhoo_membership(f, [math.log(x) for x in a.point], a.r))
    return EXIT_OK


def _cmd_certify(a) -> int:
    _writable(a.out)
    fs = read_polys(a.poly)
    _check_point(a.point, fs[0].n)
    if a.system == "explicit":
        g = scale_substitute(_single(fs), a.point)
        try:
            cert, sys_ = explicit_certificate(g)
        except NotLopsidedError:
            print("NO_CERT_AT_DEGREE explicit")
            return EXIT_OK
        rep = verify_certificate(cert, sys_)
        print(f"CERTIFIED degree={cert.declared_degree[1]} residual={_g9(rep.residual)}")
    else:
        if a.system == "monomial":
            sys_ = monomial_generators(_single(fs), a.point, normalize=not a.no_normalize)
        else:
            sys_ = amoeba_generators(fs, a.point, normalize=not a.no_normalize)
        res = search_certificate(sys_, a.mult_degree, a.half_degree, _cfg(a))
        if res.status is not SearchStatus.CERTIFIED:
            lean = f" lean={res.lean}" if res.lean else ""
            print(f"{res.status.name} degree={2 * res.k}{lean}")
            return EXIT_NUMERICAL if res.status is SearchStatus.NUMERICAL else EXIT_OK
        cert = res.certificate
        print(f"CERTIFIED degree={2 * res.k} residual={_g9(res.report.residual)}")
    if a.out:
        save_certificate(cert, a.out)
    return EXIT_OK


def _cmd_transfer(a) -> int:
    _writable(a.out)
    if not Path(a.cert).is_file():
        raise UsageError(f"no such certificate file: {a.cert}")
    cert = read_certificate(a.cert)
    fs = read_polys(a.poly)
    _check_point(a.point, fs[0].n)
    base = amoeba_generators(fs, a.point, normalize=False)
    try:
        new, target = transfer_certificate(cert, base, a.map, lam=a.lam)
    except TransferError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    rep = verify_certificate(new, target)
    print(f"TRANSFERRED degree={new.declared_degree[1]} residual={_g9(rep.residual)} passed={int(rep.passed)}")
    if a.out:
        save_certificate(new, a.out)
    return EXIT_OK if rep.passed else EXIT_NUMERICAL


def _cmd_diameter(a) -> int:
    f = _single(read_polys(a.poly))
    q = DiameterQuery(f, tuple(a.delta), a.dmax, a.iters, a.mult_degree, a.half_degree)
    res = diameter_lower_bound_unlog(q, _cfg(a))
    log_bound = diameter_lower_bound_log(q.delta, res.bound / 2) if f.n == 2 else float("nan")
    flags = "numerical" if res.flagged else ""
    print(f"bound_unlog={_g9(res.bound)} bound_log={_g9(log_bound)} solves={res.solves} flags={flags}")
    return EXIT_OK


def _cmd_sweep(a) -> int:
    _writable(a.out)
    if a.step == 0:
        raise UsageError("step must be nonzero")
    count = int(round((a.cmax - a.cmin) / a.step)) + 1
    if count < 1:
        raise UsageError("empty coefficient range")
    cs = [round(a.cmin + i * a.step, 12) for i in range(count)]
    template = DiameterQuery(family_poly(cs[0]), tuple(a.delta), a.dmax, a.iters, a.mult_degree, a.half_degree)
    rows = sweep_coefficient(family_poly, cs, template, _cfg(a), a.threads)
    text = sweep_csv(rows)
    if a.out:
        Path(a.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_NUMERICAL if 2 * sum(bool(r.flags) for r in rows) > len(rows) else EXIT_OK


COMMANDS = {
    "membership": _cmd_membership,
    "scan": _cmd_scan,
    "coamoeba-scan": _cmd_coamoeba,
    "lopsided": _cmd_lopsided,
    "purbhoo": _cmd_purbhoo,
    "certify": _cmd_certify,
    "transfer": _cmd_transfer,
    "diameter": _cmd_diameter,
    "sweep": _cmd_sweep,
}


def dispatch(a: argparse.Namespace) -> int:
    logging.basicConfig(level=getattr(logging, str(a.log_level).upper(), logging.WARNING))
    try:
        return COMMANDS[a.command](a)
    except (UsageError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main(argv: Sequence[str] | None = None) -> int:
    try:
        a = parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_USAGE
    return dispatch(a)


if __name__ == "__main__":
    sys.exit(main())
