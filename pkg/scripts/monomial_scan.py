"""Monomial-system scan of Z1^2 Z2 + Z1 Z2^2 + c Z1 Z2 + 1 over [-4,4] x [-5,3].

Multipliers of degree 3, Gram half-degree 3.  Also counts cells where the
plain lopsidedness test already decides.
"""

import argparse
import time
from pathlib import Path

import numpy as np

from amoebacert.membership import Budget, Method
from amoebacert.polycore import parse_poly
from amoebacert.scan import emit_report, scan_amoeba


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--c", type=float, default=-4.0)
    ap.add_argument("--n", type=int, default=160)
    ap.add_argument("--raw", action="store_true", help="do not rescale each point to 1")
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", default="results/monomial")
    a = ap.parse_args()

    f = parse_poly(f"Z1^2*Z2 + Z1*Z2^2 + ({a.c!r})*Z1*Z2 + 1", 2)
    region = (-4, 4, -5, 3)
    budget = Budget(t=3, k=3, normalize=not a.raw)
    t0 = time.perf_counter()
    sos = scan_amoeba(f, region, (a.n, a.n), Method.SOS_MONOMIAL, budget, workers=a.workers)
    t_sos = time.perf_counter() - t0
    lop = scan_amoeba(f, region, (a.n, a.n), Method.LOPSIDED, budget, workers=a.workers)
    Path(a.out).parent.mkdir(parents=True, exist_ok=True)
    emit_report(sos, "pgm", a.out + ".pgm")
    emit_report(sos, "csv", a.out + ".csv")
    emit_report(lop, "pgm", a.out + "_lopsided.pgm")

    only_sos = int(np.sum((sos.statuses == 0) & (lop.statuses != 0)))
    missed = int(np.sum((sos.statuses != 0) & (lop.statuses == 0)))
    print(f"c={a.c}  {a.n}x{a.n}  sos time {t_sos:.1f}s")
    print(f"sos counts {sos.counts()}")
    print(f"lopsided outside {int(np.sum(lop.statuses == 0))}  sos-only {only_sos}  lopsided-only {missed}")


if __name__ == "__main__":
    main()
