"""Grid scan of Z1 + 2 Z2 + 3 over [-3, 4]^2 with degree-2 certificates.

Writes PGM and CSV files and prints agreement with the exact complement.
"""

import argparse
import math
import sys
import time
from pathlib import Path

from amoebacert.membership import Budget, Method, Verdict
from amoebacert.polycore import parse_poly
from amoebacert.scan import emit_report, scan_amoeba

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "tests"))
from oracles import linear_boundary_distance, linear_outside  # noqa: E402


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=250, help="grid side")
    ap.add_argument("--method", default="sos", choices=[m.value for m in Method])
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", default="results/linear")
    a = ap.parse_args()

    f = parse_poly("Z1 + 2*Z2 + 3", 2)
    t0 = time.perf_counter()
    r = scan_amoeba(f, (-3, 4, -3, 4), (a.n, a.n), Method(a.method), Budget(t=1, k=1), workers=a.workers)
    elapsed = time.perf_counter() - t0
    Path(a.out).parent.mkdir(parents=True, exist_ok=True)
    emit_report(r, "pgm", a.out + ".pgm")
    emit_report(r, "csv", a.out + ".csv")

    agree = total = unsound = 0
    for i, y in enumerate(r.ys):
        for j, x in enumerate(r.xs):
            if linear_boundary_distance(x, y) <= 0.1:
                continue
            outside = linear_outside([math.exp(x), 2 * math.exp(y), 3])
            certified = r.statuses[i, j] == Verdict.CERTIFIED_OUTSIDE
            total += 1
            agree += certified == outside
            unsound += certified and not outside
    print(f"cells {a.n}x{a.n}  time {elapsed:.1f}s  counts {r.counts()}")
    print(f"agreement {agree}/{total} = {agree / total:.4f}  unsound {unsound}")


if __name__ == "__main__":
    main()
