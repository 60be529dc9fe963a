"""Diameter lower bounds of the inner complement component of
1 + Z1^2 Z2 + Z1 Z2^2 + c Z1 Z2 at delta = (1, 1), for c in [1, 7] and [-9, -3].
"""

import argparse
import time
from pathlib import Path

from amoebacert.diameter import DiameterQuery, family_poly, sweep_coefficient, write_sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--step", type=float, default=0.1)
    ap.add_argument("--iters", type=int, default=14)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", default="results/diameter")
    a = ap.parse_args()

    template = DiameterQuery(family_poly(1.0), (1.0, 1.0), iterations=a.iters)
    Path(a.out).parent.mkdir(parents=True, exist_ok=True)
    for name, lo, hi in (("positive", 1.0, 7.0), ("negative", -9.0, -3.0)):
        count = int(round((hi - lo) / a.step)) + 1
        cs = [round(lo + i * a.step, 12) for i in range(count)]
        t0 = time.perf_counter()
        rows = sweep_coefficient(family_poly, cs, template, workers=a.workers)
        write_sweep(rows, f"{a.out}_{name}.csv")
        print(f"{name}: {len(rows)} queries in {time.perf_counter() - t0:.1f}s")
        for r in rows[:: max(1, len(rows) // 6)]:
            print("  " + r.csv())


if __name__ == "__main__":
    main()
