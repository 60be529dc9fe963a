"""Certificate for the plane Z1 - Z2 + Z3 = 0 pulled back to the Plücker
quadric Z1 Z6 - Z2 Z5 + Z3 Z4 = 0.
"""

import argparse
import math

from amoebacert.polycore import monomial_pullback, parse_poly
from amoebacert.soscert import search_certificate, transfer_certificate, verify_certificate
from amoebacert.systems import amoeba_generators

GAMMA = [(1, 0, 0, 0, 0, 1), (0, 1, 0, 0, 1, 0), (0, 0, 1, 1, 0, 0)]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--lam", default="1,5,1,1,1,1", help="point on the six-dimensional torus")
    a = ap.parse_args()
    lam = [float(x) for x in a.lam.split(",")]

    plane = parse_poly("Z1 - Z2 + Z3", 3)
    rho = [math.prod(l**e for l, e in zip(lam, col)) for col in GAMMA]
    base = amoeba_generators([plane], rho, normalize=False)
    res = search_certificate(base, 1, 1)
    print(f"base point {rho}: {res.status.name}")
    if res.certificate is None:
        return
    cert, _ = transfer_certificate(res.certificate, base, GAMMA, lam=lam)
    target = amoeba_generators([monomial_pullback(plane, GAMMA)], lam, normalize=False)
    rep = verify_certificate(cert, target, tol=1e-8)
    print(f"base degree {res.certificate.declared_degree[1]} -> transferred degree {cert.declared_degree[1]}")
    print(f"Gram size {len(res.certificate.gram_basis)} -> {len(cert.gram_basis)}")
    print(f"residual {float(rep.residual):.3e}  min eig {rep.min_eigenvalue:.3e}  passed {rep.passed}")


if __name__ == "__main__":
    main()
