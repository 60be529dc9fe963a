import math

import numpy as np
import pytest

from amoebacert.polycore import RealPoly, parse_poly
from amoebacert.soscert import (
    BudgetError,
    SearchStatus,
    TransferError,
    assemble_sdp,
    dump_certificate,
    load_certificate,
    search_certificate,
    sos_decomposition,
    transfer_certificate,
    verify_certificate,
)
from amoebacert.systems import amoeba_generators

LINEAR = parse_poly("Z1 + 2*Z2 + 3", 2)


def certified_linear(lam=(10.0, 1.0), normalize=True):
    sys = amoeba_generators([LINEAR], lam, normalize=normalize)
    res = search_certificate(sys, 1, 1)
    assert res.status is SearchStatus.CERTIFIED
    return res.certificate, sys


def test_gram_basis_sizes():
    sys = amoeba_generators([LINEAR], [1, 1])
    assert len(assemble_sdp(sys, 0, 1).gram_basis) == 5
    assert len(assemble_sdp(sys, 1, 2).gram_basis) == 15


def test_budget_below_minimum_rejected():
    sys = amoeba_generators([LINEAR], [1, 1])
    with pytest.raises(BudgetError):
        assemble_sdp(sys, 1, 0)
    with pytest.raises(BudgetError):
        assemble_sdp(sys, -1, 1)


def test_one_variable_off_circle_certified():
    f = parse_poly("Z1 + (1+2i)", 1)
    for lam in (1.0, 4.0):
        res = search_certificate(amoeba_generators([f], [lam], normalize=False), 1, 1)
        assert res.status is SearchStatus.CERTIFIED
        assert res.report.passed
        assert max(p.total_degree() for p in res.certificate.multipliers) <= 1


def test_one_variable_on_circle_not_certified():
    f = parse_poly("Z1 + (1+2i)", 1)
    lam = math.sqrt(5)
    for t, k in ((1, 1), (2, 2), (3, 2)):
        res = search_certificate(amoeba_generators([f], [lam], normalize=False), t, k)
        assert res.status is not SearchStatus.CERTIFIED


def test_linear_outside_point_needs_degree_one_multipliers():
    sys = amoeba_generators([LINEAR], [10.0, 1.0])
    assert search_certificate(sys, 0, 1).status is not SearchStatus.CERTIFIED
    assert search_certificate(sys, 1, 1).status is SearchStatus.CERTIFIED


def test_perturbed_multiplier_fails_verification():
    cert, sys = certified_linear()
    p = cert.multipliers[0]
    bumped = p + RealPoly(p.n, {(0,) * p.n: 1.0})
    bad = type(cert)((bumped,) + cert.multipliers[1:], cert.gram_basis, cert.gram, cert.scale, cert.declared_degree)
    rep = verify_certificate(bad, sys)
    assert not rep.passed and rep.residual >= 0.9


def test_embedding_into_larger_budget():
    cert, sys = certified_linear()
    big = cert.embed(2, t=2)
    assert big.declared_degree == (2, 4)
    assert len(big.gram_basis) == 15
    assert verify_certificate(big, sys).passed


def test_sos_decomposition_reproduces_square_part():
    cert, _ = certified_linear()
    total = RealPoly(cert.nvars, {})
    for w, q in sos_decomposition(cert, cutoff=0.0):
        total = total + q * q * w
    diff = total - cert.sos_part()
    assert max((abs(c) for c in diff.terms.values()), default=0) < 1e-9


def test_text_round_trip():
    cert, sys = certified_linear()
    back = load_certificate(dump_certificate(cert))
    assert back.declared_degree == cert.declared_degree
    assert np.allclose(back.gram, cert.gram, rtol=0, atol=0)
    assert verify_certificate(back, sys).passed


def test_transfer_identity_map_keeps_gram():
    cert, sys = certified_linear(normalize=False)
    out, target = transfer_certificate(cert, sys, [(1, 0), (0, 1)])
    assert out.gram_basis == cert.gram_basis
    assert np.allclose(out.gram, cert.gram)
    assert verify_certificate(out, target).passed


def test_transfer_degree_scales_with_map_degree():
    cert, sys = certified_linear(normalize=False)
    out, target = transfer_certificate(cert, sys, [(3, 0), (1, 1)])
    assert out.declared_degree == (3, 6)
    assert verify_certificate(out, target, tol=1e-8).passed


def test_transfer_onto_standard_system():
    lam = (10.0 ** 0.5, 1.0)
    cert, sys = certified_linear(lam=(10.0, 1.0), normalize=False)
    out, target = transfer_certificate(cert, sys, [(2, 0), (0, 1)], lam=lam)
    g = parse_poly("Z1^2 + 2*Z2 + 3", 2)
    expected = amoeba_generators([g], lam, normalize=False)
    assert all((a - b).to_float().is_zero() or max(abs(c) for c in (a - b).to_float().terms.values()) < 1e-12
               for a, b in zip(target.generators, expected.generators))
    assert verify_certificate(out, expected, tol=1e-8).passed


def test_transfer_rejects_bad_input():
    cert, sys = certified_linear(normalize=False)
    with pytest.raises(TransferError):
        transfer_certificate(cert, sys, [(1, 1), (2, 2)])
    with pytest.raises(TransferError):
        transfer_certificate(cert, sys, [(1, 0), (0, 1)], lam=(2.0, 1.0))
    other = amoeba_generators([LINEAR], (0.1, 0.1), normalize=False)
    with pytest.raises(TransferError):
        transfer_certificate(cert, other, [(1, 0), (0, 1)])
