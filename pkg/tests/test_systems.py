import math
import cmath

import numpy as np
import pytest
from hypothesis import given, strategies as st

from amoebacert.polycore import parse_poly, parse_real_poly, phase_substitute
from amoebacert.soscert import search_certificate
from amoebacert.systems import (
    SpanningError,
    SystemKind,
    amoeba_generators,
    coamoeba_generators,
    monomial_generators,
    monomial_moduli,
    sphere_generators,
)


def test_single_variable_standard_system():
    sys = amoeba_generators([parse_poly("Z1 + (1+2i)", 1)], [3.0], normalize=False)
    assert sys.kind is SystemKind.AMOEBA_STANDARD
    assert list(sys.generators) == [
        parse_real_poly("X1 + 1", 1),
        parse_real_poly("Y1 + 2", 1),
        parse_real_poly("X1^2 + Y1^2 - 9", 1),
    ]


def test_two_variable_standard_system_raw_and_normalized():
    f = parse_poly("Z1 + Z2 + 5", 2)
    raw = amoeba_generators([f], [2, 3], normalize=False)
    assert len(raw.generators) == 4
    assert raw.generators[-1] == parse_real_poly("X2^2 + Y2^2 - 9", 2)
    norm = amoeba_generators([f], [2, 3])
    assert norm.generators[0] == parse_real_poly("2*X1 + 3*X2 + 5", 2)
    assert norm.generators[-1] == parse_real_poly("X2^2 + Y2^2 - 1", 2)


def test_nonpositive_point_rejected():
    with pytest.raises(ValueError):
        amoeba_generators([parse_poly("Z1 + 1", 1)], [0.0])


def test_monomial_system_shape():
    f = parse_poly("Z1^2*Z2 + Z1*Z2^2 + 3*Z1*Z2 + 1", 2)
    sys = monomial_generators(f, [2, 3])
    assert len(sys.generators) == 2 + 4
    assert sorted(monomial_moduli(f, [2, 3])) == [1, 6, 12, 18]
    # |Z1^2 Z2|^2 - 144 appears among the modulus generators
    m1 = parse_real_poly("X1^2 + Y1^2", 2)
    m2 = parse_real_poly("X2^2 + Y2^2", 2)
    assert m1 * m1 * m2 - 144 in sys.generators[2:]


def test_monomial_system_needs_spanning_exponents():
    with pytest.raises(SpanningError):
        monomial_generators(parse_poly("Z1*Z2 + 1", 2), [1, 1])


def test_coamoeba_systems():
    f = parse_poly("Z1 + Z2 + 5", 2)
    sys = coamoeba_generators([f], [0, 0])
    assert list(sys.generators) == [
        parse_real_poly("X1^2 + X2^2 + 5", 2),
        parse_real_poly("Y1 + Y2", 2),
        parse_real_poly("Y1", 2),
        parse_real_poly("Y2", 2),
    ]
    rot = coamoeba_generators([f], [math.pi, math.pi])
    g0 = rot.generators[0].to_float()
    assert g0.evaluate([1.0, 2.0, 0, 0]) == pytest.approx(-1 - 4 + 5, abs=1e-9)
    assert rot.generators[1].to_float().evaluate([0, 0, 1.0, 1.0]) == pytest.approx(-2, abs=1e-9)


def test_single_monomial_coamoeba_has_real_zero():
    sys = coamoeba_generators([parse_poly("Z1", 1)], [0])
    assert np.allclose(sys.evaluate([0.0, 0.0]), 0)


def test_sphere_system_vanishes_on_matching_point():
    f = parse_poly("1 + Z1^2*Z2 + Z1*Z2^2 - 4*Z1*Z2", 2)
    z1 = 0.5 + 0j
    z2 = 0.4 + 0j
    sys = sphere_generators(f, [1, 1], 2 * math.hypot(1 - abs(z1) ** 2, 1 - abs(z2) ** 2))
    assert sys.evaluate([z1.real, z2.real, 0, 0])[0] == pytest.approx(0, abs=1e-12)


angle = st.floats(0, 2 * math.pi)
modulus = st.floats(0.2, 4)


@given(modulus, angle, modulus, angle)
def test_generators_vanish_on_variety_points(r1, a1, r2, a2):
    # Z1 + 2 Z2 + c with c chosen so that (z1, z2) is on the variety
    z1, z2 = cmath.rect(r1, a1), cmath.rect(r2, a2)
    c = -(z1 + 2 * z2)
    f = parse_poly(f"Z1 + 2*Z2 + ({c.real!r}{c.imag:+.17g}i)", 2)
    for sys in (amoeba_generators([f], [r1, r2], normalize=False), monomial_generators(f, [r1, r2])):
        vals = sys.evaluate([z1.real, z2.real, z1.imag, z2.imag])
        assert np.max(np.abs(vals)) < 1e-9 * (1 + abs(c)) ** 2


@given(st.floats(-2, 2), st.floats(-2, 2), angle, angle)
def test_coamoeba_generators_at_real_points(x1, x2, m1, m2):
    f = parse_poly("Z1 + (2-1i)*Z2^2 + 3", 2)
    sys = coamoeba_generators([f], [m1, m2])
    z = phase_substitute(f.to_float(), [m1, m2]).evaluate([x1 * x1, x2 * x2])
    assert sys.generators[0].to_float().evaluate([x1, x2, 0, 0]) == pytest.approx(z.real, abs=1e-9)
    assert sys.generators[1].to_float().evaluate([x1, x2, 0, 0]) == pytest.approx(z.imag, abs=1e-9)


def test_normalization_does_not_change_status():
    rng = np.random.default_rng(5)
    agree = 0
    for _ in range(20):
        a, b, c = (float(x) for x in rng.uniform(0.5, 3, size=3))
        lam = np.exp(rng.uniform(-1.5, 1.5, size=2))
        f = parse_poly(f"{a!r}*Z1 + {b!r}*Z2 + {c!r}", 2)
        raw = search_certificate(amoeba_generators([f], lam, normalize=False), 1, 1)
        norm = search_certificate(amoeba_generators([f], lam), 1, 1)
        agree += raw.status == norm.status
    assert agree == 20
