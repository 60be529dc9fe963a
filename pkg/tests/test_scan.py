import math

import numpy as np
import pytest

from amoebacert.membership import Budget, Method, Verdict
from amoebacert.polycore import DimensionError, parse_poly
from amoebacert.scan import (
    CSV_HEADER,
    cell_centers,
    csv_text,
    emit_report,
    pgm_text,
    read_csv_statuses,
    read_pgm,
    scan_amoeba,
    scan_coamoeba,
)
from oracles import linear_boundary_distance, linear_outside

LINEAR = parse_poly("Z1 + 2*Z2 + 3", 2)
PLANE = parse_poly("Z1 + Z2 + 5", 2)
SOS1 = Budget(t=1, k=1)


def test_far_corners_all_outside():
    r = scan_amoeba(LINEAR, (-10, 10, -10, 10), (2, 2))
    assert r.statuses.shape == (2, 2)
    assert np.all(r.statuses == 0)
    assert pgm_text(r) == "P2\n2 2\n4\n0 0\n0 0\n"


def test_cell_centers_orientation():
    xs, ys = cell_centers((0, 4, 0, 2), (4, 2))
    assert list(xs) == [0.5, 1.5, 2.5, 3.5]
    assert list(ys) == [1.5, 0.5]


def test_invalid_grids():
    with pytest.raises(ValueError):
        scan_amoeba(LINEAR, (1, 1, 0, 1), (4, 4))
    with pytest.raises(ValueError):
        scan_amoeba(LINEAR, (0, 1, 0, 1), (1, 4))
    with pytest.raises(DimensionError):
        scan_amoeba(parse_poly("Z1 + 1", 1), (0, 1, 0, 1), (2, 2))


def test_coamoeba_cells():
    r = scan_coamoeba(PLANE, (1, 1))
    assert r.statuses.shape == (1, 1) and r.statuses[0, 0] == Verdict.CERTIFIED_OUTSIDE
    r = scan_coamoeba(PLANE, (1, 1), domain="positive")
    assert r.xs[0] == pytest.approx(math.pi)
    assert r.statuses[0, 0] in (Verdict.NO_CERT_AT_DEGREE, Verdict.NUMERICAL_INFEASIBLE)


def test_csv_shape_and_round_trip(tmp_path):
    r = scan_amoeba(LINEAR, (-3, 4, -3, 4), (6, 5), Method.AUTO, SOS1)
    text = csv_text(r)
    lines = text.splitlines()
    assert lines[0] == CSV_HEADER and len(lines) == 6 * 5 + 1
    emit_report(r, "csv", tmp_path / "a.csv")
    emit_report(r, "pgm", tmp_path / "a.pgm")
    assert np.array_equal(read_csv_statuses(tmp_path / "a.csv"), r.statuses)
    assert np.array_equal(read_pgm(tmp_path / "a.pgm"), r.statuses)
    with pytest.raises(ValueError):
        emit_report(r, "png", tmp_path / "a.png")


def test_parallel_equals_serial():
    args = (LINEAR, (-3, 4, -3, 4), (7, 6), Method.AUTO, SOS1)
    a = scan_amoeba(*args, workers=1)
    b = scan_amoeba(*args, workers=2)
    assert np.array_equal(a.statuses, b.statuses)
    assert pgm_text(a) == pgm_text(b) and csv_text(a) == csv_text(b)


def test_refined_grid_agrees_at_shared_centers():
    region = (-3, 4, -3, 4)
    coarse = scan_amoeba(LINEAR, region, (5, 5), Method.AUTO, SOS1)
    fine = scan_amoeba(LINEAR, region, (15, 15), Method.AUTO, SOS1)
    assert np.allclose(fine.xs[1::3], coarse.xs) and np.allclose(fine.ys[1::3], coarse.ys)
    assert np.array_equal(fine.statuses[1::3, 1::3], coarse.statuses)


def test_outside_region_matches_exact_complement_away_from_boundary():
    region, res = (-3, 4, -3, 4), (14, 14)
    r = scan_amoeba(LINEAR, region, res, Method.SOS_STANDARD, SOS1)
    cell = math.hypot((region[1] - region[0]) / res[0], (region[3] - region[2]) / res[1])
    for i, y in enumerate(r.ys):
        for j, x in enumerate(r.xs):
            if linear_boundary_distance(x, y) <= cell:
                continue
            outside = linear_outside([math.exp(x), 2 * math.exp(y), 3])
            assert (r.statuses[i, j] == 0) == outside, (x, y)
