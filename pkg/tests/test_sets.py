import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import attouch_wets_brute, hausdorff_brute
from specsci import GridSpec, PointSet, RegionEstimate, attouch_wets, hausdorff, theta_grid
from specsci.errors import ParameterError

coords = st.floats(-5, 5, allow_nan=False, allow_infinity=False)
points = st.lists(st.builds(complex, coords, coords), min_size=1, max_size=12)


def test_theta_grid_one_is_unit_lattice():
    pts = set(theta_grid(1).points)
    assert pts == {complex(r, s) for r in (-1, 0, 1) for s in (-1, 0, 1)}


def test_theta_grid_four_spacing_half():
    pts = theta_grid(4).points
    assert len(pts) == 81
    assert np.allclose(sorted(set(pts.real)), np.arange(-2, 2.01, 0.5))
    assert np.abs(pts.real).max() == 2 and np.abs(pts.imag).max() == 2


def test_theta_grid_zero_rejected():
    with pytest.raises(ParameterError):
        theta_grid(0)


@pytest.mark.parametrize("n", [1, 2, 7, 25])
def test_theta_grid_cardinality_and_extent(n):
    pts = theta_grid(n).points
    assert len(pts) == (2 * n + 1) ** 2
    assert np.isclose(np.abs(pts.real).max(), n / np.sqrt(n))


def test_hausdorff_examples():
    assert hausdorff([0], [0]) == 0
    assert hausdorff([0], [3, 4j]) == 4
    assert hausdorff([1, -1], [1]) == 2


def test_empty_sets_rejected():
    with pytest.raises(ParameterError):
        hausdorff([], [1])
    with pytest.raises(ParameterError):
        attouch_wets([1], [], 5)


@given(points, points)
def test_hausdorff_matches_brute_force(a, b):
    assert hausdorff(a, b) == pytest.approx(hausdorff_brute(a, b), abs=1e-12)


@given(points, points, points)
def test_hausdorff_metric_axioms(a, b, c):
    ab, ba, ac, cb = hausdorff(a, b), hausdorff(b, a), hausdorff(a, c), hausdorff(c, b)
    assert ab == ba
    assert ab <= ac + cb + 1e-12
    assert hausdorff(a, a) == 0


def test_attouch_wets_examples(frozen):
    assert attouch_wets([0], [0]) == 0
    v = attouch_wets([0], [0.5], 30)
    assert 0.125 <= v <= 0.5
    assert v == pytest.approx(frozen["attouch_wets_0_half"], abs=1e-6)
    assert attouch_wets([0], [1e6], 20) == pytest.approx(1 - 2.0**-20, abs=1e-12)


@given(points, points)
def test_attouch_wets_bounded_by_one_and_symmetric(a, b):
    v = attouch_wets(a, b, 10)
    assert 0 <= v <= 1
    assert v == pytest.approx(attouch_wets(b, a, 10), abs=1e-12)


def test_attouch_wets_within_lattice_accuracy_of_brute_force():
    # the lattice of pitch 0.05 i sees the sup within 0.1 i sqrt(2) on ball i
    a, b = [0, 1 + 1j], [0.3, 1 - 0.5j, -2]
    slack = sum(2.0**-i * min(1.0, 0.1 * i * np.sqrt(2)) for i in range(1, 9))
    assert abs(attouch_wets(a, b, 8) - attouch_wets_brute(a, b, 8, samples=20_000)) <= slack


def test_region_csv_and_json_round_trip():
    g = GridSpec.rectangle(-1, 1, -0.5, 0.5, 0.5)
    z = g.points()
    r = RegionEstimate(z, np.abs(z), np.abs(z) < 0.6, g, {"algorithm": "test"})
    back = RegionEstimate.from_csv(r.to_csv())
    assert np.array_equal(back.z, r.z) and np.array_equal(back.member, r.member)
    assert np.array_equal(back.value, r.value)
    again = RegionEstimate.from_json(r.to_json())
    assert again.meta["algorithm"] == "test"
    assert np.array_equal(again.member, r.member)


def test_pointset_dedups():
    assert len(PointSet(np.array([1, 1, 2j]))) == 2
