"""Space construction, ball enumeration, and growth-profile tests."""

import json

import numpy as np
import pytest

from campanato import (
    MetricMeasureSpace,
    build_grid_space,
    doubling_profile,
    line_space,
    random_metric_space,
    single_point_space,
    two_point_space,
)
from campanato.space import SpaceValidationError


# -- grid builds -------------------------------------------------------------

def test_grid_1d_small():
    s = build_grid_space(1, 1.0, 3)
    assert np.allclose(s.coords[:, 0], [-1.0, 0.0, 1.0])
    assert s.grid.h == 1.0
    assert np.allclose(s.weight, 1.0)


def test_grid_1d_total_measure():
    s = build_grid_space(1, 1.0, 101)
    assert np.isclose(s.total_measure, 101 * 0.02)


def test_grid_power_weight_shifts_off_origin():
    s = build_grid_space(1, 1.0, 64, weight_spec=("power", 0.5))
    # 64 nodes on [-1, 1] do not hit zero, so no shift is needed
    assert s.grid.origin_shift == 0.0
    assert np.all(s.weight > 0)
    # an odd count hits the origin and must be shifted by h/2
    s2 = build_grid_space(1, 1.0, 65, weight_spec=("power", 0.5))
    assert s2.grid.origin_shift == s2.grid.h / 2
    assert np.all(s2.weight > 0)


def test_grid_2d_lexicographic_order():
    s = build_grid_space(2, 1.0, 3)
    assert s.n == 9
    assert np.allclose(s.coords[0], [-1, -1])
    assert np.allclose(s.coords[1], [-1, 0])
    assert np.allclose(s.coords[3], [0, -1])
    assert np.allclose(s.weight, s.grid.h**2)


def test_grid_rejects_bad_parameters():
    with pytest.raises(ValueError):
        build_grid_space(1, -1.0, 8)
    with pytest.raises(ValueError):
        build_grid_space(1, 1.0, 1)
    with pytest.raises(ValueError):
        build_grid_space(1, 1.0, 8, weight_spec=("power", 1.5))
    with pytest.raises(ValueError):
        build_grid_space(3, 1.0, 8)


def test_validation_rejects_broken_metric():
    d = np.array([[0.0, 1.0], [2.0, 0.0]])
    with pytest.raises(SpaceValidationError):
        MetricMeasureSpace(d, np.ones(2))
    d = np.array([[0.0, 5.0, 1.0], [5.0, 0.0, 1.0], [1.0, 1.0, 0.0]])
    with pytest.raises(SpaceValidationError):
        MetricMeasureSpace(d, np.ones(3))  # triangle fails through point 2
    with pytest.raises(SpaceValidationError):
        MetricMeasureSpace(np.zeros((2, 2)), np.array([1.0, -1.0]))


# -- canonical balls ---------------------------------------------------------

def test_balls_line3_exact(line3):
    balls = line3.canonical_balls()
    members = sorted(tuple(b.members) for b in balls)
    assert members == [(0,), (0, 1), (0, 1, 2), (1,), (1, 2), (2,)]
    assert len(balls) == 6


def test_balls_single_point():
    s = single_point_space()
    assert len(s.canonical_balls()) == 1


def test_balls_two_point(two_point):
    balls = two_point.canonical_balls()
    assert len(balls) == 3
    sizes = sorted(b.size for b in balls)
    assert sizes == [1, 1, 2]


def test_ball_member_reconstruction(random12):
    # recomputing {y : d(c, y) < r} from the stored (center, radius)
    # must reproduce the member set exactly, for every realization
    for b in random12.canonical_balls():
        for c, r in b.realizations:
            rec = np.flatnonzero(random12.dist[c] < r)
            assert np.array_equal(rec, b.members)


def test_ball_list_deterministic(random16):
    other = random_metric_space(16, seed=0)
    b1 = random16.canonical_balls()
    b2 = other.canonical_balls()
    assert len(b1) == len(b2)
    for a, b in zip(b1, b2):
        assert a.center == b.center
        assert np.array_equal(a.members, b.members)
        assert a.canonical_radius == b.canonical_radius


def test_ball_measures_positive(random16):
    balls = random16.canonical_balls()
    assert np.all(balls.measures > 0)
    full = max(balls, key=lambda b: b.size)
    assert np.isclose(full.measure, random16.total_measure)


# -- doubling profile --------------------------------------------------------

def test_profile_single_point():
    prof = doubling_profile(single_point_space())
    assert prof.a1 == 1.0 and prof.n_exp == 0.0


def test_profile_two_point(two_point):
    prof = doubling_profile(two_point)
    assert np.isclose(prof.a1, 2.0)


def test_profile_grid101():
    prof = doubling_profile(build_grid_space(1, 1.0, 101))
    assert 2.0 <= prof.a1 <= 3.0
    assert prof.a1 >= 1.0
    assert 0 < prof.kappa <= prof.n_exp
    assert 0 < prof.a3 <= 1.0


def test_profile_a1_is_true_maximum(random16, rng):
    # 1000 random (center, r) queries never beat the reported constant
    prof = doubling_profile(random16)
    w = random16.weight
    for _ in range(1000):
        c = int(rng.integers(0, random16.n))
        r = float(rng.uniform(1e-6, random16.diameter))
        mu_r = w[random16.dist[c] < r].sum()
        mu_2r = w[random16.dist[c] < 2 * r].sum()
        assert mu_2r <= prof.a1 * mu_r * (1 + 1e-12)


# -- serialization -----------------------------------------------------------

def test_json_roundtrip_euclidean(grid64):
    doc = grid64.to_json()
    s2 = MetricMeasureSpace.from_json(doc)
    assert np.allclose(s2.dist, grid64.dist)
    assert np.allclose(s2.weight, grid64.weight)
    assert list(json.loads(doc).keys()) == ["label", "points", "metric"]


def test_json_roundtrip_explicit(random12):
    doc = random12.to_json()
    s2 = MetricMeasureSpace.from_json(doc)
    assert np.allclose(s2.dist, random12.dist)
    parsed = json.loads(doc)
    assert parsed["metric"] == "explicit"
    assert list(parsed.keys()) == ["label", "points", "metric", "dist"]


def test_json_deterministic(random12):
    assert random12.to_json() == MetricMeasureSpace.from_json(random12.to_json()).to_json()
