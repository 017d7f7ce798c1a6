"""Norm computations against the brute-force oracle, plus the
explicit-constant inequalities for localization and truncation."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from campanato import (
    BallClass,
    build_grid_space,
    campanato_blo_norm,
    campanato_norm,
    critical_radius,
    dclass_from_rho,
    line_space,
    lipschitz_norm,
    localization_split,
    morrey_norm,
    truncate,
    two_point_space,
)
from oracles import brute_lipschitz, brute_morrey, brute_norm


# -- hand-checked small cases ------------------------------------------------

def test_constant_function_zero_oscillation(random12):
    f = np.full(random12.n, 2.5)
    nb = campanato_norm(random12, f, 0.3, 1.0, None)
    assert nb.total <= 1e-13 * 2.5  # zero up to roundoff in the ball means


def test_two_point_mean_oscillation(two_point):
    nb = campanato_norm(two_point, np.array([1.0, 0.0]), 0.0, 1.0, None)
    assert np.isclose(nb.total, 0.5)
    assert nb.size_part == 0.0


def test_two_point_blo_p2(two_point):
    f = np.array([1.0, 0.0])
    blo = campanato_blo_norm(two_point, f, 0.0, 2.0, None)
    assert np.isclose(blo.total, 1.0 / np.sqrt(2.0))
    e = campanato_norm(two_point, f, 0.0, 2.0, None)
    assert np.isclose(e.total, 0.5)


def test_two_point_blo_p1(two_point):
    blo = campanato_blo_norm(two_point, np.array([1.0, 0.0]), 0.0, 1.0, None)
    assert np.isclose(blo.total, 0.5)


def test_size_part_with_full_class(random12):
    balls = random12.canonical_balls()
    dall = BallClass.all_balls(balls)
    f = np.ones(random12.n)
    nb = campanato_norm(random12, f, 0.0, 1.0, dall)
    assert nb.oscillation_part == 0.0
    assert np.isclose(nb.size_part, 1.0)
    assert np.isclose(nb.total, 1.0)


def test_lipschitz_two_point(two_point):
    val = lipschitz_norm(two_point, np.array([1.0, 0.0]), 1.0, None)
    assert np.isclose(val.total, 0.5)  # pair ball: oscillation 1 over measure 2


def test_lipschitz_all_class(random12):
    balls = random12.canonical_balls()
    val = lipschitz_norm(random12, np.ones(random12.n), 1.0, BallClass.all_balls(balls))
    singleton_mu = min(b.measure for b in balls if b.size == 1)
    assert np.isclose(val.total, 1.0 / singleton_mu)


def test_morrey_constant_function(random12):
    val = morrey_norm(random12, np.ones(random12.n), -0.5, 1.0)
    assert np.isclose(val, np.sqrt(random12.total_measure))
    assert morrey_norm(random12, np.zeros(random12.n), -0.25, 2.0) == 0.0


def test_invalid_parameters(random12):
    f = np.zeros(random12.n)
    with pytest.raises(ValueError):
        campanato_norm(random12, f, 0.0, 0.0)
    with pytest.raises(ValueError):
        lipschitz_norm(random12, f, 0.0)
    with pytest.raises(ValueError):
        morrey_norm(random12, f, 0.0, 0.5)
    with pytest.raises(ValueError):
        localization_split(random12, f, 0.0, 0.5, BallClass.empty())


# -- the ball class D --------------------------------------------------------

def test_dclass_huge_rho_empty(random12):
    rho = np.full(random12.n, 10.0 * random12.diameter)
    assert len(dclass_from_rho(random12, rho)) == 0


def test_dclass_tiny_rho_everything(random12):
    rho = np.full(random12.n, random12.radius_increment / 10.0)
    d = dclass_from_rho(random12, rho)
    assert len(d) == len(random12.canonical_balls())


def test_dclass_from_constant_potential(grid64):
    rho = critical_radius(grid64, np.full(grid64.n, 4.0)).rho
    d = dclass_from_rho(grid64, rho)
    balls = grid64.canonical_balls()
    rads = balls.materialized_radii()
    cents, rs, offs = balls.realization_arrays()
    for i, b in enumerate(balls):
        qualifies = any(rs[j] >= 0.5 for j in range(offs[i], offs[i + 1]))
        assert (i in d) == qualifies


# -- oracle agreement on small spaces ----------------------------------------

@pytest.mark.parametrize("alpha", [-0.3, 0.0, 0.5])
@pytest.mark.parametrize("p", [1.0, 2.0])
def test_oracle_norms_random12(random12, rng, alpha, p):
    space = random12
    rho = rng.uniform(0.3, 1.2 * space.diameter, size=space.n)
    dclass = dclass_from_rho(space, rho)
    for _ in range(5):
        f = rng.normal(size=space.n)
        got = campanato_norm(space, f, alpha, p, dclass)
        osc, size = brute_norm(space, f, alpha, p, rho=rho, mode="mean")
        assert np.isclose(got.oscillation_part, osc, rtol=1e-12, atol=1e-12)
        assert np.isclose(got.size_part, size, rtol=1e-12, atol=1e-12)

        got_blo = campanato_blo_norm(space, f, alpha, p, dclass)
        osc_b, size_b = brute_norm(space, f, alpha, p, rho=rho, mode="min")
        assert np.isclose(got_blo.oscillation_part, osc_b, rtol=1e-12, atol=1e-12)
        assert np.isclose(got_blo.size_part, size_b, rtol=1e-12, atol=1e-12)

        assert np.isclose(
            morrey_norm(space, f, alpha, max(p, 1.0)),
            brute_morrey(space, f, alpha, max(p, 1.0)),
            rtol=1e-12,
        )


def test_oracle_lipschitz(random8, rng):
    rho = rng.uniform(0.3, 1.0, size=random8.n)
    dclass = dclass_from_rho(random8, rho)
    for _ in range(5):
        f = rng.normal(size=random8.n)
        got = lipschitz_norm(random8, f, 0.7, dclass)
        want = brute_lipschitz(random8, f, 0.7, rho=rho)
        assert np.isclose(got.total, want, rtol=1e-12)


def test_oracle_empty_and_line(line3, rng):
    for _ in range(5):
        f = rng.normal(size=3)
        got = campanato_norm(line3, f, 0.2, 1.5, None)
        osc, _ = brute_norm(line3, f, 0.2, 1.5)
        assert np.isclose(got.total, osc, rtol=1e-12)


# -- localization split: constants 2 and 3 ------------------------------------

def _dclass_samples(space, rng):
    balls = space.canonical_balls()
    yield BallClass.all_balls(balls)
    yield BallClass(np.flatnonzero(rng.random(len(balls)) < 0.4))
    rho = rng.uniform(0.3, 1.2 * space.diameter, size=space.n)
    yield dclass_from_rho(space, rho)


@pytest.mark.parametrize("alpha", [-0.3, 0.0, 0.5])
@pytest.mark.parametrize("p", [1.0, 2.0])
def test_localization_split_constants(random16, rng, alpha, p):
    space = random16
    for dclass in _dclass_samples(space, rng):
        for _ in range(20):
            f = rng.normal(size=space.n) * rng.uniform(0.1, 10)
            loc = campanato_norm(space, f, alpha, p, dclass).total
            glob, size_sup = localization_split(space, f, alpha, p, dclass)
            scale = max(loc, glob + size_sup)
            assert loc <= 2 * glob + size_sup + 1e-10 * scale
            assert glob + size_sup <= 3 * loc + 1e-10 * scale


def test_localization_split_constant_function(random12):
    balls = random12.canonical_balls()
    dall = BallClass.all_balls(balls)
    glob, size_sup = localization_split(random12, np.ones(random12.n), 0.0, 1.0, dall)
    assert glob <= 1e-13  # zero up to roundoff
    assert np.isclose(size_sup, 1.0)
    loc = campanato_norm(random12, np.ones(random12.n), 0.0, 1.0, dall).total
    assert loc <= 2 * glob + size_sup + 1e-12
    assert glob + size_sup <= 3 * loc + 1e-12


def test_localization_two_point_example(two_point):
    balls = two_point.canonical_balls()
    pair_id = next(i for i, b in enumerate(balls) if b.size == 2)
    dclass = BallClass([pair_id])
    f = np.array([1.0, 0.0])
    loc = campanato_norm(two_point, f, 0.0, 1.0, dclass).total
    glob, size_sup = localization_split(two_point, f, 0.0, 1.0, dclass)
    assert np.isclose(glob, 0.5) and np.isclose(size_sup, 0.5)
    assert loc <= 2 * glob + size_sup + 1e-12
    assert glob + size_sup <= 3 * loc + 1e-12


# -- truncation with constant 9/4 ---------------------------------------------

def test_truncate_pointwise():
    out = truncate(np.array([3.0, -5.0]), 2.0)
    assert np.array_equal(out, [2.0, -2.0])
    assert np.array_equal(truncate(np.array([3.0, -5.0]), 0.0), [0.0, 0.0])
    with pytest.raises(ValueError):
        truncate(np.array([1.0]), -1.0)


@pytest.mark.parametrize("p_small", [1.0, 0.5])
def test_truncation_nine_quarters(random16, rng, p_small):
    alpha = 1.0 / p_small - 1.0
    space = random16
    for dclass in _dclass_samples(space, rng):
        for _ in range(35):
            f = rng.normal(size=space.n) * rng.uniform(0.1, 5)
            level = rng.uniform(0.0, 1.5) * np.max(np.abs(f))
            base = campanato_norm(space, f, alpha, 1.0, dclass).total
            cut = campanato_norm(space, truncate(f, level), alpha, 1.0, dclass).total
            assert cut <= 2.25 * base + 1e-10 * max(base, 1.0)


# -- structural properties -----------------------------------------------------

def test_translation_invariance_global(random12, rng):
    f = rng.normal(size=random12.n)
    a = campanato_norm(random12, f, 0.2, 2.0, None).total
    b = campanato_norm(random12, f + 17.3, 0.2, 2.0, None).total
    assert np.isclose(a, b, rtol=1e-10)


@settings(max_examples=30, deadline=None)
@given(lam=st.floats(-50, 50, allow_nan=False), alpha=st.floats(-0.5, 0.5))
def test_absolute_homogeneity(lam, alpha):
    space = two_point_space()
    f = np.array([0.7, -1.3])
    base = campanato_norm(space, f, alpha, 1.0, None).total
    scaled = campanato_norm(space, lam * f, alpha, 1.0, None).total
    assert np.isclose(scaled, abs(lam) * base, rtol=1e-10, atol=1e-12)


def test_blo_within_factor_two(random12, rng):
    # oscillation part of the mean-based norm is at most twice the
    # min-based one, per ball and hence globally (p >= 1)
    for p in (1.0, 2.0):
        for _ in range(10):
            f = rng.normal(size=random12.n)
            e = campanato_norm(random12, f, 0.0, p, None).oscillation_part
            b = campanato_blo_norm(random12, f, 0.0, p, None).oscillation_part
            assert e <= 2.0 * b + 1e-12
            assert b >= 0.0


def test_holder_monotonicity_norms(random12, rng):
    for _ in range(10):
        f = rng.normal(size=random12.n)
        n1 = campanato_norm(random12, f, 0.1, 1.0, None).total
        n2 = campanato_norm(random12, f, 0.1, 2.0, None).total
        assert n1 <= n2 * (1 + 1e-12)


def test_blo_bounded_by_lipschitz(random12, rng):
    # per-ball: sum (f - min_B f)^p w <= Lip^p mu(B)^(1+p alpha), alpha > 0
    alpha, p = 0.4, 2.0
    balls = random12.canonical_balls()
    for _ in range(5):
        f = rng.normal(size=random12.n)
        lip = lipschitz_norm(random12, f, alpha, None).total
        for b in balls:
            vals = f[b.members]
            w = random12.weight[b.members]
            lhs = np.sum((vals - vals.min()) ** p * w)
            rhs = lip**p * b.measure ** (1 + p * alpha)
            assert lhs <= rhs * (1 + 1e-10)


def test_localized_norm_at_most_three_morrey(grid64, rng):
    # alpha < 0: localized norm <= 3 * size-only norm (triangle + Holder)
    rho = critical_radius(grid64, np.full(grid64.n, 4.0)).rho
    dclass = dclass_from_rho(grid64, rho)
    for alpha in (-0.4, -0.1):
        for _ in range(5):
            f = rng.normal(size=grid64.n)
            m = morrey_norm(grid64, f, alpha, 2.0)
            loc = campanato_norm(grid64, f, alpha, 2.0, dclass).total
            assert loc <= 3.0 * m * (1 + 1e-10)


def test_attaining_ball_ids_deterministic(random12, rng):
    f = rng.normal(size=random12.n)
    a = campanato_norm(random12, f, 0.0, 1.0, None)
    b = campanato_norm(random12, f, 0.0, 1.0, None)
    assert a.attaining_balls == b.attaining_balls
    assert a.attaining_osc is not None
    assert a.attaining_size is None  # empty class has no size part


def test_norm_report_json_keys(random12, rng):
    f = rng.normal(size=random12.n)
    doc = campanato_norm(random12, f, 0.0, 1.0, None).to_json_dict()
    assert list(doc.keys()) == [
        "alpha", "p", "class", "oscillation_part", "size_part", "total",
        "attaining_balls",
    ]
    assert doc["class"] == "E"
