"""Operator construction, kernel identities, subordination, bound fits."""

import numpy as np
import pytest
from scipy.integrate import quad

from campanato import (
    KernelFamily,
    build_grid_space,
    build_schrodinger,
    critical_radius,
    default_scale_grid,
    heat_kernel,
    kernel_bound_fit,
    poisson_kernel,
    qt_kernel,
    single_point_space,
    subordination_nodes,
)


@pytest.fixture(scope="module")
def dirichlet64():
    s = build_grid_space(1, 1.0, 64)
    return build_schrodinger(s, np.full(s.n, 4.0), "dirichlet")


@pytest.fixture(scope="module")
def periodic64():
    s = build_grid_space(1, 1.0, 64)
    return build_schrodinger(s, np.zeros(s.n), "periodic")


@pytest.fixture(scope="module")
def one_point():
    s = single_point_space(weight=1.0)
    return build_schrodinger(s, np.array([1.0]), "dirichlet")


# -- spectrum construction ------------------------------------------------------

def test_tridiagonal_eigenvalues_exact():
    s = build_grid_space(1, 1.0, 3)  # h = 1
    spec = build_schrodinger(s, np.zeros(3), "dirichlet")
    expected = np.array([2.0 - np.sqrt(2.0), 2.0, 2.0 + np.sqrt(2.0)])
    assert np.max(np.abs(spec.eigenvalues - expected)) <= 1e-10


def test_constant_potential_shifts_spectrum():
    s = build_grid_space(1, 1.0, 16)
    base = build_schrodinger(s, np.zeros(s.n), "dirichlet")
    shifted = build_schrodinger(s, np.full(s.n, 5.0), "dirichlet")
    assert np.allclose(shifted.eigenvalues, base.eigenvalues + 5.0, atol=1e-10)
    # eigenvectors agree up to sign
    dots = np.abs(np.sum(base.eigenvectors * shifted.eigenvectors * s.weight[:, None], axis=0))
    assert np.allclose(dots, 1.0, atol=1e-8)


def test_periodic_zero_mode(periodic64):
    assert abs(periodic64.eigenvalues[0]) <= 1e-10
    v0 = periodic64.eigenvectors[:, 0]
    assert np.max(np.abs(v0 - v0[0])) <= 1e-8 * abs(v0[0])


def test_weighted_orthonormality(dirichlet64):
    assert dirichlet64.orthonormality_residual <= 1e-10


def test_eigen_reconstruction(dirichlet64):
    spec = dirichlet64
    for k in (0, 10, 40, 63):
        phi = spec.eigenvectors[:, k]
        res = spec.apply_generator(phi) - spec.eigenvalues[k] * phi
        assert np.max(np.abs(res)) <= 1e-8 * max(spec.eigenvalues[k], 1.0) * np.max(np.abs(phi))


def test_weighted_space_operator_self_adjoint():
    s = build_grid_space(1, 1.0, 32, weight_spec=("power", 0.5))
    spec = build_schrodinger(s, np.abs(s.coords[:, 0]), "dirichlet")
    assert spec.orthonormality_residual <= 1e-9
    assert np.all(spec.eigenvalues >= 0)


def test_rejects_bad_inputs(random12):
    with pytest.raises(ValueError):
        build_schrodinger(random12, np.zeros(random12.n))  # not a grid build
    s = build_grid_space(1, 1.0, 8)
    with pytest.raises(ValueError):
        build_schrodinger(s, -np.ones(s.n))
    with pytest.raises(ValueError):
        build_schrodinger(s, np.zeros(s.n), bc="newton")


# -- kernel slices ----------------------------------------------------------------

def test_one_point_kernels_closed_form(one_point):
    # weight one, potential one: scalar semigroups
    assert abs(heat_kernel(one_point, 1.0)[0, 0] - np.exp(-1.0)) <= 1e-12
    assert abs(qt_kernel(one_point, 1.0)[0, 0] - (-np.exp(-1.0))) <= 1e-12
    assert abs(poisson_kernel(one_point, 1.0)[0, 0] - np.exp(-1.0)) <= 1e-12


def test_one_point_poisson_quadrature_oracle(one_point):
    # independent high-resolution quadrature of the defining integral
    val = poisson_kernel(one_point, 1.0, method="quadrature")[0, 0]
    # substitute s = u^2 to remove the sqrt singularity for the oracle
    oracle, err = quad(
        lambda u: 2.0 * np.exp(-u * u) * np.exp(-1.0 / (4 * u * u)), 0, np.inf
    )
    oracle /= np.sqrt(np.pi)
    assert err < 1e-8
    assert abs(oracle - np.exp(-1.0)) <= 1e-12  # closed form of the integral
    assert abs(val - oracle) <= 1e-6


def test_heat_identity_at_tiny_scale(dirichlet64, rng):
    spec = dirichlet64
    h = spec.space.grid.h
    f = rng.uniform(-1, 1, size=spec.n)
    fam = KernelFamily(spec, "heat", np.array([1e-4 * h]))
    out = fam.apply(1e-4 * h, f)
    assert np.max(np.abs(out - f)) <= 1e-6


def test_periodic_conservation(periodic64):
    fam = KernelFamily(periodic64, "heat", default_scale_grid(periodic64.space))
    for t in (0.1, 1.0, 10.0):
        assert np.max(np.abs(fam.row_integrals(t) - 1.0)) <= 1e-10


def test_heat_submarkov_dirichlet(dirichlet64):
    for t in (0.05, 0.5, 2.0):
        k = heat_kernel(dirichlet64, t)
        assert k.min() >= -1e-12
        rows = k @ dirichlet64.space.weight
        assert rows.max() <= 1.0 + 1e-10
        assert rows.min() >= -1e-12


def test_kernel_weighted_symmetry(dirichlet64):
    for kind, builder in (("heat", heat_kernel), ("qt", qt_kernel), ("poisson", poisson_kernel)):
        k = builder(dirichlet64, 0.7)
        assert np.max(np.abs(k - k.T)) <= 1e-10 * max(np.max(np.abs(k)), 1.0)


def test_spectral_mapping(dirichlet64):
    spec = dirichlet64
    t = 0.437
    for k in (0, 21, 63):
        lam = spec.eigenvalues[k]
        phi = spec.eigenvectors[:, k]
        scale = np.max(np.abs(phi))
        heat = KernelFamily(spec, "heat", np.array([t])).apply(t, phi)
        assert np.max(np.abs(heat - np.exp(-t * t * lam) * phi)) <= 1e-9 * scale
        pois = KernelFamily(spec, "poisson", np.array([t])).apply(t, phi)
        assert np.max(np.abs(pois - np.exp(-t * np.sqrt(lam)) * phi)) <= 1e-9 * scale
        qt = KernelFamily(spec, "qt", np.array([t])).apply(t, phi)
        assert np.max(np.abs(qt + t * t * lam * np.exp(-t * t * lam) * phi)) <= 1e-9 * scale


def test_qt_matches_finite_difference(dirichlet64):
    spec = dirichlet64
    grid = default_scale_grid(spec.space)
    for t in grid[8:-8:8]:
        t = float(t)
        s = t * t
        ds = 1e-4 * s
        q = qt_kernel(spec, t)
        lam = spec.eigenvalues
        fd = s * (
            spec.kernel_from_factors(np.exp(-(s + ds) * lam))
            - spec.kernel_from_factors(np.exp(-(s - ds) * lam))
        ) / (2 * ds)
        assert np.max(np.abs(q - fd)) <= 1e-5 * np.max(np.abs(q))


def test_qt_vanishes_at_small_scale(dirichlet64):
    lam_max = dirichlet64.eigenvalues.max()
    for t in (1e-3, 1e-4):
        assert np.max(np.abs(qt_kernel(dirichlet64, t))) <= t * t * lam_max / min(
            dirichlet64.space.weight
        )


# -- subordination -----------------------------------------------------------------

def test_subordination_weights_normalized():
    s_nodes, a = subordination_nodes()
    assert np.isclose(a.sum(), 1.0, rtol=1e-15)
    assert np.all(s_nodes > 0)


def test_poisson_spectral_vs_quadrature(dirichlet64):
    grid = default_scale_grid(dirichlet64.space)
    worst = 0.0
    for t in grid:
        a = poisson_kernel(dirichlet64, float(t), "spectral")
        b = poisson_kernel(dirichlet64, float(t), "quadrature")
        worst = max(worst, float(np.max(np.abs(a - b))))
    assert worst <= 1e-6


def test_poisson_semigroup_property(dirichlet64, rng):
    f = rng.normal(size=dirichlet64.n)
    t, s = 0.3, 0.45
    fam = KernelFamily(dirichlet64, "poisson", np.array([t, s, t + s]))
    one = fam.apply(s, fam.apply(t, f))
    two = fam.apply(t + s, f)
    assert np.max(np.abs(one - two)) <= 1e-8 * max(np.max(np.abs(f)), 1.0)


# -- kernel bound fits ----------------------------------------------------------------

@pytest.fixture(scope="module")
def rho64(dirichlet64):
    return critical_radius(dirichlet64.space, dirichlet64.potential).rho


def test_fit_monotone_in_gamma(dirichlet64, rho64):
    fam = KernelFamily(dirichlet64, "heat", default_scale_grid(dirichlet64.space)[::4])
    consts = [
        kernel_bound_fit(fam, rho64, "eq31", {"gamma": g, "delta1": 1.0}).constant
        for g in (0.5, 1.0, 2.0)
    ]
    assert consts[0] <= consts[1] <= consts[2]


def test_fit_eq33_periodic_exactly_zero(periodic64):
    rho = np.ones(periodic64.n)
    fam = KernelFamily(periodic64, "heat", default_scale_grid(periodic64.space))
    fit = kernel_bound_fit(fam, rho, "eq33")
    assert fit.constant == 0.0


def test_fit_refinement_stability(rho64, dirichlet64):
    consts = []
    for n in (64, 128):
        s = build_grid_space(1, 1.0, n)
        spec = build_schrodinger(s, np.full(s.n, 4.0), "dirichlet")
        rho = critical_radius(s, spec.potential).rho
        fam = KernelFamily(spec, "heat", default_scale_grid(s)[::4])
        consts.append(kernel_bound_fit(fam, rho, "eq31").constant)
    assert np.isfinite(consts).all()
    ratio = consts[1] / consts[0]
    assert 0.5 <= ratio <= 2.0


def test_fit_smoothness_no_data_at_tiny_t(dirichlet64, rho64):
    h = dirichlet64.space.grid.h
    fam = KernelFamily(dirichlet64, "heat", np.array([h / 4]))  # t/2 < min distance
    fit = kernel_bound_fit(fam, rho64, "eq32")
    assert fit.no_data_scales == (h / 4,)
    assert fit.constant == 0.0


def test_fit_prop51_finite(dirichlet64, rho64):
    fam = KernelFamily(dirichlet64, "heat", default_scale_grid(dirichlet64.space)[::6])
    fit = kernel_bound_fit(fam, rho64, "prop51", {"gauss_c": 2.0, "n_factor": 1.0})
    assert np.isfinite(fit.constant) and fit.constant > 0
    assert set(fit.witness) == {"t", "x", "y"}


def test_fit_qii_and_qiii_run(dirichlet64, rho64):
    fam = KernelFamily(dirichlet64, "qt", default_scale_grid(dirichlet64.space)[4::8])
    for bid in ("qi", "qii", "qiii"):
        fit = kernel_bound_fit(fam, rho64, bid)
        assert np.isfinite(fit.constant)


def test_fit_rejects_bad_exponent(dirichlet64, rho64):
    fam = KernelFamily(dirichlet64, "heat", np.array([0.5]))
    with pytest.raises(ValueError):
        kernel_bound_fit(fam, rho64, "eq31", {"gamma": -1.0})
    with pytest.raises(ValueError):
        kernel_bound_fit(fam, rho64, "nosuchbound")


def test_spectrum_json_schema(dirichlet64):
    doc = dirichlet64.to_json_dict()
    assert list(doc.keys()) == ["bc", "eigenvalues", "h", "n"]
    assert doc["n"] == 64 and doc["bc"] == "dirichlet"
