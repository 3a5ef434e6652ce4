"""Quadrature rules, tensor grids, norms: exactness and frozen values."""

import math

import numpy as np
import pytest
from scipy.special import gamma as gamma_fn

from rieszlab.orthosys import make_axis
from rieszlab.quadgrid import (
    ConvergenceError,
    GridFn,
    converge_norm,
    gauss_rule,
    golub_welsch,
    inner,
    lp_norm,
    tensor_grid,
)

POLY_SYSTEMS = [
    ("hermite-poly", {}),
    ("laguerre-poly", {"alpha": 0.5}),
    ("jacobi-poly", {"alpha": 0.5, "beta": -0.25}),
]

FUNC_SYSTEMS = [
    ("hermite-func", {}),
    ("laguerre-func-h", {"alpha": 1.5}),
    ("laguerre-func-conv", {"alpha": 0.5}),
    ("jacobi-func", {"alpha": 1.5, "beta": 0.5}),
]


# -- frozen rule examples ---------------------------------------------------------------


def test_hermite_one_point_rule():
    rule = gauss_rule(make_axis("hermite-poly"), 1)
    assert rule.nodes[0] == pytest.approx(0.0, abs=1e-14)
    assert rule.weights[0] == pytest.approx(1.0, rel=1e-14)


def test_legendre_two_point_rule():
    rule = gauss_rule(make_axis("jacobi-poly", alpha=0.0, beta=0.0), 2)
    assert np.allclose(np.sort(rule.nodes), [-1 / math.sqrt(3), 1 / math.sqrt(3)])
    assert np.allclose(rule.weights, [0.5, 0.5])


def test_laguerre_one_point_rule():
    rule = gauss_rule(make_axis("laguerre-poly", alpha=0.0), 1)
    assert rule.nodes[0] == pytest.approx(1.0)
    assert rule.weights[0] == pytest.approx(1.0)
    # oracle: the rule must integrate x exactly: int x e^-x dx = 1
    assert float(np.sum(rule.weights * rule.nodes)) == pytest.approx(1.0)


def test_gauss_rule_rejects_zero_points():
    with pytest.raises(ValueError):
        gauss_rule(make_axis("hermite-poly"), 0)


def test_golub_welsch_standalone():
    # two-point rule of the probability Gaussian: nodes +-sqrt(1/2)
    rule = golub_welsch(np.zeros(2), np.array([math.sqrt(0.5)]))
    assert np.allclose(np.sort(rule.nodes), [-math.sqrt(0.5), math.sqrt(0.5)])
    assert np.allclose(rule.weights, [0.5, 0.5])


# -- exactness ----------------------------------------------------------------------------


@pytest.mark.parametrize("tag,params", POLY_SYSTEMS)
def test_moment_exactness(tag, params):
    """Degree <= 2n-1 monomial moments from the n-point rule vs a 4n rule."""
    ax = make_axis(tag, **params)
    n = 12
    rule = gauss_rule(ax, n)
    big = gauss_rule(ax, 4 * n)
    for deg in range(2 * n):
        got = float(np.sum(rule.weights * rule.nodes ** deg))
        ref = float(np.sum(big.weights * big.nodes ** deg))
        # scale against the absolute moment (odd moments of symmetric
        # measures are pure cancellation noise)
        scale = float(np.sum(big.weights * np.abs(big.nodes) ** deg))
        assert abs(got - ref) <= 1e-12 * max(scale, 1.0)


def test_probability_masses():
    for tag, params in POLY_SYSTEMS:
        rule = gauss_rule(make_axis(tag, **params), 24)
        assert np.all(rule.weights > 0.0)
        assert float(np.sum(rule.weights)) == pytest.approx(1.0, rel=1e-13)


@pytest.mark.parametrize("tag,params", FUNC_SYSTEMS)
def test_transformed_rule_integrates_basis_products(tag, params):
    ax = make_axis(tag, **params)
    rule = gauss_rule(ax, 40)
    assert np.all(rule.weights > 0.0)
    table = ax.eval_phi_table(16, rule.nodes)
    gram = (table * rule.weights) @ table.T
    assert np.max(np.abs(gram - np.eye(17))) < 1e-12


def test_laguerre_func_h_moment_oracle():
    # int_0^inf phi_0(x)^2 x^2 dx for alpha: closed form via Gamma functions
    a = 1.5
    ax = make_axis("laguerre-func-h", alpha=a)
    rule = gauss_rule(ax, 30)
    phi0 = ax.eval_phi_table(0, rule.nodes)[0]
    got = float(np.sum(rule.weights * phi0 ** 2 * rule.nodes ** 2))
    # oracle: 2/Gamma(a+1) int x^(2a+3) e^(-x^2) dx = Gamma(a+2)/Gamma(a+1) = a+1
    assert got == pytest.approx(a + 1.0, rel=1e-13)


# -- norms -------------------------------------------------------------------------------


def test_lp_norm_of_constant_is_one_probability():
    grid = tensor_grid([make_axis("hermite-poly")] * 2, 16)
    g = GridFn(grid, np.ones(grid.size))
    for p in (1.5, 2.0, 4.0, 7.0):
        assert lp_norm(g, p) == pytest.approx(1.0, rel=1e-14)


def test_l2_norm_of_basis_elements():
    for tag, params in POLY_SYSTEMS + FUNC_SYSTEMS:
        ax = make_axis(tag, **params)
        grid = tensor_grid([ax], 40)
        vals = ax.eval_phi_table(9, grid.axes[0].nodes)[9]
        assert lp_norm(GridFn(grid, vals), 2) == pytest.approx(1.0, rel=1e-12)


def test_l4_norm_of_first_hermite():
    # oracle: E (sqrt(2) x)^4 under the probability Gaussian = 4 E x^4 = 3
    ax = make_axis("hermite-poly")
    grid = tensor_grid([ax], 32)
    vals = ax.eval_phi_table(1, grid.axes[0].nodes)[1]
    assert lp_norm(GridFn(grid, vals), 4) == pytest.approx(3.0 ** 0.25, rel=1e-13)


def test_lp_norm_rejects_bad_exponent():
    grid = tensor_grid([make_axis("hermite-poly")], 8)
    g = GridFn(grid, np.ones(grid.size))
    for p in (1.0, 0.5, math.inf, math.nan):
        with pytest.raises(ValueError):
            lp_norm(g, p)


def test_vector_gridfn_euclidean_modulus():
    grid = tensor_grid([make_axis("hermite-poly")], 16)
    vals = np.stack([np.full(grid.size, 3.0), np.full(grid.size, 4.0)])
    g = GridFn(grid, vals)
    assert lp_norm(g, 2) == pytest.approx(5.0, rel=1e-14)


def test_inner_product_orthonormality_and_symmetry():
    ax = make_axis("jacobi-poly", alpha=0.5, beta=0.5)
    grid = tensor_grid([ax], 32)
    t = ax.eval_phi_table(6, grid.axes[0].nodes)
    f = GridFn(grid, t[4])
    g = GridFn(grid, t[6])
    assert inner(f, f) == pytest.approx(1.0, rel=1e-12)
    assert abs(inner(f, g)) < 1e-10
    assert inner(f, g) == inner(g, f)


def test_inner_grid_mismatch_raises():
    g1 = tensor_grid([make_axis("hermite-poly")], 8)
    g2 = tensor_grid([make_axis("hermite-poly")], 9)
    with pytest.raises(ValueError):
        inner(GridFn(g1, np.ones(8)), GridFn(g2, np.ones(9)))


def test_ladder_image_inner_product_is_eigenvalue_gap():
    for tag, params in POLY_SYSTEMS + FUNC_SYSTEMS:
        ax = make_axis(tag, **params)
        grid = tensor_grid([ax], 48)
        for k in (1, 4, 9):
            lv = GridFn(grid, ax.ladder_values(k, grid.axes[0].nodes))
            assert inner(lv, lv) == pytest.approx(ax.lambda_(k) - ax.a, rel=1e-10)


def test_tensorization_of_lp_norm():
    ax1 = make_axis("hermite-poly")
    ax2 = make_axis("laguerre-poly", alpha=0.5)
    grid = tensor_grid([ax1, ax2], 24)
    v1 = ax1.eval_phi_table(3, grid.axes[0].nodes)[3]
    v2 = ax2.eval_phi_table(2, grid.axes[1].nodes)[2]
    g = GridFn(grid, np.multiply.outer(v1, v2).ravel())
    p = 4.0
    n1 = lp_norm(GridFn(tensor_grid([ax1], 24), v1), p)
    n2 = lp_norm(GridFn(tensor_grid([ax2], 24), v2), p)
    assert lp_norm(g, p) == pytest.approx(n1 * n2, rel=1e-10)


def test_norm_nondecreasing_in_p_on_probability_systems():
    rng = np.random.default_rng(5)
    for tag, params in POLY_SYSTEMS:
        ax = make_axis(tag, **params)
        grid = tensor_grid([ax], 32)
        table = ax.eval_phi_table(5, grid.axes[0].nodes)
        vals = rng.standard_normal(6) @ table
        norms = [lp_norm(GridFn(grid, vals), p) for p in (1.5, 2.0, 3.0, 4.5, 6.0)]
        assert all(b >= a * (1 - 1e-12) for a, b in zip(norms, norms[1:]))


# -- converge_norm ------------------------------------------------------------------------


def test_converge_norm_polynomial_immediate():
    ax = make_axis("hermite-poly")
    res = converge_norm([ax], lambda X: np.sqrt(2.0) * X[:, 0], 2.0, tol=1e-10)
    assert res.value == pytest.approx(1.0, rel=1e-12)
    assert res.achieved_tol <= 1e-10


def test_converge_norm_cubic_modulus_oracle():
    # oracle: E |sqrt(2) x|^3 under the probability Gaussian = sqrt(8/pi),
    # via the Gamma closed form for absolute Gaussian moments
    oracle = math.sqrt(8.0 / math.pi) ** (1.0 / 3.0)
    ax = make_axis("hermite-poly")
    res = converge_norm([ax], lambda X: np.sqrt(2.0) * X[:, 0], 3.0, tol=1e-8,
                        max_doublings=9)
    assert res.value == pytest.approx(oracle, rel=1e-7)


def test_converge_norm_gamma_moment_oracle():
    # |x|^(3/2) against the gamma measure: Gamma(a + 5/2)/Gamma(a + 1)
    a = 0.5
    oracle = (gamma_fn(a + 2.5) / gamma_fn(a + 1.0)) ** (1.0 / 1.5)
    ax = make_axis("laguerre-poly", alpha=a)
    res = converge_norm([ax], lambda X: X[:, 0], 1.5, tol=1e-8, max_doublings=9)
    assert res.value == pytest.approx(oracle, rel=1e-6)


def test_converge_norm_truncation_independence():
    # Lebesgue-like family: value must be stable under doubling from the start
    ax = make_axis("hermite-func")
    f = lambda X: ax.eval_phi_table(2, X[:, 0])[2]
    r1 = converge_norm([ax], f, 3.0, tol=1e-6, n0=24)
    r2 = converge_norm([ax], f, 3.0, tol=1e-6, n0=48)
    assert r1.value == pytest.approx(r2.value, rel=1e-5)


def test_converge_norm_failure_carries_last_values():
    ax = make_axis("hermite-poly")
    rng = np.random.default_rng(0)
    with pytest.raises(ConvergenceError) as err:
        converge_norm([ax], lambda X: rng.standard_normal(X.shape[0]), 2.0,
                      tol=1e-12, max_doublings=2)
    assert err.value.last is not None
    assert err.value.previous is not None
