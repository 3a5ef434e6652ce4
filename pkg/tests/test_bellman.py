"""Bellman function: frozen values, smoothness, mollification, inequalities."""

import math

import numpy as np
import pytest

from rieszlab import bellman as bl

P_VALUES = (2.0, 3.0, 6.0)
M_VALUES = ((1, 1), (1, 2))


def test_params_and_role_swap():
    prm = bl.BellmanParams(3.0)
    assert prm.q == pytest.approx(1.5)
    assert prm.gamma == pytest.approx(1.5 * 0.5 / 8.0)
    # p < 2 swaps into the conjugate exponent
    swapped = bl.BellmanParams(1.5)
    assert swapped.p == pytest.approx(3.0)
    assert swapped.q == pytest.approx(1.5)
    assert 1.0 < prm.q <= 2.0 <= prm.p
    assert 0.0 < prm.gamma <= 0.25
    with pytest.raises(ValueError):
        bl.BellmanParams(1.0)
    with pytest.raises(ValueError):
        bl.BellmanParams(3.0, kappa=1.0)


def test_beta_zero_and_frozen_value():
    prm = bl.BellmanParams(2.0)
    assert bl.beta(prm, 0.0, 0.0) == 0.0
    # p = 2: gamma = 1/4; lower branch at (1, 2): 1 + 4 + (1/4) * 1 * 2^0
    assert bl.beta(prm, 1.0, 2.0) == pytest.approx(5.25)


def test_beta_rejects_negative_radii():
    with pytest.raises(ValueError):
        bl.beta(bl.BellmanParams(3.0), -0.1, 1.0)


@pytest.mark.parametrize("p", P_VALUES)
def test_branch_agreement_on_interface(p):
    prm = bl.BellmanParams(p)
    rng = np.random.default_rng(0)
    s2 = 10.0 ** rng.uniform(-2, 2, 20)
    s1 = s2 ** (prm.q / prm.p)  # s1^p = s2^q exactly up to roundoff
    lower = prm.p * np.log(s1) <= prm.q * np.log(s2)
    b1 = s1 ** prm.p + s2 ** prm.q + prm.gamma * s1 ** 2 * s2 ** (2 - prm.q)
    b2 = (s1 ** prm.p + s2 ** prm.q + prm.gamma
          * ((2 / prm.p) * s1 ** prm.p + (2 / prm.q - 1) * s2 ** prm.q))
    assert np.allclose(b1, b2, rtol=1e-12)
    assert np.allclose(bl.beta(prm, s1, s2), np.where(lower, b1, b2), rtol=1e-12)


@pytest.mark.parametrize("p", P_VALUES)
def test_c1_matching_across_interface(p):
    prm = bl.BellmanParams(p)
    rng = np.random.default_rng(1)
    for _ in range(20):
        s2 = float(10.0 ** rng.uniform(-1, 1))
        s1 = s2 ** (prm.q / prm.p)
        eps = 1e-7 * s1
        lo = bl.beta_derivatives(prm, s1 - eps, s2)
        hi = bl.beta_derivatives(prm, s1 + eps, s2)
        for a, b in zip(lo[:2], hi[:2]):  # first derivatives only (C^1)
            assert float(a) == pytest.approx(float(b), rel=1e-5)


@pytest.mark.parametrize("m1,m2", M_VALUES)
def test_biradiality_under_rotations(m1, m2):
    prm = bl.BellmanParams(3.0, m1=m1, m2=m2)
    rng = np.random.default_rng(2)
    for _ in range(20):
        z = rng.standard_normal(m1)
        e = rng.standard_normal(m2)
        # random orthogonal transforms per block (sign flip when 1-d)
        uz = np.linalg.qr(rng.standard_normal((m1, m1)))[0]
        ue = np.linalg.qr(rng.standard_normal((m2, m2)))[0]
        b0 = bl.bellman_B(prm, z, e)
        b1 = bl.bellman_B(prm, uz @ z, ue @ e)
        assert b1 == pytest.approx(b0, rel=1e-12)
        assert bl.bellman_B(prm, z, -e) == pytest.approx(b0, rel=1e-14)


def test_b_nonnegative_everywhere_sampled():
    rng = np.random.default_rng(3)
    for p in P_VALUES:
        prm = bl.BellmanParams(p, m1=1, m2=2)
        z, e = bl.sample_points(rng, 1, 2, 2000)
        assert np.min(bl.bellman_B(prm, z, e)) >= 0.0


@pytest.mark.parametrize("p", P_VALUES)
def test_size_bound_unmollified(p):
    prm = bl.BellmanParams(p)
    rng = np.random.default_rng(4)
    s1 = 10.0 ** rng.uniform(-3, 2, 100000)
    s2 = 10.0 ** rng.uniform(-3, 2, 100000)
    vals = bl.beta(prm, s1, s2)
    cap = (1.0 + prm.gamma) * (s1 ** prm.p + s2 ** prm.q)
    assert np.all(vals >= 0.0)
    assert np.all(vals <= cap * (1.0 + 1e-12))


@pytest.mark.parametrize("p", P_VALUES)
def test_gradient_signs(p):
    prm = bl.BellmanParams(p)
    rng = np.random.default_rng(5)
    s1 = 10.0 ** rng.uniform(-3, 2, 10000)
    s2 = 10.0 ** rng.uniform(-3, 2, 10000)
    b1, b2, *_ = bl.beta_derivatives(prm, s1, s2)
    assert np.min(b1) >= 0.0
    assert np.min(b2) >= 0.0


def test_grad_fd_matches_analytic():
    prm = bl.BellmanParams(3.0, m1=1, m2=2)
    rng = np.random.default_rng(6)
    for _ in range(10):
        z, e = bl.sample_points(rng, 1, 2, 1, avoid_singular=prm)
        g_fd = bl.grad_B(prm, z[0], e[0])
        g_an = bl.grad_B_analytic(prm, z[0], e[0])
        assert np.max(np.abs(g_fd - g_an)) < 1e-6 * (1.0 + np.max(np.abs(g_an)))


def test_grad_vanishes_on_zeta_axis_symmetry():
    # radial symmetry forces the zeta-gradient to vanish at zeta = 0
    prm = bl.BellmanParams(4.0, m1=1, m2=2)
    g = bl.grad_B_analytic(prm, np.zeros(1), np.array([0.5, 0.5]))
    assert g[0] == 0.0


def test_hess_fd_cross_validates_quadratic_form():
    prm = bl.BellmanParams(3.0, m1=1, m2=2)
    z = np.array([0.8])
    e = np.array([0.4, -0.9])
    H = bl.hess_B(prm, z, e)
    rng = np.random.default_rng(7)
    s1, s2 = np.linalg.norm(z), np.linalg.norm(e)
    for _ in range(5):
        w = rng.standard_normal(3)
        u1 = w[0] * np.sign(z[0])
        u2 = float(w[1:] @ (e / s2))
        w2 = float(np.linalg.norm(w[1:] - u2 * (e / s2)))
        qf = bl.hess_quadratic_form(prm, s1, s2, u1, 0.0, u2, w2)
        assert float(w @ H @ w) == pytest.approx(float(qf), rel=1e-5)


def test_hess_directional_second_difference():
    prm = bl.BellmanParams(6.0, m1=1, m2=1)
    z, e = np.array([1.2]), np.array([0.7])
    xi = np.concatenate([z, e])
    rng = np.random.default_rng(8)
    H = bl.hess_B(prm, z, e)
    for _ in range(5):
        w = rng.standard_normal(2)
        h = 1e-5
        fp = bl.bellman_B(prm, (xi + h * w)[:1], (xi + h * w)[1:])
        f0 = bl.bellman_B(prm, z, e)
        fm = bl.bellman_B(prm, (xi - h * w)[:1], (xi - h * w)[1:])
        fd = (fp - 2 * f0 + fm) / h ** 2
        assert fd == pytest.approx(float(w @ H @ w), rel=1e-4)


def test_hess_guard_near_singular_set():
    prm = bl.BellmanParams(3.0, m1=1, m2=1)
    with pytest.raises(bl.SingularRegionError):
        bl.hess_B(prm, np.array([0.5]), np.array([1e-9]))


@pytest.mark.parametrize("p", P_VALUES)
@pytest.mark.parametrize("m1,m2", M_VALUES)
def test_hess_am_gm_margin(p, m1, m2):
    prm = bl.BellmanParams(p, m1=m1, m2=m2)
    rep = bl.check_hess_lower(prm, n_points=10000, seed=10)
    assert rep["worst_exact"] >= -1e-8
    assert rep["worst_sampled"] >= -1e-8


def test_hess_degenerate_direction_nonnegative():
    # w2 = 0 reduces the requirement to plain nonnegativity
    prm = bl.BellmanParams(3.0, m1=1, m2=1)
    rng = np.random.default_rng(11)
    z, e = bl.sample_points(rng, 1, 1, 3000, avoid_singular=prm)
    s1 = np.abs(z[:, 0])
    s2 = np.abs(e[:, 0])
    q = bl.hess_quadratic_form(prm, s1, s2, np.ones_like(s1), 0.0,
                               np.zeros_like(s2), 0.0)
    assert np.min(q) >= 0.0


# -- mollification --------------------------------------------------------------------


def test_ball_rule_mass_is_one():
    for m in (1, 2, 3):
        rule = bl.ball_rule(m, 24)
        assert float(np.sum(rule.probs)) == pytest.approx(1.0, abs=1e-14)
        assert np.all(np.linalg.norm(rule.points, axis=1) < 1.0)
    with pytest.raises(ValueError):
        bl.ball_rule(4)


def test_mollified_b_converges_pointwise():
    rng = np.random.default_rng(12)
    z, e = bl.sample_points(rng, 1, 2, 50)
    prev = None
    b0 = bl.bellman_B(bl.BellmanParams(3.0, m1=1, m2=2), z, e)
    for kappa in (0.1, 0.01):
        prm = bl.BellmanParams(3.0, m1=1, m2=2, kappa=kappa)
        bk = np.asarray(bl.mollified_B(prm, z, e))
        err = np.max(np.abs(bk - b0))
        assert np.min(bk) >= 0.0
        if prev is not None:
            assert err < prev
        prev = err


@pytest.mark.parametrize("p", P_VALUES)
def test_mollified_size_bound(p):
    prm = bl.BellmanParams(p, m1=1, m2=2, kappa=0.05)
    rng = np.random.default_rng(13)
    z, e = bl.sample_points(rng, 1, 2, 1000)
    s1 = np.linalg.norm(z, axis=-1)
    s2 = np.linalg.norm(e, axis=-1)
    bk = np.asarray(bl.mollified_B(prm, z, e))
    cap = (1.0 + prm.gamma) * ((s1 + prm.kappa) ** prm.p + (s2 + prm.kappa) ** prm.q)
    assert np.all(2.0 * bk <= cap * (1.0 + 1e-10))
    assert np.all(bk >= 0.0)


def test_e_kappa_two_resolutions_agree():
    prm = bl.BellmanParams(3.0, m1=1, m2=1, kappa=0.05)
    rng = np.random.default_rng(14)
    # stay a few ball radii away from the kinks so the integrand is smooth
    z, e = bl.sample_points(rng, 1, 1, 30, avoid_singular=prm,
                            min_distance=5 * prm.kappa)
    e1 = np.asarray(bl.E_kappa(prm, z, e, bl.ball_rule(2, 48)))
    e2 = np.asarray(bl.E_kappa(prm, z, e, bl.ball_rule(2, 96)))
    assert np.all(np.abs(e1 - e2) <= 1e-6 * (1.0 + np.abs(e2)))
    # at the origin the kink cones pass through the ball, so convergence is
    # only algebraic; fine resolutions still agree to 1e-6
    o1 = float(bl.E_kappa(prm, np.zeros((1, 1)), np.zeros((1, 1)), bl.ball_rule(2, 96)))
    o2 = float(bl.E_kappa(prm, np.zeros((1, 1)), np.zeros((1, 1)), bl.ball_rule(2, 192)))
    assert abs(o1 - o2) < 1e-6 * (1.0 + abs(o2))


def test_e_kappa_at_origin_nonnegative():
    # <grad B(xi), xi> >= 0 pointwise makes the origin value of the
    # convolved radial pairing nonnegative
    prm = bl.BellmanParams(3.0, m1=1, m2=2, kappa=0.05)
    rule = bl.ball_rule(3, 16)
    val = bl.grad_Bkappa_dot_xi(prm, np.zeros((1, 1)), np.zeros((1, 2)), rule)
    ek = bl.E_kappa(prm, np.zeros((1, 1)), np.zeros((1, 2)), rule)
    assert float(val) == pytest.approx(0.0, abs=1e-15)
    assert float(val) + prm.kappa * float(ek) >= -1e-12


@pytest.mark.parametrize("p", P_VALUES)
@pytest.mark.parametrize("m1,m2", M_VALUES)
def test_radial_gradient_margin_unmollified(p, m1, m2):
    prm = bl.BellmanParams(p, m1=m1, m2=m2)
    rep = bl.check_grad_radial(prm, n_points=10000, seed=15)
    assert rep["worst"] >= -1e-6


@pytest.mark.parametrize("p", P_VALUES)
def test_radial_gradient_margin_mollified(p):
    prm = bl.BellmanParams(p, m1=1, m2=2, kappa=0.01)
    rep = bl.check_grad_radial(prm, n_points=1500, seed=16,
                               rule=bl.ball_rule(3, 16))
    assert rep["worst"] >= -1e-6
    assert rep["E_shape_constant"] is not None
    assert rep["E_shape_constant"] < 100.0  # finite shape constant (reported)


def test_margin_invariant_under_eta_sign_flip():
    prm = bl.BellmanParams(3.0, m1=1, m2=1)
    rng = np.random.default_rng(17)
    z, e = bl.sample_points(rng, 1, 1, 200, avoid_singular=prm)
    m1v = bl.hess_margin_exact(prm, np.abs(z[:, 0]), np.abs(e[:, 0]))
    m2v = bl.hess_margin_exact(prm, np.abs(z[:, 0]), np.abs(-e[:, 0]))
    assert np.allclose(m1v, m2v, rtol=0, atol=0)


def test_mollified_requires_positive_kappa():
    prm = bl.BellmanParams(3.0, m1=1, m2=1)
    with pytest.raises(ValueError):
        bl.mollified_B(prm, np.zeros((1, 1)), np.ones((1, 1)))
    with pytest.raises(ValueError):
        bl.E_kappa(prm, np.zeros((1, 1)), np.ones((1, 1)))
