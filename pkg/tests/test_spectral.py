"""Product systems and operators: projections, semigroups, Riesz transforms."""

import math

import numpy as np
import pytest

from rieszlab import spectral as sp
from rieszlab.orthosys import make_axis
from rieszlab.quadgrid import GridFn, ResolutionError, inner, lp_norm, tensor_grid

ALL_SYSTEMS = [
    ("hermite-poly", {}),
    ("laguerre-poly", {"alpha": 0.0}),
    ("jacobi-poly", {"alpha": 0.5, "beta": 0.0}),
    ("hermite-func", {}),
    ("laguerre-func-h", {"alpha": 1.5}),
    ("laguerre-func-conv", {"alpha": 0.5}),
    ("jacobi-func", {"alpha": 1.5, "beta": 1.5}),
]


def make_system(tag, params, d):
    return sp.product_system([make_axis(tag, **params)] * d)


def unit_coeff(system, N, index):
    data = np.zeros((N + 1,) * system.d)
    data[index] = 1.0
    return sp.CoeffFn(system, data)


# -- projection / synthesis ----------------------------------------------------------


def test_project_unit_vector():
    system = make_system("hermite-poly", {}, 2)
    grid = sp.default_grid(system, 5)
    f = unit_coeff(system, 5, (3, 1))
    vals = sp.synth(f, grid)
    back = sp.project(lambda X: vals.values, system, 5, grid)
    ref = np.zeros((6, 6))
    ref[3, 1] = 1.0
    assert np.max(np.abs(back.data - ref)) < 1e-12


def test_project_linearity():
    system = make_system("laguerre-poly", {"alpha": 0.0}, 1)
    grid = sp.default_grid(system, 6)
    f = sp.CoeffFn(system, 2.0 * np.eye(7)[2] - 3.0 * np.eye(7)[5])
    vals = sp.synth(f, grid)
    back = sp.project(lambda X: vals.values, system, 6, grid)
    assert back.data[2] == pytest.approx(2.0, rel=1e-12)
    assert back.data[5] == pytest.approx(-3.0, rel=1e-12)


def test_project_coordinate_function():
    # x = phi_1 / sqrt(2) in the Gaussian system
    system = make_system("hermite-poly", {}, 1)
    grid = sp.default_grid(system, 4)
    c = sp.project(lambda X: X[:, 0], system, 4, grid)
    assert c.data[1] == pytest.approx(1.0 / math.sqrt(2.0), rel=1e-13)
    assert np.max(np.abs(np.delete(c.data, 1))) < 1e-12


@pytest.mark.parametrize("tag,params", ALL_SYSTEMS)
def test_roundtrip_identity(tag, params):
    system = make_system(tag, params, 2)
    grid = sp.default_grid(system, 5)
    rng = np.random.default_rng(3)
    f = sp.random_coeff(system, 5, rng)
    vals = sp.synth(f, grid)
    back = sp.project(lambda X: vals.values, system, 5, grid)
    assert np.max(np.abs(back.data - f.data)) < 1e-9


def test_project_resolution_guard():
    system = make_system("hermite-poly", {}, 1)
    grid = tensor_grid(system.axes, 8)
    with pytest.raises(ResolutionError):
        sp.project(lambda X: X[:, 0], system, 6, grid)


# -- Pi -------------------------------------------------------------------------------


def test_pi_kills_constants_when_bottom_eigenvalue_vanishes():
    system = make_system("hermite-poly", {}, 2)
    f = unit_coeff(system, 3, (0, 0))
    assert sp.apply_Pi(f).norm2() == 0.0


def test_pi_is_identity_for_positive_bottom_eigenvalue():
    system = make_system("hermite-func", {}, 2)
    rng = np.random.default_rng(0)
    f = sp.random_coeff(system, 3, rng)
    assert np.array_equal(sp.apply_Pi(f).data, f.data)
    assert not system.has_zero_mode


def test_pi_lp_bound_on_probability_systems():
    # removal of the mean has L^p norm at most 2
    for tag, params in ALL_SYSTEMS[:3]:
        system = make_system(tag, params, 1)
        grid = tensor_grid(system.axes, 64)
        rng = np.random.default_rng(11)
        worst = 0.0
        for _ in range(40):
            f = sp.random_coeff(system, 6, rng)
            for p in (1.5, 3.0):
                n1 = lp_norm(sp.synth(sp.apply_Pi(f), grid), p)
                n0 = lp_norm(sp.synth(f, grid), p)
                worst = max(worst, n1 / n0)
        assert worst <= 2.0 + 1e-10


# -- powers of L / semigroups ---------------------------------------------------------


def test_l_power_identity_and_eigenvalue():
    system = make_system("jacobi-poly", {"alpha": 0.5, "beta": 0.0}, 2)
    rng = np.random.default_rng(1)
    f = sp.random_coeff(system, 4, rng)
    assert np.allclose(sp.apply_L_power(f, 0.0).data, f.data)
    g = unit_coeff(system, 4, (2, 1))
    lam = system.axes[0].lambda_(2) + system.axes[1].lambda_(1)
    assert np.allclose(sp.apply_L_power(g, 1.0).data, lam * g.data)


def test_l_half_power_roundtrip_on_pi_range():
    system = make_system("laguerre-poly", {"alpha": 0.0}, 2)
    rng = np.random.default_rng(2)
    f = sp.apply_Pi(sp.random_coeff(system, 4, rng))
    h = sp.apply_L_power(sp.apply_L_power(f, -0.5), 0.5)
    assert np.max(np.abs(h.data - f.data)) < 1e-12


def test_l_negative_power_singular_mode():
    system = make_system("hermite-poly", {}, 1)
    f = unit_coeff(system, 3, (0,))
    # Pi removes the offending mode, so the composed operator returns zero
    assert sp.apply_L_power(f, -0.5).norm2() == 0.0


def test_semigroup_law_and_derivative():
    system = make_system("laguerre-func-h", {"alpha": 1.5}, 2)
    rng = np.random.default_rng(4)
    f = sp.random_coeff(system, 4, rng)
    p2 = sp.apply_Pt(sp.apply_Pt(f, 1.0), 1.0)
    assert np.max(np.abs(p2.data - sp.apply_Pt(f, 2.0).data)) < 1e-12
    assert np.allclose(sp.apply_Pt(f, 0.0).data, f.data)
    k = (2, 1)
    g = unit_coeff(system, 4, k)
    lam = system.lambda_tensor(4)[k]
    got = sp.apply_Pt(g, 1.0).data[k]
    assert got == pytest.approx(math.exp(-math.sqrt(lam)), rel=1e-14)
    dt = sp.dt_Pt(g, 0.7).data[k]
    assert dt == pytest.approx(-math.sqrt(lam) * math.exp(-0.7 * math.sqrt(lam)),
                               rel=1e-14)
    with pytest.raises(ValueError):
        sp.apply_Pt(f, -0.1)


# -- delta and frakd --------------------------------------------------------------------


def test_delta_on_hermite_tensor():
    system = make_system("hermite-poly", {}, 2)
    grid = sp.default_grid(system, 3)
    f = unit_coeff(system, 3, (1, 0))
    got = sp.apply_delta(f, 0, grid)
    ref = sp.synth(unit_coeff(system, 3, (0, 0)), grid)
    assert np.max(np.abs(got.values - math.sqrt(2.0) * ref.values)) < 1e-12


def test_delta_annihilates_ground_state():
    for tag, params in ALL_SYSTEMS:
        system = make_system(tag, params, 2)
        grid = sp.default_grid(system, 2)
        f = unit_coeff(system, 2, (0, 0))
        for i in range(2):
            assert np.max(np.abs(sp.apply_delta(f, i, grid).values)) == 0.0


def test_frakd_equals_delta_minus_q():
    # frakd h_1 = delta h_1 - x h_1 pointwise (oracle: finite differences)
    system = make_system("hermite-func", {}, 1)
    grid = sp.default_grid(system, 4)
    f = unit_coeff(system, 4, (1,))
    got = sp.apply_frakd(f, 0, grid)
    x = grid.columns[:, 0]
    h = 1e-6
    ax = system.axes[0]
    fd = (ax.eval_phi_table(1, x + h)[1] - ax.eval_phi_table(1, x - h)[1]) / (2 * h)
    assert np.max(np.abs(got.values - fd)) < 1e-8


# -- frame analysis and Q_t ----------------------------------------------------------------


@pytest.mark.parametrize("tag,params", ALL_SYSTEMS)
def test_frame_analysis(tag, params):
    system = make_system(tag, params, 2)
    N = 4
    grid = sp.default_grid(system, N)
    m = (2, 1)
    f = unit_coeff(system, N, m)
    dvals = sp.apply_delta(f, 0, grid)
    frame = sp.analyze_image(lambda X: dvals.values, system, 0, N, grid)
    gap = system.gap_tensor(N, 0)[m]
    # unnormalized image analyzes to sqrt(lambda_k - a) at the same index
    assert frame.data[m] == pytest.approx(math.sqrt(gap), rel=1e-10)
    other = frame.data.copy()
    other[m] = 0.0
    assert np.max(np.abs(other)) < 1e-9  # cross-orthogonality

    # unit frame vector analyzes to the unit vector
    gvals = sp.synth_image(sp.ImageFrameFn(system, 0, np.eye(N + 1)[2][:, None]
                                           * np.eye(N + 1)[1][None, :]), grid)
    back = sp.analyze_image(lambda X: gvals.values, system, 0, N, grid)
    assert back.data[2, 1] == pytest.approx(1.0, rel=1e-10)


def test_frame_parseval():
    system = make_system("laguerre-func-conv", {"alpha": 0.5}, 2)
    grid = sp.default_grid(system, 4)
    rng = np.random.default_rng(9)
    g = sp.random_frame(system, 1, 4, rng)
    vals = sp.synth_image(g, grid)
    assert lp_norm(vals, 2) == pytest.approx(g.norm2(), rel=1e-10)


def test_qt_eigen_consistency_and_law():
    system = make_system("jacobi-func", {"alpha": 1.5, "beta": 1.5}, 2)
    N = 4
    grid = sp.default_grid(system, N)
    m = (1, 2)
    f = unit_coeff(system, N, m)
    dvals = sp.apply_delta(f, 0, grid)
    frame = sp.analyze_image(lambda X: dvals.values, system, 0, N, grid)
    lam = system.lambda_tensor(N)[m]
    q1 = sp.apply_Qt(frame, 0.9)
    assert q1.data[m] == pytest.approx(math.exp(-0.9 * math.sqrt(lam)) * frame.data[m],
                                       rel=1e-9)
    rng = np.random.default_rng(2)
    g = sp.random_frame(system, 1, N, rng)
    q11 = sp.apply_Qt(sp.apply_Qt(g, 1.0), 1.0)
    assert np.max(np.abs(q11.data - sp.apply_Qt(g, 2.0).data)) < 1e-12
    assert np.allclose(sp.apply_Qt(g, 0.0).data, g.data)
    dq = sp.dt_Qt(sp.ImageFrameFn(system, 0, f.data), 0.5)
    assert dq.data[m] == pytest.approx(-math.sqrt(lam) * math.exp(-0.5 * math.sqrt(lam)),
                                       rel=1e-12)
    with pytest.raises(ValueError):
        sp.apply_Qt(g, -1.0)


# -- Riesz transforms -------------------------------------------------------------------------


def test_riesz_ou_shifts_down_with_unit_norm():
    system = make_system("hermite-poly", {}, 1)
    grid = sp.default_grid(system, 8)
    for k in range(1, 8):
        f = unit_coeff(system, 8, (k,))
        r = sp.riesz(f, 0, grid)
        ref = sp.synth(unit_coeff(system, 8, (k - 1,)), grid)
        assert np.max(np.abs(r.values - ref.values)) < 1e-10
        assert lp_norm(r, 2) == pytest.approx(1.0, rel=1e-12)


def test_riesz_kills_pi_complement():
    system = make_system("laguerre-poly", {"alpha": 0.0}, 2)
    grid = sp.default_grid(system, 3)
    f = unit_coeff(system, 3, (0, 0))
    assert np.max(np.abs(sp.riesz_vector(f, grid).values)) == 0.0


def test_riesz_harmonic_oscillator_example():
    # first-axis transform of the (1,0) mode has coefficient sqrt(2/(2+2))
    system = make_system("hermite-func", {}, 2)
    grid = sp.default_grid(system, 3)
    f = unit_coeff(system, 3, (1, 0))
    r = sp.riesz(f, 0, grid)
    ref = sp.synth(unit_coeff(system, 3, (0, 0)), grid)
    assert np.max(np.abs(r.values - math.sqrt(0.5) * ref.values)) < 1e-12


@pytest.mark.parametrize("tag,params", ALL_SYSTEMS)
def test_riesz_vector_l2_contraction(tag, params):
    system = make_system(tag, params, 2)
    grid = sp.default_grid(system, 5)
    rng = np.random.default_rng(8)
    for _ in range(30):
        f = sp.random_coeff(system, 5, rng)
        rv = sp.riesz_vector(f, grid)
        assert lp_norm(rv, 2) <= f.norm2() * (1.0 + 1e-10)


# -- assumption predicates over grids -----------------------------------------------------------


@pytest.mark.parametrize("tag,params", ALL_SYSTEMS)
def test_a2_predicate_on_grid(tag, params):
    system = make_system(tag, params, 2)
    grid = sp.default_grid(system, 6)
    K = system.K
    assert math.isfinite(K)
    q2 = system.q_sum_squares(grid.columns)
    r = system.r_values(grid.columns)
    assert np.all(q2 <= K * r * (1.0 + 1e-12) + 1e-12)


def test_k_values_per_family():
    assert make_system("hermite-poly", {}, 3).K == 0.0
    assert make_system("laguerre-poly", {"alpha": 0.0}, 2).K == 0.0
    assert make_system("jacobi-poly", {"alpha": 0.5, "beta": 0.0}, 2).K == 0.0
    assert make_system("hermite-func", {}, 3).K == 1.0
    assert make_system("laguerre-func-conv", {"alpha": 0.5}, 2).K == 1.0
    # (alpha + 1/2)/(alpha - 1/2) at alpha = 3/2
    assert make_system("laguerre-func-h", {"alpha": 1.5}, 2).K == pytest.approx(2.0)
    assert math.isinf(make_system("laguerre-func-h", {"alpha": 0.5}, 1).K)
    # max of (2a+1)/(2a-1), (2b+1)/(2b-1) at a = b = 3/2
    assert make_system("jacobi-func", {"alpha": 1.5, "beta": 1.5}, 2).K == pytest.approx(2.0)
    assert math.isinf(make_system("jacobi-func", {"alpha": 0.5, "beta": 1.5}, 1).K)


# -- adjoint pairing (commutation of the quadratic form) ---------------------------------------


@pytest.mark.parametrize("tag,params", ALL_SYSTEMS)
def test_delta_pairing_matches_adjoint_route(tag, params):
    """<delta phi_k, delta phi_m> = <delta* delta phi_k, phi_m> by quadrature.

    delta* is applied through its closed form -p f' - (p' + p w'/w) f + q f
    with f = delta phi_k and f' by finite differences.
    """
    ax = make_axis(tag, **params)
    grid = tensor_grid([ax], 64)
    x = grid.axes[0].nodes
    w = grid.axes[0].weights
    for k, m in ((1, 1), (2, 2), (1, 3), (4, 2)):
        dk = ax.ladder_values(k, x)
        dm = ax.ladder_values(m, x)
        lhs = float(np.sum(w * dk * dm))
        # step scaled by p(x): the natural local scale near degenerate edges
        h = 1e-6 * np.asarray(ax.p(x)) / math.sqrt(max(ax.lambda_(k), 1.0))
        dkp = ax.ladder_values(k, x + h)
        dkm = ax.ladder_values(k, x - h)
        fprime = (dkp - dkm) / (2 * h)
        delta_star = (-ax.p(x) * fprime
                      - (ax.p_prime(x) + ax.p(x) * ax.logw_prime(x)) * dk
                      + ax.q(x) * dk)
        phm = ax.eval_phi_table(m, x)[m]
        rhs = float(np.sum(w * delta_star * phm))
        assert lhs == pytest.approx(rhs, rel=1e-8, abs=1e-8)
