"""The Nazarov-Treil Bellman function and its pointwise inequalities.

For p >= 2, q = p/(p-1) and gamma = q(q-1)/8, the bi-radial function

    B(zeta, eta) = beta(|zeta|, |eta|) / 2,
    beta(s1, s2) = s1^p + s2^q + gamma * { s1^2 s2^(2-q)          if s1^p <= s2^q
                                         { (2/p) s1^p + (2/q-1) s2^q   otherwise

is C^1 everywhere, C^2 off the set {eta = 0} u {|zeta|^p = |eta|^q} u
{zeta = 0}, and satisfies the size bound 2B <= (1+gamma)(s1^p + s2^q), the
gradient sign conditions, and the convexity-type lower bound whose
arithmetic-geometric-mean consequence

    <Hess B(xi) w, w> >= gamma |w1| |w2|

is what the differential inequality consumes.  The module implements the
two-branch formula with analytic radial derivatives, finite-difference
cross-checks, mollification over the unit-ball bump in up to three
dimensions, and the correction term E_kappa entering the mollified radial
gradient bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "BellmanParams",
    "BallRule",
    "SingularRegionError",
    "beta",
    "beta_derivatives",
    "bellman_B",
    "grad_B",
    "hess_B",
    "singular_distance",
    "hess_quadratic_form",
    "hess_margin_exact",
    "ball_rule",
    "mollified_B",
    "E_kappa",
    "grad_Bkappa_dot_xi",
    "check_hess_lower",
    "check_grad_radial",
    "sample_points",
]


class SingularRegionError(ValueError):
    """Second derivatives requested too close to the non-smooth set."""


@dataclass(frozen=True)
class BellmanParams:
    """Exponent pair, coupling constant and argument dimensions.

    For user p < 2 the roles of p and q are swapped so that the stored p
    is always >= 2 (the two-sided estimate is symmetric under the swap).
    """

    p: float
    m1: int = 1
    m2: int = 1
    kappa: float = 0.0
    q: float = field(init=False)
    gamma: float = field(init=False)

    def __post_init__(self):
        if self.p <= 1.0 or not np.isfinite(self.p):
            raise ValueError(f"p must lie in (1, inf), got {self.p}")
        p = self.p
        if p < 2.0:
            p = p / (p - 1.0)
        q = p / (p - 1.0)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "gamma", q * (q - 1.0) / 8.0)
        if not (0.0 <= self.kappa < 1.0):
            raise ValueError("kappa must lie in [0, 1)")

    @property
    def m(self) -> int:
        return self.m1 + self.m2


def _branch1(s1, s2, q):
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(s2 > 0, s1 * s1 * s2 ** (2.0 - q), 0.0)


def beta(params: BellmanParams, s1, s2):
    """Two-branch radial profile; branches agree on s1^p = s2^q."""
    s1 = np.asarray(s1, dtype=float)
    s2 = np.asarray(s2, dtype=float)
    if np.any(s1 < 0) or np.any(s2 < 0):
        raise ValueError("radial arguments must be >= 0")
    p, q, g = params.p, params.q, params.gamma
    lower = s1 ** p <= s2 ** q
    t = np.where(lower, _branch1(s1, s2, q),
                 (2.0 / p) * s1 ** p + (2.0 / q - 1.0) * s2 ** q)
    return s1 ** p + s2 ** q + g * t


def beta_derivatives(params: BellmanParams, s1, s2):
    """Radial derivatives (b1, b2, b11, b12, b22) of beta, branchwise.

    Values on the non-smooth set are the one-sided branch values; callers
    that need honest second derivatives must stay away from it.
    """
    s1 = np.asarray(s1, dtype=float)
    s2 = np.asarray(s2, dtype=float)
    p, q, g = params.p, params.q, params.gamma
    lower = s1 ** p <= s2 ** q
    with np.errstate(divide="ignore", invalid="ignore"):
        pow2 = np.where(s2 > 0, s2 ** (2.0 - q), 0.0)
        pow1 = np.where(s2 > 0, s2 ** (1.0 - q), 0.0)
        pow0 = np.where(s2 > 0, s2 ** (-q), 0.0)
        t1 = np.where(lower, 2.0 * s1 * pow2, 2.0 * s1 ** (p - 1.0))
        t2 = np.where(lower, (2.0 - q) * s1 * s1 * pow1, (2.0 - q) * s2 ** (q - 1.0))
        t11 = np.where(lower, 2.0 * pow2, 2.0 * (p - 1.0) * s1 ** (p - 2.0))
        t12 = np.where(lower, 2.0 * (2.0 - q) * s1 * pow1, 0.0)
        t22 = np.where(lower, (2.0 - q) * (1.0 - q) * s1 * s1 * pow0,
                       (2.0 - q) * (q - 1.0) * s2 ** (q - 2.0))
        b1 = p * s1 ** (p - 1.0) + g * t1
        b2 = q * s2 ** (q - 1.0) + g * t2
        b11 = p * (p - 1.0) * s1 ** (p - 2.0) + g * t11
        b22 = q * (q - 1.0) * s2 ** (q - 2.0) + g * t22
    return b1, b2, b11, g * t12, b22


def _radii(zeta, eta):
    zeta = np.atleast_2d(np.asarray(zeta, dtype=float))
    eta = np.atleast_2d(np.asarray(eta, dtype=float))
    return zeta, eta, np.linalg.norm(zeta, axis=-1), np.linalg.norm(eta, axis=-1)


def bellman_B(params: BellmanParams, zeta, eta):
    """B(zeta, eta) = beta(|zeta|, |eta|) / 2, vectorized over leading axes."""
    _, _, s1, s2 = _radii(zeta, eta)
    out = 0.5 * beta(params, s1, s2)
    return out if out.size > 1 else float(out[0])


def singular_distance(params: BellmanParams, zeta, eta):
    """Relative distance to {eta=0} u {|zeta|^p = |eta|^q} u {zeta=0}."""
    _, _, s1, s2 = _radii(zeta, eta)
    scale = 1.0 + s1 + s2
    d_interface = np.abs(s1 ** params.p - s2 ** params.q) / (
        1.0 + s1 ** params.p + s2 ** params.q)
    return np.minimum(np.minimum(s1 / scale, s2 / scale), d_interface)


def grad_B(params: BellmanParams, zeta, eta, step: float | None = None):
    """Gradient of B by central differences (matches the radial closed form)."""
    zeta = np.asarray(zeta, dtype=float)
    eta = np.asarray(eta, dtype=float)
    xi = np.concatenate([np.atleast_1d(zeta), np.atleast_1d(eta)])
    h = step if step is not None else 1e-5 * (1.0 + np.linalg.norm(xi))
    out = np.empty(xi.size)
    for j in range(xi.size):
        e = np.zeros(xi.size)
        e[j] = h
        xp, xm = xi + e, xi - e
        bp = bellman_B(params, xp[:params.m1], xp[params.m1:])
        bm = bellman_B(params, xm[:params.m1], xm[params.m1:])
        out[j] = (bp - bm) / (2.0 * h)
    return out


def grad_B_analytic(params: BellmanParams, zeta, eta):
    """Gradient from the radial derivatives (zero radial part at a zero radius)."""
    zeta = np.atleast_1d(np.asarray(zeta, dtype=float))
    eta = np.atleast_1d(np.asarray(eta, dtype=float))
    s1 = np.linalg.norm(zeta)
    s2 = np.linalg.norm(eta)
    b1, b2, *_ = beta_derivatives(params, s1, s2)
    gz = 0.5 * float(b1) * zeta / s1 if s1 > 0 else np.zeros_like(zeta)
    ge = 0.5 * float(b2) * eta / s2 if s2 > 0 else np.zeros_like(eta)
    return np.concatenate([gz, ge])


def hess_B(params: BellmanParams, zeta, eta, step: float | None = None,
           min_distance: float = 1e-4):
    """Hessian of B by central differences; guarded near the non-smooth set."""
    if float(singular_distance(params, zeta, eta)) < min_distance:
        raise SingularRegionError("point too close to the non-smooth set")
    zeta = np.asarray(zeta, dtype=float)
    eta = np.asarray(eta, dtype=float)
    xi = np.concatenate([np.atleast_1d(zeta), np.atleast_1d(eta)])
    m = xi.size
    h = step if step is not None else 1e-5 * (1.0 + np.linalg.norm(xi))

    def b_at(y):
        return bellman_B(params, y[:params.m1], y[params.m1:])

    out = np.empty((m, m))
    b0 = b_at(xi)
    for i in range(m):
        ei = np.zeros(m)
        ei[i] = h
        out[i, i] = (b_at(xi + ei) - 2.0 * b0 + b_at(xi - ei)) / h ** 2
        for j in range(i + 1, m):
            ej = np.zeros(m)
            ej[j] = h
            val = (b_at(xi + ei + ej) - b_at(xi + ei - ej)
                   - b_at(xi - ei + ej) + b_at(xi - ei - ej)) / (4.0 * h ** 2)
            out[i, j] = out[j, i] = val
    return out


def hess_quadratic_form(params: BellmanParams, s1, s2, u1, w1, u2, w2):
    """<Hess B . w, w> for w split into radial (u) and tangential (|w|) parts."""
    b1, b2, b11, b12, b22 = beta_derivatives(params, s1, s2)
    with np.errstate(divide="ignore", invalid="ignore"):
        tang1 = np.where(np.asarray(s1) > 0, b1 / s1, b11)
        tang2 = np.where(np.asarray(s2) > 0, b2 / s2, b22)
    return 0.5 * (b11 * u1 ** 2 + tang1 * w1 ** 2 + b22 * u2 ** 2
                  + tang2 * w2 ** 2 + 2.0 * b12 * u1 * u2)


def hess_margin_exact(params: BellmanParams, s1, s2, n_theta: int = 96):
    """min over directions of <Hess B w, w> / (|w1||w2|) minus gamma.

    The minimum over all w with fixed block moduli reduces to a scan over
    the radial/tangential mixing angles of the two blocks (the cross term
    couples only the radial parts); the modulus ratio is then optimized in
    closed form by the arithmetic-geometric mean.  Vectorized over
    radius pairs when m1 = 1; returns the pointwise minimum as an array
    matching the broadcast shape of (s1, s2) (or a float for scalars).
    """
    s1 = np.asarray(s1, dtype=float)
    s2 = np.asarray(s2, dtype=float)
    if params.m1 > 1:
        return _hess_margin_scan(params, s1, s2, n_theta)
    b1, b2, b11, b12, b22 = beta_derivatives(params, s1, s2)
    a1 = 0.5 * b11
    if params.m2 > 1:
        th2 = np.linspace(0.0, 0.5 * math.pi, n_theta)
        c2, t2 = np.cos(th2), np.sin(th2)
        a2 = 0.5 * (b22[..., None] * c2 ** 2 + (b2 / s2)[..., None] * t2 ** 2)
        cross = np.abs(b12)[..., None] * c2
        vals = 2.0 * np.sqrt(np.maximum(a1[..., None] * a2, 0.0)) - cross
        bad = np.minimum(a1[..., None], a2)
        vals = np.where(bad < -1e-14, bad, vals - params.gamma)
        out = np.min(vals, axis=-1)
    else:
        a2 = 0.5 * b22
        vals = 2.0 * np.sqrt(np.maximum(a1 * a2, 0.0)) - np.abs(b12)
        bad = np.minimum(a1, a2)
        out = np.where(bad < -1e-14, bad, vals - params.gamma)
    return float(out) if out.ndim == 0 else out


def _hess_margin_scan(params, s1, s2, n_theta):
    b1, b2, b11, b12, b22 = beta_derivatives(params, s1, s2)
    th1 = np.linspace(0.0, 0.5 * math.pi, n_theta)
    th2 = np.linspace(0.0, 0.5 * math.pi, n_theta) if params.m2 > 1 else np.array([0.0])
    c1, t1v = np.cos(th1)[:, None], np.sin(th1)[:, None]
    c2, t2v = np.cos(th2)[None, :], np.sin(th2)[None, :]
    a1 = 0.5 * (b11 * c1 ** 2 + (b1 / s1) * t1v ** 2)
    a2 = 0.5 * (b22 * c2 ** 2 + (b2 / s2) * t2v ** 2)
    cross = np.abs(b12) * c1 * c2
    vals = 2.0 * np.sqrt(np.maximum(a1 * a2, 0.0)) - cross
    if np.any(a1 < -1e-14) or np.any(a2 < -1e-14):
        return float(min(np.min(a1), np.min(a2)))
    return float(np.min(vals)) - params.gamma


# -- mollification ------------------------------------------------------------------


@dataclass(frozen=True)
class BallRule:
    """Product Gauss-Legendre rule restricted to the unit ball with bump mass 1."""

    points: np.ndarray  # (Q, m)
    probs: np.ndarray   # (Q,), sums to 1 against the bump

    @property
    def m(self) -> int:
        return self.points.shape[1]


def ball_rule(m: int, n1d: int = 32) -> BallRule:
    """Quadrature of the normalized bump exp(-1/(1-|y|^2)) on the unit ball."""
    if m > 3:
        raise ValueError("mollification supported for m1 + m2 <= 3 only")
    x, w = np.polynomial.legendre.leggauss(n1d)
    pts = np.stack([c.ravel() for c in np.meshgrid(*([x] * m), indexing="ij")],
                   axis=-1)
    ww = np.prod(np.stack([c.ravel() for c in np.meshgrid(*([w] * m), indexing="ij")],
                          axis=-1), axis=-1)
    r2 = np.sum(pts * pts, axis=-1)
    inside = r2 < 1.0
    pts, ww, r2 = pts[inside], ww[inside], r2[inside]
    bump = np.exp(-1.0 / (1.0 - r2))
    probs = ww * bump
    probs = probs / probs.sum()
    return BallRule(pts, probs)


def _beta_at_points(params, zeta, eta):
    s1 = np.linalg.norm(np.atleast_2d(zeta), axis=-1)
    s2 = np.linalg.norm(np.atleast_2d(eta), axis=-1)
    return beta(params, s1, s2)


def mollified_B(params: BellmanParams, zeta, eta, rule: BallRule | None = None):
    """B_kappa(xi) = average of B over the kappa-ball bump around xi."""
    if params.kappa <= 0.0:
        raise ValueError("mollified_B requires kappa > 0")
    rule = rule or ball_rule(params.m)
    zeta = np.atleast_2d(np.asarray(zeta, dtype=float))
    eta = np.atleast_2d(np.asarray(eta, dtype=float))
    k = params.kappa
    zs = zeta[:, None, :] - k * rule.points[None, :, :params.m1]
    es = eta[:, None, :] - k * rule.points[None, :, params.m1:]
    s1 = np.linalg.norm(zs, axis=-1)
    s2 = np.linalg.norm(es, axis=-1)
    vals = 0.5 * beta(params, s1, s2)
    out = vals @ rule.probs
    return out if out.size > 1 else float(out[0])


def _grad_dot(params, zs, es, vecz, vece):
    """<grad B(z, e), (vecz, vece)> batched over the last-but-one axis."""
    s1 = np.linalg.norm(zs, axis=-1)
    s2 = np.linalg.norm(es, axis=-1)
    b1, b2, *_ = beta_derivatives(params, s1, s2)
    with np.errstate(divide="ignore", invalid="ignore"):
        rad1 = np.where(s1 > 0, b1 / np.where(s1 > 0, s1, 1.0), 0.0)
        rad2 = np.where(s2 > 0, b2 / np.where(s2 > 0, s2, 1.0), 0.0)
    dot1 = np.sum(zs * vecz, axis=-1)
    dot2 = np.sum(es * vece, axis=-1)
    return 0.5 * (rad1 * dot1 + rad2 * dot2)


def E_kappa(params: BellmanParams, zeta, eta, rule: BallRule | None = None):
    """Correction term -integral <grad B(xi - kappa s), s> psi(s) ds."""
    if params.kappa <= 0.0:
        raise ValueError("E_kappa requires kappa > 0")
    rule = rule or ball_rule(params.m)
    zeta = np.atleast_2d(np.asarray(zeta, dtype=float))
    eta = np.atleast_2d(np.asarray(eta, dtype=float))
    k = params.kappa
    zs = zeta[:, None, :] - k * rule.points[None, :, :params.m1]
    es = eta[:, None, :] - k * rule.points[None, :, params.m1:]
    vals = _grad_dot(params, zs, es,
                     np.broadcast_to(rule.points[None, :, :params.m1], zs.shape),
                     np.broadcast_to(rule.points[None, :, params.m1:], es.shape))
    out = -(vals @ rule.probs)
    return out if out.size > 1 else float(out[0])


def grad_Bkappa_dot_xi(params: BellmanParams, zeta, eta, rule: BallRule | None = None):
    """<grad B_kappa(xi), xi> through the convolution of grad B."""
    if params.kappa <= 0.0:
        raise ValueError("requires kappa > 0")
    rule = rule or ball_rule(params.m)
    zeta = np.atleast_2d(np.asarray(zeta, dtype=float))
    eta = np.atleast_2d(np.asarray(eta, dtype=float))
    k = params.kappa
    zs = zeta[:, None, :] - k * rule.points[None, :, :params.m1]
    es = eta[:, None, :] - k * rule.points[None, :, params.m1:]
    vals = _grad_dot(params, zs, es,
                     np.broadcast_to(zeta[:, None, :], zs.shape),
                     np.broadcast_to(eta[:, None, :], es.shape))
    out = vals @ rule.probs
    return out if out.size > 1 else float(out[0])


# -- sampled property checks -----------------------------------------------------------


def sample_points(rng: np.random.Generator, m1: int, m2: int, n: int,
                  avoid_singular: BellmanParams | None = None,
                  min_distance: float = 1e-3):
    """Random argument pairs with radii spread over several decades."""
    out_z, out_e = [], []
    kept = 0
    while kept < n:
        k = max(n - kept, 64)
        z = rng.standard_normal((k, m1)) * 10.0 ** rng.uniform(-2, 1.5, (k, 1))
        e = rng.standard_normal((k, m2)) * 10.0 ** rng.uniform(-2, 1.5, (k, 1))
        if avoid_singular is None:
            return z, e
        keep = singular_distance(avoid_singular, z, e) >= min_distance
        out_z.append(z[keep])
        out_e.append(e[keep])
        kept += int(np.count_nonzero(keep))
    return (np.concatenate(out_z)[:n], np.concatenate(out_e)[:n])


def check_hess_lower(params: BellmanParams, n_points: int = 10000,
                     n_dirs: int = 8, seed: int = 0) -> dict:
    """Worst margins of <Hess B w, w> >= gamma |w1||w2| at kappa = 0.

    Reports the exact direction-scan margin and a sampled-direction margin
    at random nonsingular points.
    """
    rng = np.random.default_rng(seed)
    z, e = sample_points(rng, params.m1, params.m2, n_points,
                         avoid_singular=params)
    s1 = np.linalg.norm(z, axis=-1)
    s2 = np.linalg.norm(e, axis=-1)
    if params.m1 == 1:
        worst_exact = float(np.min(hess_margin_exact(params, s1, s2)))
    else:
        worst_exact = min(hess_margin_exact(params, a, b)
                          for a, b in zip(s1, s2))
    # sampled directions through the same radial form
    u1 = rng.standard_normal((n_points, n_dirs))
    v1 = np.abs(rng.standard_normal((n_points, n_dirs))) if params.m1 > 1 else 0.0
    u2 = rng.standard_normal((n_points, n_dirs))
    v2 = np.abs(rng.standard_normal((n_points, n_dirs))) if params.m2 > 1 else 0.0
    quad = hess_quadratic_form(params, s1[:, None], s2[:, None], u1, v1, u2, v2)
    mod1 = np.sqrt(u1 ** 2 + np.square(v1))
    mod2 = np.sqrt(u2 ** 2 + np.square(v2))
    sampled = quad - params.gamma * mod1 * mod2
    return {"worst_exact": worst_exact,
            "worst_sampled": float(np.min(sampled)),
            "n_points": n_points}


def check_grad_radial(params: BellmanParams, n_points: int = 10000,
                      seed: int = 0, rule: BallRule | None = None) -> dict:
    """Margins of <grad B_k(xi), xi> + kappa E_k(xi) >= gamma |zeta||eta|.

    With kappa = 0 the unmollified bound is checked instead.  Also fits the
    growth shape of |E_kappa| and reports the fitted constant (not asserted).
    """
    rng = np.random.default_rng(seed)
    z, e = sample_points(rng, params.m1, params.m2, n_points,
                         avoid_singular=params if params.kappa == 0.0 else None)
    s1 = np.linalg.norm(z, axis=-1)
    s2 = np.linalg.norm(e, axis=-1)
    if params.kappa == 0.0:
        b1, b2, *_ = beta_derivatives(params, s1, s2)
        lhs = 0.5 * (b1 * s1 + b2 * s2)
        margins = lhs - params.gamma * s1 * s2
        return {"worst": float(np.min(margins)), "n_points": n_points,
                "E_shape_constant": None}
    rule = rule or ball_rule(params.m)
    margins = np.empty(n_points)
    e_vals = np.empty(n_points)
    chunk = max(1, 2_000_000 // max(rule.points.shape[0], 1))
    for lo in range(0, n_points, chunk):
        hi = min(lo + chunk, n_points)
        g = grad_Bkappa_dot_xi(params, z[lo:hi], e[lo:hi], rule)
        ek = E_kappa(params, z[lo:hi], e[lo:hi], rule)
        e_vals[lo:hi] = np.atleast_1d(ek)
        margins[lo:hi] = (np.atleast_1d(g) + params.kappa * e_vals[lo:hi]
                          - params.gamma * s1[lo:hi] * s2[lo:hi])
    shape = (s1 ** (params.p - 1.0) + s2 + s2 ** (params.q - 1.0)
             + params.kappa ** (params.q - 1.0))
    c_fit = float(np.max(np.abs(e_vals) / shape))
    return {"worst": float(np.min(margins)), "n_points": n_points,
            "E_shape_constant": c_fit}
