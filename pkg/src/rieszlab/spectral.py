"""Tensor-product spectral representations and the associated operators.

A ``ProductSystem`` is a d-fold tensor product of axis systems.  Finitely
supported expansions in the product eigenbasis are held as dense coefficient
boxes (``CoeffFn``); expansions in the normalized delta-image frame of one
axis are held as ``ImageFrameFn``.  On top of these the module provides the
spectral calculus

    Pi   -- removal of the ground coefficient when the bottom eigenvalue is 0
    L^s  -- coefficientwise multiplication by lambda_k^s
    P_t  -- subordinated (Poisson-type) semigroup exp(-t sqrt(L))
    Q_t  -- its analogue on the image frame of one axis
    R_i  -- the Riesz transform delta_i L^(-1/2) Pi

together with grid realizations of delta_i and frakd_i = p_i d/dx_i built
from the one-axis ladder formulas.  All operators act exactly on the
truncated span; test functions are always chosen inside it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce

import numpy as np

from .orthosys import AxisSystem, FamilyTag
from .quadgrid import GridFn, ResolutionError, TensorGrid, tensor_grid

__all__ = [
    "ProductSystem",
    "CoeffFn",
    "ImageFrameFn",
    "SingularModeError",
    "product_system",
    "default_grid",
    "project",
    "synth",
    "apply_Pi",
    "apply_L_power",
    "apply_Pt",
    "dt_Pt",
    "apply_delta",
    "apply_frakd",
    "analyze_image",
    "apply_Qt",
    "dt_Qt",
    "synth_image",
    "frakd_image",
    "riesz",
    "riesz_vector",
    "random_coeff",
    "random_frame",
]

ZERO_EIG_TOL = 1e-12


class SingularModeError(ValueError):
    """Negative power of L applied to a surviving zero eigenvalue."""


@dataclass(frozen=True)
class ProductSystem:
    """d-fold tensor product of one-axis systems."""

    axes: tuple[AxisSystem, ...]

    @property
    def d(self) -> int:
        return len(self.axes)

    @property
    def A(self) -> float:
        return sum(ax.a for ax in self.axes)

    @property
    def Lambda0(self) -> float:
        return sum(ax.lambda_(0) for ax in self.axes)

    @property
    def has_zero_mode(self) -> bool:
        return self.Lambda0 <= ZERO_EIG_TOL

    @property
    def K(self) -> float:
        """Smallest constant with sum_i q_i^2 <= K r provable axis by axis.

        0 when every q_i vanishes; 1 for the Hermite-function and
        convolution-Laguerre axes (where q_i^2 = r_i); the parameter ratio
        max (a+1/2)/(a-1/2) for Hermite-type Laguerre axes; and the analogous
        max of (2a+1)/(2a-1), (2b+1)/(2b-1) for trigonometric Jacobi axes.
        Returns ``inf`` when no finite constant exists in the given range.
        """
        req = 0.0
        for ax in self.axes:
            t = ax.tag
            if t in (FamilyTag.HERMITE_POLY, FamilyTag.LAGUERRE_POLY,
                     FamilyTag.JACOBI_POLY):
                continue
            if t in (FamilyTag.HERMITE_FUNC, FamilyTag.LAGUERRE_FUNC_CONV):
                req = max(req, 1.0)
            elif t is FamilyTag.LAGUERRE_FUNC_H:
                if ax.alpha <= 0.5:
                    return math.inf
                req = max(req, (ax.alpha + 0.5) / (ax.alpha - 0.5))
            else:  # trigonometric Jacobi
                if ax.alpha <= 0.5 or ax.beta <= 0.5:
                    return math.inf
                req = max(req,
                          (2.0 * ax.alpha + 1.0) / (2.0 * ax.alpha - 1.0),
                          (2.0 * ax.beta + 1.0) / (2.0 * ax.beta - 1.0))
        return req

    def lambda_tensor(self, N: int) -> np.ndarray:
        """lambda_k over the coefficient box, shape (N+1,)*d."""
        lam = np.zeros((N + 1,) * self.d)
        for i, ax in enumerate(self.axes):
            lam_i = np.array([ax.lambda_(k) for k in range(N + 1)])
            shape = [1] * self.d
            shape[i] = N + 1
            lam = lam + lam_i.reshape(shape)
        return lam

    def gap_tensor(self, N: int, i: int) -> np.ndarray:
        """lambda^i_{k_i} - a_i over the box (the squared delta-image norms)."""
        ax = self.axes[i]
        gap = np.array([ax.lambda_(k) - ax.a for k in range(N + 1)])
        shape = [1] * self.d
        shape[i] = N + 1
        return np.broadcast_to(gap.reshape(shape), (N + 1,) * self.d).copy()

    def r_values(self, columns: np.ndarray) -> np.ndarray:
        """Potential r(x) = sum_i r_i(x_i) at node columns (size, d)."""
        return sum(ax.r_part(columns[:, i]) for i, ax in enumerate(self.axes))

    def q_sum_squares(self, columns: np.ndarray) -> np.ndarray:
        return sum(np.asarray(ax.q(columns[:, i])) ** 2
                   for i, ax in enumerate(self.axes))


def product_system(axes) -> ProductSystem:
    return ProductSystem(tuple(axes))


def default_grid(system: ProductSystem, N: int, min_nodes: int = 24) -> TensorGrid:
    return tensor_grid(system.axes, max(2 * N, min_nodes))


@dataclass(frozen=True)
class CoeffFn:
    """Finitely supported expansion in the product eigenbasis.

    ``data`` has shape (N+1,)*d; entry ``data[k]`` is the coefficient of
    phi_k.  Parseval: the squared L^2 norm is ``sum(data**2)``.
    """

    system: ProductSystem
    data: np.ndarray

    @property
    def N(self) -> int:
        return self.data.shape[0] - 1

    def norm2(self) -> float:
        return float(np.sqrt(np.sum(self.data * self.data)))

    def with_data(self, data: np.ndarray) -> "CoeffFn":
        return CoeffFn(self.system, data)


@dataclass(frozen=True)
class ImageFrameFn:
    """Expansion in the orthonormal frame {c_k^i delta_i phi_k : k_i >= 1}."""

    system: ProductSystem
    axis: int
    data: np.ndarray

    @property
    def N(self) -> int:
        return self.data.shape[0] - 1

    def norm2(self) -> float:
        return float(np.sqrt(np.sum(self.data * self.data)))

    def with_data(self, data: np.ndarray) -> "ImageFrameFn":
        return ImageFrameFn(self.system, self.axis, data)


# -- per-axis value tables -----------------------------------------------------------


def _axis_tables(system: ProductSystem, N: int, grid: TensorGrid):
    """Cached per-axis tables of phi, delta phi, frakd phi, frakd delta phi."""
    key = ("tables", system, N)
    if key in grid._cache:
        return grid._cache[key]
    tabs = []
    for i, ax in enumerate(system.axes):
        x = grid.axes[i].nodes
        phi = ax.eval_phi_table(N, x)
        lad = np.stack([ax.ladder_values(k, x) for k in range(N + 1)])
        dlad = np.stack([ax.frakd_ladder_values(k, x) for k in range(N + 1)])
        q = np.asarray(ax.q(x))
        frakd = lad - q * phi
        tabs.append({"phi": phi, "lad": lad, "dlad": dlad, "frakd": frakd,
                     "q": q, "w": grid.axes[i].weights})
    grid._cache[key] = tabs
    return tabs


def _contract(data: np.ndarray, mats) -> np.ndarray:
    out = data
    for m in mats:
        out = np.tensordot(out, m, axes=([0], [0]))
    return out


def _synth_values(system, data, grid, kinds) -> np.ndarray:
    """Synthesize a tensor field; kinds[i] picks the axis-i table."""
    N = data.shape[0] - 1
    tabs = _axis_tables(system, N, grid)
    mats = [tabs[i][kinds[i]] for i in range(system.d)]
    return np.ravel(_contract(data, mats))


def _analysis(system, values, grid, kinds, N) -> np.ndarray:
    tabs = _axis_tables(system, N, grid)
    mats = [(tabs[i][kinds[i]] * tabs[i]["w"]).T for i in range(system.d)]
    return _contract(values.reshape(grid.shape), mats)


def _check_resolution(system: ProductSystem, N: int, grid: TensorGrid) -> None:
    if min(grid.shape) < 2 * N:
        raise ResolutionError(
            f"grid resolution {grid.shape} below 2N = {2 * N} per axis")


# -- analysis / synthesis --------------------------------------------------------------


def project(evaluator, system: ProductSystem, N: int, grid: TensorGrid) -> CoeffFn:
    """Coefficients <f, phi_k> for k in the (N+1)^d box, by tensor quadrature."""
    _check_resolution(system, N, grid)
    values = np.asarray(evaluator(grid.columns), dtype=float)
    data = _analysis(system, values, grid, ["phi"] * system.d, N)
    return CoeffFn(system, data)


def synth(f: CoeffFn, grid: TensorGrid) -> GridFn:
    return GridFn(grid, _synth_values(f.system, f.data, grid, ["phi"] * f.system.d))


# -- diagonal spectral calculus ---------------------------------------------------------


def apply_Pi(f: CoeffFn) -> CoeffFn:
    """Remove the ground coefficient when 0 is an eigenvalue; identity otherwise."""
    if not f.system.has_zero_mode:
        return f
    data = f.data.copy()
    data[(0,) * f.system.d] = 0.0
    return f.with_data(data)


def apply_L_power(f: CoeffFn, s: float) -> CoeffFn:
    """Coefficientwise multiplication by lambda_k^s (composed with Pi for s < 0)."""
    lam = f.system.lambda_tensor(f.N)
    if s >= 0:
        return f.with_data(f.data * lam ** s)
    g = apply_Pi(f)
    mask = lam > ZERO_EIG_TOL
    if np.any(g.data[~mask] != 0.0):
        raise SingularModeError("negative power of L on a zero eigenvalue mode")
    out = np.zeros_like(g.data)
    out[mask] = g.data[mask] * lam[mask] ** s
    return g.with_data(out)


def apply_Pt(f: CoeffFn, t: float) -> CoeffFn:
    if t < 0:
        raise ValueError("semigroup time must be >= 0")
    lam = f.system.lambda_tensor(f.N)
    return f.with_data(f.data * np.exp(-t * np.sqrt(lam)))


def dt_Pt(f: CoeffFn, t: float) -> CoeffFn:
    if t < 0:
        raise ValueError("semigroup time must be >= 0")
    s = np.sqrt(f.system.lambda_tensor(f.N))
    return f.with_data(f.data * (-s) * np.exp(-t * s))


# -- delta, frakd on expansions -----------------------------------------------------------


def apply_delta(f: CoeffFn, i: int, grid: TensorGrid) -> GridFn:
    """delta_i f on the grid, assembled from the ladder formulas."""
    kinds = ["phi"] * f.system.d
    kinds[i] = "lad"
    return GridFn(grid, _synth_values(f.system, f.data, grid, kinds))


def apply_frakd(f: CoeffFn, i: int, grid: TensorGrid) -> GridFn:
    """frakd_i f = delta_i f - q_i f, nodewise."""
    kinds = ["phi"] * f.system.d
    kinds[i] = "frakd"
    return GridFn(grid, _synth_values(f.system, f.data, grid, kinds))


# -- the image frame ------------------------------------------------------------------------


def frame_c(system: ProductSystem, i: int, N: int) -> np.ndarray:
    """Normalizations c_k^i = (lambda^i_{k_i} - a_i)^(-1/2) (0 at k_i = 0)."""
    gap = system.gap_tensor(N, i)
    c = np.zeros_like(gap)
    mask = gap > 0
    c[mask] = gap[mask] ** -0.5
    return c


def analyze_image(evaluator, system: ProductSystem, i: int, N: int,
                  grid: TensorGrid) -> ImageFrameFn:
    """Frame coefficients <g, c_k^i delta_i phi_k> for k_i >= 1."""
    _check_resolution(system, N, grid)
    values = np.asarray(evaluator(grid.columns), dtype=float)
    kinds = ["phi"] * system.d
    kinds[i] = "lad"
    raw = _analysis(system, values, grid, kinds, N)
    return ImageFrameFn(system, i, raw * frame_c(system, i, N))


def apply_Qt(g: ImageFrameFn, t: float) -> ImageFrameFn:
    if t < 0:
        raise ValueError("semigroup time must be >= 0")
    lam = g.system.lambda_tensor(g.N)
    return g.with_data(g.data * np.exp(-t * np.sqrt(lam)))


def dt_Qt(g: ImageFrameFn, t: float) -> ImageFrameFn:
    if t < 0:
        raise ValueError("semigroup time must be >= 0")
    s = np.sqrt(g.system.lambda_tensor(g.N))
    return g.with_data(g.data * (-s) * np.exp(-t * s))


def synth_image(g: ImageFrameFn, grid: TensorGrid) -> GridFn:
    """Values of sum_k g_k c_k^i delta_i phi_k."""
    kinds = ["phi"] * g.system.d
    kinds[g.axis] = "lad"
    data = g.data * frame_c(g.system, g.axis, g.N)
    return GridFn(grid, _synth_values(g.system, data, grid, kinds))


def frakd_image(g: ImageFrameFn, j: int, grid: TensorGrid) -> GridFn:
    """frakd_j applied to the synthesized frame expansion."""
    kinds = ["phi"] * g.system.d
    if j == g.axis:
        kinds[j] = "dlad"
    else:
        kinds[g.axis] = "lad"
        kinds[j] = "frakd"
    data = g.data * frame_c(g.system, g.axis, g.N)
    return GridFn(grid, _synth_values(g.system, data, grid, kinds))


# -- Riesz transforms ---------------------------------------------------------------------------


def riesz(f: CoeffFn, i: int, grid: TensorGrid) -> GridFn:
    """R_i f = sum over the reduced index set of lambda_k^(-1/2) f_k delta_i phi_k."""
    h = apply_L_power(f, -0.5)
    return apply_delta(h, i, grid)


def riesz_vector(f: CoeffFn, grid: TensorGrid) -> GridFn:
    h = apply_L_power(f, -0.5)
    comps = [apply_delta(h, i, grid).values for i in range(f.system.d)]
    return GridFn(grid, np.stack(comps))


# -- random draws ------------------------------------------------------------------------------


def random_coeff(system: ProductSystem, N: int, rng: np.random.Generator,
                 pi_range: bool = False, total_degree: int | None = None) -> CoeffFn:
    """Unit-norm random coefficients on the box (optionally Pi-range / degree-capped)."""
    data = rng.standard_normal((N + 1,) * system.d)
    if total_degree is not None:
        idx = np.indices(data.shape).sum(axis=0)
        data[idx > total_degree] = 0.0
    f = CoeffFn(system, data)
    if pi_range:
        f = apply_Pi(f)
    n = f.norm2()
    if n == 0.0:
        raise ValueError("degenerate random draw")
    return f.with_data(f.data / n)


def random_frame(system: ProductSystem, i: int, N: int, rng: np.random.Generator,
                 total_degree: int | None = None) -> ImageFrameFn:
    """Unit-norm random frame coefficients (supported on k_i >= 1)."""
    data = rng.standard_normal((N + 1,) * system.d)
    if total_degree is not None:
        idx = np.indices(data.shape).sum(axis=0)
        data[idx > total_degree] = 0.0
    sl = [slice(None)] * system.d
    sl[i] = 0
    data[tuple(sl)] = 0.0
    g = ImageFrameFn(system, i, data)
    n = g.norm2()
    if n == 0.0:
        raise ValueError("degenerate random draw")
    return g.with_data(g.data / n)


# -- realized matrices (for norm estimation) ---------------------------------------------------


def synth_matrix(system: ProductSystem, N: int, grid: TensorGrid,
                 kinds=None) -> np.ndarray:
    """Dense (grid.size, (N+1)^d) matrix of basis values, C-order flattening."""
    tabs = _axis_tables(system, N, grid)
    if kinds is None:
        kinds = ["phi"] * system.d
    mats = [tabs[i][kinds[i]].T for i in range(system.d)]  # (n_i, N+1)
    return reduce(np.kron, mats)


def riesz_matrices(system: ProductSystem, N: int, grid: TensorGrid) -> list[np.ndarray]:
    """Columns of R_i over the flattened coefficient box, one matrix per axis."""
    lam = system.lambda_tensor(N).ravel()
    scale = np.zeros_like(lam)
    mask = lam > ZERO_EIG_TOL
    scale[mask] = lam[mask] ** -0.5
    out = []
    for i in range(system.d):
        kinds = ["phi"] * system.d
        kinds[i] = "lad"
        out.append(synth_matrix(system, N, grid, kinds) * scale)
    return out
