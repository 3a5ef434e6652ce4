"""Gauss quadrature, tensor grids, and norms against the product measure.

Rules for the polynomial-measure families come straight from Golub-Welsch
(eigen-decomposition of the symmetric tridiagonal Jacobi matrix).  Rules for
the Lebesgue-like function families are the same Gauss rules pushed through
the change of variables that maps the family onto its auxiliary polynomial
system; the transformed weights absorb the envelope squared and the Jacobian,
so every product of two basis elements (including ladder images) is
integrated exactly.  Tails are inherited from Gauss exactness, no interval
truncation is involved.

Norms with non-even exponents never rely on that exactness; they go through
``converge_norm`` which doubles the node count until the value settles.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .orthosys import AxisSystem

__all__ = [
    "QuadRule",
    "TensorGrid",
    "GridFn",
    "ConvergeResult",
    "ConvergenceError",
    "ResolutionError",
    "golub_welsch",
    "gauss_rule",
    "tensor_grid",
    "lp_norm",
    "inner",
    "converge_norm",
]


class ConvergenceError(RuntimeError):
    """Doubling refinement failed to settle; carries the last two values."""

    def __init__(self, message, last=None, previous=None):
        super().__init__(message)
        self.last = last
        self.previous = previous


class ResolutionError(ValueError):
    """Quadrature resolution too low for the requested degree."""


@dataclass(frozen=True)
class QuadRule:
    """Nodes and mu-weights of a one-axis rule (weights carry the measure)."""

    nodes: np.ndarray
    weights: np.ndarray

    @property
    def n(self) -> int:
        return self.nodes.size


def _christoffel_log_weights(diag, off, nodes):
    """log of probability-measure Gauss weights via 1 / sum_k p_k(x_j)^2.

    The recurrence runs with per-node rescaling (log-scale accumulated
    separately), so weights far below the double-precision underflow
    threshold keep full relative precision at any rule size.
    """
    n = diag.size
    x = nodes
    p_prev = np.ones_like(x)
    ssq = np.ones_like(x)
    log_scale = np.zeros_like(x)
    if n == 1:
        return -np.log(ssq)
    p_cur = (x - diag[0]) / off[0]
    ssq = ssq + p_cur * p_cur
    for k in range(1, n - 1):
        p_next = ((x - diag[k]) * p_cur - off[k - 1] * p_prev) / off[k]
        p_prev, p_cur = p_cur, p_next
        ssq = ssq + p_cur * p_cur
        mag = np.abs(p_cur)
        if np.any(mag > 1e120):
            c = np.where(mag > 1e120, 1.0 / mag, 1.0)
            p_prev = p_prev * c
            p_cur = p_cur * c
            ssq = ssq * c * c
            log_scale = log_scale - np.log(c)
    return -(np.log(ssq) + 2.0 * log_scale)


def golub_welsch(diag: np.ndarray, offdiag: np.ndarray, mass: float = 1.0) -> QuadRule:
    """Gauss rule of the measure whose Jacobi matrix has the given bands."""
    diag = np.asarray(diag, dtype=float)
    offdiag = np.asarray(offdiag, dtype=float)
    nodes = eigh_tridiagonal(diag, offdiag, eigvals_only=True)
    weights = mass * np.exp(_christoffel_log_weights(diag, offdiag, nodes))
    return QuadRule(nodes, weights)


def gauss_rule(sys: AxisSystem, n: int) -> QuadRule:
    """n-point rule integrating against the system's measure mu.

    Exact for all integrands of the form (polynomial of degree <= 2n-1 in the
    transformed variable) times the family's squared envelope; in particular
    for every product phi_j * phi_k with j + k <= 2n - 1.
    """
    if n < 1:
        raise ValueError("gauss_rule requires n >= 1")
    diag, off = sys.recurrence_coeffs(n)
    aux_nodes = eigh_tridiagonal(diag, off, eigvals_only=True)
    logw = (_christoffel_log_weights(diag, off, aux_nodes)
            + sys._aux_log_mass() + sys._log_weight_transform(aux_nodes))
    nodes = sys._nodes_from_aux(aux_nodes)
    order = np.argsort(nodes)
    return QuadRule(nodes[order], np.exp(logw)[order])


@dataclass(frozen=True)
class TensorGrid:
    """Tensor product of one-axis rules."""

    axes: tuple[QuadRule, ...]
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def d(self) -> int:
        return len(self.axes)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(r.n for r in self.axes)

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    @property
    def weights(self) -> np.ndarray:
        """Flattened product weights, shape (size,)."""
        if "w" not in self._cache:
            w = self.axes[0].weights
            for r in self.axes[1:]:
                w = np.multiply.outer(w, r.weights)
            self._cache["w"] = np.ravel(w)
        return self._cache["w"]

    @property
    def columns(self) -> np.ndarray:
        """Node coordinates, shape (size, d)."""
        if "cols" not in self._cache:
            mesh = np.meshgrid(*[r.nodes for r in self.axes], indexing="ij")
            self._cache["cols"] = np.stack([m.ravel() for m in mesh], axis=-1)
        return self._cache["cols"]


def tensor_grid(systems, n) -> TensorGrid:
    """Grid for a list of axis systems; n may be a scalar or per-axis."""
    systems = list(systems)
    if np.ndim(n) == 0:
        n = [int(n)] * len(systems)
    return TensorGrid(tuple(gauss_rule(s, ni) for s, ni in zip(systems, n)))


@dataclass(frozen=True)
class GridFn:
    """Values of a (possibly vector-valued) function on a TensorGrid.

    Scalar functions store shape (size,), vector-valued shape (m, size);
    vector values take the per-node Euclidean norm inside every L^p integral.
    """

    grid: TensorGrid
    values: np.ndarray

    @property
    def is_vector(self) -> bool:
        return self.values.ndim == 2

    def moduli(self) -> np.ndarray:
        if self.is_vector:
            return np.sqrt(np.sum(self.values * self.values, axis=0))
        return np.abs(self.values)


def _check_p(p: float) -> None:
    if not np.isfinite(p) or p <= 1.0:
        raise ValueError(f"p must lie in (1, inf), got {p}")


def lp_norm(g: GridFn, p: float) -> float:
    """Weighted L^p(mu) norm of the grid values."""
    _check_p(p)
    return float(np.sum(g.grid.weights * g.moduli() ** p) ** (1.0 / p))


def inner(f: GridFn, g: GridFn) -> float:
    """L^2(mu) pairing; componentwise dot for vector values."""
    if f.grid is not g.grid:
        if f.grid.shape != g.grid.shape or not all(
                np.array_equal(a.nodes, b.nodes)
                for a, b in zip(f.grid.axes, g.grid.axes)):
            raise ValueError("grid mismatch in inner product")
    prod = np.sum(f.values * g.values, axis=0) if f.is_vector else f.values * g.values
    return float(np.sum(f.grid.weights * prod))


@dataclass(frozen=True)
class ConvergeResult:
    value: float
    achieved_tol: float
    nodes_per_axis: int


def converge_norm(systems, evaluator, p: float, tol: float = 1e-8,
                  n0: int = 24, max_doublings: int = 7) -> ConvergeResult:
    """L^p norm by doubling quadrature resolution until it settles.

    ``evaluator`` maps node columns (size, d) to values (size,) or (m, size).
    """
    _check_p(p)
    systems = list(systems)
    vals = []
    n = n0
    for _ in range(max_doublings + 1):
        grid = tensor_grid(systems, n)
        g = GridFn(grid, np.asarray(evaluator(grid.columns), dtype=float))
        vals.append(lp_norm(g, p))
        if len(vals) >= 2:
            rel = abs(vals[-1] - vals[-2]) / max(abs(vals[-1]), 1e-300)
            if rel < tol:
                return ConvergeResult(vals[-1], rel, n)
        n *= 2
    raise ConvergenceError(
        f"norm did not settle to {tol} within {max_doublings} doublings",
        last=vals[-1], previous=vals[-2])
