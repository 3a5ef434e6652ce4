"""Numerical laboratory for dimension-free vector Riesz transform bounds
on multi-dimensional orthogonal expansions.

Subpackages:

- ``orthosys``  one-dimensional orthogonal eigensystems (seven families)
- ``quadgrid``  Gauss rules, tensor grids, weighted norms
- ``spectral``  product systems, semigroups, Riesz transforms
- ``bellman``   the Nazarov-Treil Bellman function and its inequalities
- ``embedding`` star norms, the bilinear identity and embedding checks
- ``normest``   p-norm lower bounds and the scalar constant chase
- ``harness``   verification suites, reports, CLI backend
"""

from .orthosys import AxisSystem, Family, FamilyTag, LadderResult, make_axis
from .quadgrid import GridFn, QuadRule, TensorGrid, gauss_rule, inner, lp_norm, tensor_grid
from .spectral import CoeffFn, ImageFrameFn, ProductSystem, product_system

__all__ = [
    "AxisSystem", "Family", "FamilyTag", "LadderResult", "make_axis",
    "GridFn", "QuadRule", "TensorGrid", "gauss_rule", "inner", "lp_norm",
    "tensor_grid",
    "CoeffFn", "ImageFrameFn", "ProductSystem", "product_system",
]

__version__ = "0.1.0"
