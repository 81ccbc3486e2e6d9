"""Uniform grids, interpolation onto the spline basis, and reconstruction.

A grid with n_elements cells over [a, b] carries n_elements + 1 nodes and
n_elements + 3 spline coefficients: one per node plus a ghost on each end.
Coefficient storage is a flat array indexed so that entry j + 1 holds the
coefficient of the spline centered on node j, with j = -1 and
j = n_elements + 1 being the ghosts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .banded import lu_factor, make_banded
from .basis import NodalStencils, SplineBasis, eval_with_derivatives
from .errors import InvalidParameterError


@dataclass(frozen=True)
class Grid:
    a: float
    b: float
    n_elements: int

    def __post_init__(self):
        if not (math.isfinite(self.a) and math.isfinite(self.b) and self.a < self.b):
            raise InvalidParameterError(
                f"need finite a < b, got a={self.a!r}, b={self.b!r}"
            )
        if self.n_elements < 4:
            raise InvalidParameterError(
                f"need at least 4 elements, got {self.n_elements}"
            )

    @property
    def h(self) -> float:
        return (self.b - self.a) / self.n_elements

    def nodes(self) -> np.ndarray:
        return np.linspace(self.a, self.b, self.n_elements + 1)


def check_same_spacing(basis: SplineBasis, grid: Grid) -> None:
    """Guard against pairing a basis with a grid of different spacing."""
    if abs(basis.h - grid.h) > 1e-12 * grid.h:
        raise InvalidParameterError(
            f"basis spacing {basis.h!r} != grid spacing {grid.h!r}"
        )


@dataclass
class CoefficientState:
    """Spline coefficients of the two evolved fields at one time level.

    delta carries the displacement field, phi its time derivative; both
    include the ghost entries.  ``t`` and ``step_index`` locate the state
    in the time march.
    """

    delta: np.ndarray
    phi: np.ndarray
    t: float
    step_index: int

    def __post_init__(self):
        if self.delta.shape != self.phi.shape or self.delta.ndim != 1:
            raise InvalidParameterError(
                f"coefficient arrays must be 1-d and equal length, got "
                f"{self.delta.shape} and {self.phi.shape}"
            )


def fit_initial(
    grid: Grid,
    stencils: NodalStencils,
    values: np.ndarray,
    end_slopes: tuple[float, float],
) -> np.ndarray:
    """Interpolate nodal samples (plus end slopes) onto spline coefficients.

    Solves the (n + 3) x (n + 3) pentadiagonal system whose interior rows
    demand the spline hit ``values`` at every node; the value rows alone
    leave two degrees of freedom, closed by prescribing the first
    derivative at each boundary.  Returns the coefficient array, ghosts
    included.
    """
    values = np.asarray(values, dtype=float)
    n = grid.n_elements
    if values.shape != (n + 1,):
        raise InvalidParameterError(
            f"expected {n + 1} nodal values, got shape {values.shape}"
        )
    slope_a, slope_b = end_slopes
    size = n + 3
    mat = make_banded(size, 2, 2)
    # Interior rows r = i + 1 couple coefficients i, i+1, i+2.
    mat.bands[3, 0 : n + 1] = stencils.alpha1
    mat.bands[2, 1 : n + 2] = stencils.alpha2
    mat.bands[1, 2 : n + 3] = stencils.alpha1
    # Slope closures: row 0 at the left edge, row n + 2 at the right.
    mat.bands[2, 0] = stencils.beta1
    mat.bands[0, 2] = -stencils.beta1
    mat.bands[4, n] = stencils.beta1
    mat.bands[2, n + 2] = -stencils.beta1
    rhs = np.empty(size)
    rhs[0] = slope_a
    rhs[1 : n + 2] = values
    rhs[n + 2] = slope_b
    return lu_factor(mat).solve(rhs)


def reconstruct(
    grid: Grid, basis: SplineBasis, coeffs: np.ndarray, x: float
) -> tuple[float, float, float]:
    """Value and first two derivatives of the spline combination at x.

    The point sees contributions from the splines whose support covers its
    element (four of them; at a node one of the four vanishes).
    """
    check_same_spacing(basis, grid)
    coeffs = np.asarray(coeffs, dtype=float)
    n = grid.n_elements
    if coeffs.shape != (n + 3,):
        raise InvalidParameterError(
            f"expected {n + 3} coefficients, got shape {coeffs.shape}"
        )
    if not (grid.a - 1e-12 * grid.h <= x <= grid.b + 1e-12 * grid.h):
        raise InvalidParameterError(f"point {x!r} outside [{grid.a}, {grid.b}]")
    e = min(max(int((x - grid.a) / grid.h), 0), n - 1)
    u = up = upp = 0.0
    for j in range(e - 1, e + 3):
        b, bp, bpp = eval_with_derivatives(basis, j, x, origin=grid.a)
        c = coeffs[j + 1]
        u += c * b
        up += c * bp
        upp += c * bpp
    return u, up, upp


def nodal_values(
    stencils: NodalStencils, coeffs: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Field value and first two derivatives at every node, by the
    three-term stencils.  O(n) via shifted slices of the ghost-padded
    coefficient array."""
    c = np.asarray(coeffs, dtype=float)
    u = stencils.alpha1 * c[:-2] + stencils.alpha2 * c[1:-1] + stencils.alpha1 * c[2:]
    up = stencils.beta1 * c[:-2] - stencils.beta1 * c[2:]
    upp = stencils.gamma1 * c[:-2] + stencils.gamma2 * c[1:-1] + stencils.gamma1 * c[2:]
    return u, up, upp
