"""Uniform radial grid and the discrete operators on it.

Everything downstream sees radially symmetric fields through a 1-D slice
f(r_i) on r_i = i*h, so the n-dimensional Laplacian reduces to
f'' + (n-1)/r f' with the symmetry rule 2n*(f1 - f0)/h^2 at the origin.
All stencils are second order; the outer boundary node of the Laplacian is
left at zero because the boundary condition overwrites it downstream.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import (
    BOUNDARY_DIRICHLET,
    DOMAIN_TRUNCATED,
    ParameterError,
    SystemParams,
)

# initial data in truncated-space dirichlet mode must be this small at the
# truncation, relative to its peak, for the run to stand in for whole space
TRUNCATION_INIT_TOL = 1e-12


@dataclass(frozen=True)
class RadialGrid:
    """Uniform nodes r_i = i*h on [0, radius], h = radius/(n_nodes-1)."""

    n_nodes: int
    radius: float

    def __post_init__(self) -> None:
        if not (isinstance(self.n_nodes, int) and self.n_nodes >= 3):
            raise ParameterError(f"nodes must be an integer >= 3 (got {self.n_nodes!r})")
        if not self.radius > 0.0:
            raise ParameterError(f"radius must be > 0 (got {self.radius})")

    @property
    def h(self) -> float:
        return self.radius / (self.n_nodes - 1)

    @property
    def r(self) -> np.ndarray:
        return np.arange(self.n_nodes) * self.h


@dataclass
class FieldState:
    """Both components of the solution at one instant."""

    t: float
    u: np.ndarray
    v: np.ndarray

    def validate(self, boundary: str) -> None:
        """Check finiteness, nonnegativity and the pinned Dirichlet endpoint."""
        for name, f in (("u", self.u), ("v", self.v)):
            if not np.all(np.isfinite(f)):
                raise ParameterError(f"{name} contains nonfinite values")
            if f.min() < 0.0:
                raise ParameterError(f"{name} contains negative values")
            if boundary == BOUNDARY_DIRICHLET and f[-1] != 0.0:
                raise ParameterError(f"{name} must vanish at the boundary node (got {f[-1]})")


def radial_laplacian(grid: RadialGrid, f: np.ndarray, n: int) -> np.ndarray:
    """Second-order discrete f'' + (n-1)/r f'.

    The origin uses the symmetry limit 2n*(f[1] - f[0])/h^2 (the n*f''(0)
    rule for even profiles).  The outer node is set to 0: its value is owned
    by whichever boundary condition the caller applies.
    """
    h = grid.h
    out = np.zeros_like(f)
    out[0] = 2.0 * n * (f[1] - f[0]) / h**2
    second = (f[2:] - 2.0 * f[1:-1] + f[:-2]) / h**2
    if n == 1:
        out[1:-1] = second
    else:
        r = grid.r[1:-1]
        out[1:-1] = second + (n - 1) * (f[2:] - f[:-2]) / (2.0 * h * r)
    return out


def gradient_magnitude(grid: RadialGrid, f: np.ndarray) -> np.ndarray:
    """|f'(r_i)|, central in the interior, one-sided second order at the
    outer end, and exactly 0 at the origin by radial symmetry."""
    h = grid.h
    out = np.empty_like(f)
    out[0] = 0.0
    out[1:-1] = np.abs(f[2:] - f[:-2]) / (2.0 * h)
    out[-1] = abs(3.0 * f[-1] - 4.0 * f[-2] + f[-3]) / (2.0 * h)
    return out


def sup_functional(
    grid: RadialGrid, u: np.ndarray, v: np.ndarray, theta1: float, theta2: float
) -> tuple[float, float]:
    """Instantaneous sups over nodes of u + |grad u|^theta1 and the v twin."""
    gu = gradient_magnitude(grid, u)
    gv = gradient_magnitude(grid, v)
    m_u = float(np.max(u + gu**theta1))
    m_v = float(np.max(v + gv**theta2))
    return m_u, m_v


def initial_state(params: SystemParams, grid: RadialGrid) -> FieldState:
    """Sample the initial profiles onto the grid and vet them.

    In truncated-space mode with a Dirichlet boundary the profiles must be
    negligible (< 1e-12 of their peak) near the truncation, otherwise the run
    cannot stand in for the whole-space problem and is rejected up front.
    """
    if grid.radius != params.radius:
        raise ParameterError(
            f"grid radius {grid.radius} does not match domain radius {params.radius}"
        )
    u0, v0 = params.init.sample(grid.r, params.radius, params.boundary)
    if params.domain_kind == DOMAIN_TRUNCATED and params.boundary == BOUNDARY_DIRICHLET:
        for name, f in (("u0", u0), ("v0", v0)):
            peak = float(f.max())
            if peak > 0.0 and float(f[-2]) > TRUNCATION_INIT_TOL * peak:
                raise ParameterError(
                    f"{name} is not negligible at the truncation "
                    f"({f[-2]:.3e} > 1e-12 of peak {peak:.3e}); "
                    "enlarge the truncation radius or narrow the profile"
                )
    if params.boundary == BOUNDARY_DIRICHLET:
        u0[-1] = 0.0
        v0[-1] = 0.0
    state = FieldState(t=0.0, u=u0, v=v0)
    state.validate(params.boundary)
    return state
