"""Space-time lattice, one-step conditional expectations, derivative stencils.

The horizon is fixed to [0, 1]. Surfaces live on a uniform symmetric space
grid; the one-step expectation under a variance rate a realizes
E[v(x + sqrt(a*dt)*N(0,1))] by Gauss-Hermite quadrature of the
piecewise-linear interpolant with boundary-slope linear extrapolation.
Piecewise-linear interpolation is deliberate: it preserves monotonicity
and convexity, which the property suites downstream rely on.
"""

from dataclasses import dataclass

import numpy as np

from . import backend
from .errors import ConfigError

DEFAULT_QUAD_NODES = 16


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid t_k = k/n_steps on [0, 1]."""

    n_steps: int

    def __post_init__(self):
        if self.n_steps < 1:
            raise ConfigError("n_steps must be a positive integer")

    @property
    def dt(self):
        return 1.0 / self.n_steps

    @property
    def times(self):
        return np.linspace(0.0, 1.0, self.n_steps + 1)


@dataclass(frozen=True)
class SpaceGrid:
    """Uniform grid of odd size, symmetric about ``center``."""

    center: float
    half_width: float
    n_points: int

    def __post_init__(self):
        if self.half_width <= 0:
            raise ConfigError("half_width must be positive")
        if self.n_points < 3 or self.n_points % 2 == 0:
            raise ConfigError("n_points must be an odd integer >= 3")

    @property
    def dx(self):
        return 2.0 * self.half_width / (self.n_points - 1)

    @property
    def x(self):
        return self.center + np.linspace(
            -self.half_width, self.half_width, self.n_points
        )

    @property
    def center_index(self):
        return self.n_points // 2


@dataclass
class ValueSurface:
    """Nodal values v(x_j) at one time slice. Treated as immutable."""

    grid: SpaceGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.shape != (self.grid.n_points,):
            raise ConfigError(
                f"surface has {v.shape} values for a {self.grid.n_points}-point grid"
            )
        if not np.all(np.isfinite(v)):
            raise ConfigError("surface values must be finite")
        self.values = v

    def at(self, x0):
        """Piecewise-linear evaluation with boundary-slope extrapolation."""
        g = self.grid
        pos = (x0 - (g.center - g.half_width)) / g.dx
        i = int(np.floor(pos))
        i = min(max(i, 0), g.n_points - 2)
        th = pos - i
        return self.values[i] + th * (self.values[i + 1] - self.values[i])


@dataclass
class SurfaceSeries:
    """Stack of surfaces v(t_k, x_j), shape (n_steps+1, n_points)."""

    tgrid: TimeGrid
    sgrid: SpaceGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        expected = (self.tgrid.n_steps + 1, self.sgrid.n_points)
        if v.shape != expected:
            raise ConfigError(f"series shape {v.shape}, expected {expected}")
        self.values = v

    def surface(self, k):
        return ValueSurface(self.sgrid, self.values[k])


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes/weights integrating a standard-normal integrand."""

    nodes: np.ndarray
    weights: np.ndarray


def gauss_hermite(n_nodes=DEFAULT_QUAD_NODES):
    """Gauss-Hermite rule rescaled to N(0,1): spectral accuracy for smooth v."""
    if n_nodes < 1:
        raise ConfigError("quadrature needs at least one node")
    x, w = np.polynomial.hermite.hermgauss(n_nodes)
    return QuadratureRule(nodes=x * np.sqrt(2.0), weights=w / np.sqrt(np.pi))


def one_step_expectation(surface, a, dt, quad):
    """E[v(x + sqrt(a*dt) Z)] nodewise; ``a`` is a scalar or per-node array."""
    g = surface.grid
    a_arr = np.broadcast_to(np.asarray(a, dtype=np.float64), (g.n_points,))
    if np.any(a_arr <= 0.0):
        raise ConfigError("variance rate must be positive")
    if dt <= 0.0:
        raise ConfigError("dt must be positive")
    rel = np.sqrt(a_arr * dt) / g.dx
    out = backend.expect_uniform(
        surface.values, np.ascontiguousarray(rel), quad.nodes, quad.weights
    )
    return ValueSurface(g, out)


def first_derivative(surface):
    """Central differences interior, one-sided at the two edge nodes."""
    v = surface.values
    dx = surface.grid.dx
    d = np.empty_like(v)
    d[1:-1] = (v[2:] - v[:-2]) / (2.0 * dx)
    d[0] = (v[1] - v[0]) / dx
    d[-1] = (v[-1] - v[-2]) / dx
    return ValueSurface(surface.grid, d)


def second_derivative(surface):
    """3-point stencil interior; edge values copied inward."""
    v = surface.values
    dx2 = surface.grid.dx ** 2
    d = np.empty_like(v)
    d[1:-1] = (v[2:] - 2.0 * v[1:-1] + v[:-2]) / dx2
    d[0] = d[1]
    d[-1] = d[-2]
    return ValueSurface(surface.grid, d)


def surface_to_csv(surface, fh):
    """Write `x,value` rows at full double precision."""
    fh.write("x,value\n")
    for xj, vj in zip(surface.grid.x, surface.values):
        fh.write(f"{xj:.17g},{vj:.17g}\n")
