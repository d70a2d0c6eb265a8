"""Nonlinear generators, their conjugates in the curvature slot, and envelopes.

A generator maps (t, x, y, z, gamma) to an extended real; +inf encodes
"gamma outside the finiteness domain". Three closed-form families are
built in:

* ``single_vol(a0)``   -- linear in gamma with slope a0/2; conjugate finite
                          only at the single variance rate a0.
* ``g_range(lo, hi)``  -- upper envelope of the linear generators with
                          slopes in [lo, hi]/2 (sublinear-expectation /
                          uncertain-volatility model); conjugate is 0 on
                          [lo, hi] and +inf outside.
* ``gamma_band(gl, gh)`` -- gamma/2 restricted to a band gl < 0 < gh
                          (bounded second-order exposure in hedging);
                          conjugate (gh*(a-1)^+ - gl*(a-1)^-)/2, finite
                          for every a > 0.

An optional reaction term f(t, x, y, z) enters the generator as -f and
therefore shifts the conjugate by +f and the biconjugate by -f.

Extended reals use float('inf') directly; ``np.isinf`` is the unbounded
flag. Numeric transforms brute-force the suprema on user grids and flag
+inf when the maximand keeps growing at a grid end that lies strictly
inside the (known or declared) domain, with growth rate above
``DEFAULT_SLOPE_THRESHOLD``.
"""

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import ConfigError, DomainError

SINGLE_VOL = "single_vol"
G_RANGE = "grange"
GAMMA_BAND = "gamma_band"
CUSTOM = "custom"

# Outward growth per unit gamma (or per unit a) above which a grid-end
# maximum is reported as unbounded rather than as a finite supremum.
DEFAULT_SLOPE_THRESHOLD = 1e-6


@dataclass(frozen=True)
class Interval:
    """Closed/open interval on the extended real line."""

    lo: float
    hi: float
    open_lo: bool = False
    open_hi: bool = False

    def __post_init__(self):
        if self.lo > self.hi:
            raise ConfigError(f"empty interval [{self.lo}, {self.hi}]")

    def contains(self, a, tol=1e-12):
        a = np.asarray(a, dtype=np.float64)
        scale = max(1.0, abs(self.lo) if np.isfinite(self.lo) else 1.0,
                    abs(self.hi) if np.isfinite(self.hi) else 1.0)
        lo_ok = a > self.lo if self.open_lo else a >= self.lo - tol * scale
        hi_ok = a < self.hi if self.open_hi else a <= self.hi + tol * scale
        return np.logical_and(lo_ok, hi_ok)

    @property
    def is_point(self):
        return self.lo == self.hi


@dataclass(frozen=True)
class GeneratorSpec:
    kind: str
    a0: float = float("nan")
    a_lo: float = float("nan")
    a_hi: float = float("nan")
    gamma_lo: float = float("nan")
    gamma_hi: float = float("nan")
    reaction: Optional[Callable] = None  # f(t, x, y, z), broadcasting over arrays
    evaluator: Optional[Callable] = None  # custom H0(t, x, y, z, gamma)
    gamma_domain: Optional[Interval] = None


def single_vol(a0, reaction=None):
    if a0 <= 0:
        raise ConfigError("single_vol requires a0 > 0")
    return GeneratorSpec(kind=SINGLE_VOL, a0=float(a0), reaction=reaction)


def g_range(a_lo, a_hi, reaction=None):
    if not (0 < a_lo <= a_hi):
        raise ConfigError("grange requires 0 < a_lo <= a_hi")
    return GeneratorSpec(kind=G_RANGE, a_lo=float(a_lo), a_hi=float(a_hi),
                         reaction=reaction)


def gamma_band(gamma_lo, gamma_hi, reaction=None):
    if not (gamma_lo < 0 < gamma_hi):
        raise ConfigError("gamma_band requires gamma_lo < 0 < gamma_hi")
    return GeneratorSpec(kind=GAMMA_BAND, gamma_lo=float(gamma_lo),
                         gamma_hi=float(gamma_hi), reaction=reaction)


def custom_generator(evaluator, gamma_domain, reaction=None):
    """User-supplied generator; evaluator must return +inf outside its domain."""
    if not gamma_domain.contains(0.0):
        raise ConfigError("gamma domain must contain 0")
    return GeneratorSpec(kind=CUSTOM, evaluator=evaluator,
                         gamma_domain=gamma_domain, reaction=reaction)


def _reaction_value(spec, t, x, y, z):
    if spec.reaction is None:
        return 0.0
    return spec.reaction(t, x, y, z)


def generator_gamma_domain(spec):
    if spec.kind in (SINGLE_VOL, G_RANGE):
        return Interval(-np.inf, np.inf)
    if spec.kind == GAMMA_BAND:
        return Interval(spec.gamma_lo, spec.gamma_hi)
    return spec.gamma_domain


def eval_generator(spec, t, x, y, z, gamma):
    """Generator value; +inf exactly when gamma is outside its domain."""
    gamma = np.asarray(gamma, dtype=np.float64)
    f = _reaction_value(spec, t, x, y, z)
    if spec.kind == SINGLE_VOL:
        out = 0.5 * spec.a0 * gamma - f
    elif spec.kind == G_RANGE:
        out = 0.5 * (spec.a_hi * np.maximum(gamma, 0.0)
                     - spec.a_lo * np.maximum(-gamma, 0.0)) - f
    elif spec.kind == GAMMA_BAND:
        inside = (gamma >= spec.gamma_lo) & (gamma <= spec.gamma_hi)
        out = np.where(inside, 0.5 * gamma - f, np.inf)
    elif spec.kind == CUSTOM:
        base = np.asarray(spec.evaluator(t, x, y, z, gamma), dtype=np.float64)
        out = np.where(np.isinf(base), np.inf, base - f)
    else:
        raise ConfigError(f"unknown generator kind {spec.kind!r}")
    return out if out.ndim else float(out)


def conjugate_closed(spec, t, x, y, z, a):
    """Closed-form conjugate in the curvature slot for the built-in kinds."""
    if spec.kind == CUSTOM:
        raise DomainError("no closed-form conjugate for custom generators")
    f = _reaction_value(spec, t, x, y, z)
    if spec.kind == SINGLE_VOL:
        return f if abs(a - spec.a0) <= 1e-12 * max(1.0, spec.a0) else np.inf
    if spec.kind == G_RANGE:
        if spec.a_lo - 1e-12 <= a <= spec.a_hi + 1e-12:
            return 0.0 + f
        return np.inf
    # gamma_band: finite for every positive variance rate
    if a <= 0:
        return np.inf
    return 0.5 * (spec.gamma_hi * max(a - 1.0, 0.0)
                  - spec.gamma_lo * max(1.0 - a, 0.0)) + f


def _grid_sup(phi, grid, domain, slope_threshold):
    """Max of maximand samples, or +inf when growth continues off-grid.

    The unbounded flag fires only when the maximizing grid end lies
    strictly inside ``domain`` (so the true supremum runs beyond the grid)
    and the outward growth rate there exceeds the threshold.
    """
    finite = np.isfinite(phi)
    if not finite.any():
        raise DomainError("maximand is infinite on the whole grid")
    masked = np.where(finite, phi, -np.inf)
    i_star = int(np.argmax(masked))
    best = masked[i_star]
    n = grid.size
    if n >= 2:
        if i_star == n - 1 and finite[-1] and finite[-2]:
            outward = (phi[-1] - phi[-2]) / (grid[-1] - grid[-2])
            if outward > slope_threshold and domain.hi > grid[-1] + 1e-12:
                return np.inf
        if i_star == 0 and finite[0] and finite[1]:
            outward = (phi[0] - phi[1]) / (grid[1] - grid[0])
            if outward > slope_threshold and domain.lo < grid[0] - 1e-12:
                return np.inf
    return float(best)


def conjugate_numeric(spec, t, x, y, z, a, gamma_grid,
                      slope_threshold=DEFAULT_SLOPE_THRESHOLD):
    """Brute-force conjugate sup_gamma {a*gamma/2 - H(gamma)} on a grid."""
    gamma_grid = np.asarray(gamma_grid, dtype=np.float64)
    if gamma_grid.size == 0:
        raise ConfigError("gamma_grid must be nonempty")
    h = eval_generator(spec, t, x, y, z, gamma_grid)
    phi = 0.5 * a * gamma_grid - h
    return _grid_sup(phi, gamma_grid, generator_gamma_domain(spec),
                     slope_threshold)


@dataclass(frozen=True)
class ConjugateGenerator:
    """Conjugate F(t,x,y,z,a) with its finiteness interval in a.

    ``evaluator`` must broadcast over array-valued x, y, z and array a;
    it is the drift term of every backward step, so it has to stay cheap.
    """

    base: GeneratorSpec
    a_domain: Interval
    evaluator: Callable
    approximate_domain: bool = False


def make_conjugate(spec, gamma_grid=None, a_probe=None,
                   slope_threshold=DEFAULT_SLOPE_THRESHOLD):
    """Package a generator's conjugate for the solvers.

    Built-ins use closed forms and exact domains. Custom generators fall
    back to the grid transform over ``gamma_grid`` and estimate the
    a-domain by scanning ``a_probe`` (flagged approximate).
    """
    if spec.kind == SINGLE_VOL:
        def ev(t, x, y, z, a):
            return 0.0 + _reaction_value(spec, t, x, y, z) + 0.0 * np.asarray(a)
        return ConjugateGenerator(spec, Interval(spec.a0, spec.a0), ev)
    if spec.kind == G_RANGE:
        def ev(t, x, y, z, a):
            return 0.0 + _reaction_value(spec, t, x, y, z) + 0.0 * np.asarray(a)
        return ConjugateGenerator(spec, Interval(spec.a_lo, spec.a_hi), ev)
    if spec.kind == GAMMA_BAND:
        def ev(t, x, y, z, a):
            a = np.asarray(a, dtype=np.float64)
            base = 0.5 * (spec.gamma_hi * np.maximum(a - 1.0, 0.0)
                          - spec.gamma_lo * np.maximum(1.0 - a, 0.0))
            return base + _reaction_value(spec, t, x, y, z)
        return ConjugateGenerator(spec, Interval(0.0, np.inf, open_lo=True), ev)
    if spec.kind == CUSTOM:
        if gamma_grid is None:
            raise ConfigError("custom generators need a gamma_grid")
        gamma_grid = np.asarray(gamma_grid, dtype=np.float64)

        def ev(t, x, y, z, a):
            a = np.asarray(a, dtype=np.float64)
            if a.ndim == 0:
                return conjugate_numeric(spec, t, x, y, z, float(a),
                                         gamma_grid, slope_threshold)
            return np.array([
                conjugate_numeric(spec, t, x, y, z, ai, gamma_grid,
                                  slope_threshold)
                for ai in a.ravel()
            ]).reshape(a.shape)

        if a_probe is None:
            a_probe = np.geomspace(1e-3, 1e3, 121)
        vals = np.array([ev(0.0, 0.0, 0.0, 0.0, ai) for ai in a_probe])
        fin = np.isfinite(vals)
        if not fin.any():
            raise DomainError("conjugate is infinite on the whole a-probe grid")
        dom = Interval(float(a_probe[fin].min()), float(a_probe[fin].max()))
        return ConjugateGenerator(spec, dom, ev, approximate_domain=True)
    raise ConfigError(f"unknown generator kind {spec.kind!r}")


def conjugate_domain(conj):
    """Finiteness interval of the conjugate in a (approximate for custom)."""
    return conj.a_domain


def biconjugate_value(conj, t, x, y, z, gamma, a_grid,
                      slope_threshold=DEFAULT_SLOPE_THRESHOLD):
    """Brute-force envelope sup_a {a*gamma/2 - F(a)} over a positive a-grid."""
    a_grid = np.asarray(a_grid, dtype=np.float64)
    if a_grid.size == 0:
        raise ConfigError("a_grid must be nonempty")
    if np.any(a_grid <= 0.0):
        raise ConfigError("a_grid must be strictly positive")
    F = np.asarray(conj.evaluator(t, x, y, z, a_grid), dtype=np.float64)
    F = np.where(conj.a_domain.contains(a_grid), F, np.inf)
    phi = 0.5 * a_grid * gamma - F
    # growth toward a -> 0+ is harmless (the domain is open there at worst);
    # only an unbounded top end can push the supremum to +inf.
    dom = Interval(a_grid[0], conj.a_domain.hi, open_hi=conj.a_domain.open_hi)
    return _grid_sup(phi, a_grid, dom, slope_threshold)


@dataclass(frozen=True)
class BiconjugateGenerator:
    """Nondecreasing convex envelope in gamma, with its dual conjugate.

    ``evaluator(t,x,y,z,gamma)`` is the direct (closed-form or grid)
    envelope used for residual checks; solvers consume the dual side
    through ``dual.evaluator`` instead so the backward recursion never
    has to handle +inf.
    """

    evaluator: Callable
    gamma_domain: Interval
    dual: ConjugateGenerator


def make_biconjugate(conj, a_grid=None,
                     slope_threshold=DEFAULT_SLOPE_THRESHOLD):
    spec = conj.base
    if spec.kind == SINGLE_VOL:
        def ev(t, x, y, z, gamma):
            gamma = np.asarray(gamma, dtype=np.float64)
            out = 0.5 * spec.a0 * gamma - _reaction_value(spec, t, x, y, z)
            return out if out.ndim else float(out)
        return BiconjugateGenerator(ev, Interval(-np.inf, np.inf), conj)
    if spec.kind == G_RANGE:
        def ev(t, x, y, z, gamma):
            gamma = np.asarray(gamma, dtype=np.float64)
            out = 0.5 * (spec.a_hi * np.maximum(gamma, 0.0)
                         - spec.a_lo * np.maximum(-gamma, 0.0))
            out = out - _reaction_value(spec, t, x, y, z)
            return out if out.ndim else float(out)
        return BiconjugateGenerator(ev, Interval(-np.inf, np.inf), conj)
    if spec.kind == GAMMA_BAND:
        def ev(t, x, y, z, gamma):
            gamma = np.asarray(gamma, dtype=np.float64)
            f = _reaction_value(spec, t, x, y, z)
            out = np.where(gamma <= spec.gamma_hi,
                           0.5 * np.maximum(gamma, spec.gamma_lo) - f, np.inf)
            return out if out.ndim else float(out)
        return BiconjugateGenerator(
            ev, Interval(-np.inf, spec.gamma_hi), conj)
    if a_grid is None:
        raise ConfigError("custom biconjugates need an a_grid")
    a_grid = np.asarray(a_grid, dtype=np.float64)

    def ev(t, x, y, z, gamma):
        gamma = np.asarray(gamma, dtype=np.float64)
        if gamma.ndim == 0:
            return biconjugate_value(conj, t, x, y, z, float(gamma), a_grid,
                                     slope_threshold)
        return np.array([
            biconjugate_value(conj, t, x, y, z, gi, a_grid, slope_threshold)
            for gi in gamma.ravel()
        ]).reshape(gamma.shape)

    return BiconjugateGenerator(ev, Interval(-np.inf, np.inf), conj)
