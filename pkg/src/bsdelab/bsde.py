"""Backward solver for the single-control BSDE on the lattice.

Sign convention: the value decreases by the drift integral,
Y_t = terminal - integral of F - stochastic integral, so one explicit
Euler step reads

    Y_k(x) = E_a[Y_{k+1}](x) - dt * F(t_k, x, E_a[Y_{k+1}](x), Z_k(x), a)

with Z_k the central-difference gradient of the post-expectation surface
(taking Z from the fresh surface avoids lagging derivative noise).
The y-argument is treated explicitly, which is stable under the
CFL-type bound dt * L_y < 1 on the drift's y-Lipschitz constant.
"""

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .controls import ControlScenario, check_scenario_shape
from .errors import DomainError, StabilityError
from .grid import (SpaceGrid, SurfaceSeries, TimeGrid, ValueSurface,
                   first_derivative, one_step_expectation)


@dataclass
class BSDESolution:
    tgrid: TimeGrid
    sgrid: SpaceGrid
    y: np.ndarray           # (n_steps+1, n_points)
    z: np.ndarray           # (n_steps+1, n_points)
    terminal: Optional[Callable]
    control: ControlScenario

    def y_series(self):
        return SurfaceSeries(self.tgrid, self.sgrid, self.y)

    def y0(self, x0=None):
        surf = ValueSurface(self.sgrid, self.y[0])
        return surf.at(self.sgrid.center if x0 is None else x0)


def _terminal_values(g, sgrid):
    vals = np.asarray(g(sgrid.x) if callable(g) else g, dtype=np.float64)
    if vals.shape != (sgrid.n_points,):
        raise DomainError("terminal payoff does not match the space grid")
    return vals


def estimate_lipschitz_y(conj, a_values, t_probe=None, y_probe=None,
                         z_probe=(-1.0, 0.0, 1.0), x=0.0, dy=1e-4):
    """Sampled y-Lipschitz constant of the drift conjugate.

    Probes finite differences of F in y over a small (t, y, z, a) grid;
    good enough to enforce the explicit-scheme bound, not a certified
    global constant.
    """
    if t_probe is None:
        t_probe = (0.0, 0.5, 1.0)
    if y_probe is None:
        y_probe = (-2.0, -0.5, 0.0, 0.5, 2.0)
    worst = 0.0
    for t in t_probe:
        for a in np.atleast_1d(a_values):
            for z in z_probe:
                for y in y_probe:
                    f0 = conj.evaluator(t, x, y, z, a)
                    f1 = conj.evaluator(t, x, y + dy, z, a)
                    if np.isfinite(f0) and np.isfinite(f1):
                        worst = max(worst, abs(float(f1) - float(f0)) / dy)
    return worst


def check_cfl(conj, a_values, dt):
    lip = estimate_lipschitz_y(conj, a_values)
    if dt * lip >= 1.0:
        raise StabilityError(
            f"explicit y-treatment needs dt*L_y < 1: dt={dt:g}, estimated "
            f"L_y={lip:g}; use dt < {1.0 / lip:g}")
    return lip


def check_rates_domain(conj, values):
    vals = np.atleast_1d(np.asarray(values, dtype=np.float64))
    ok = np.atleast_1d(conj.a_domain.contains(vals))
    if not np.all(ok):
        bad = vals[~ok]
        raise DomainError(
            f"control rate(s) {bad[:5]} outside the conjugate domain "
            f"[{conj.a_domain.lo:g}, {conj.a_domain.hi:g}]")


def check_control_domain(conj, scenario):
    check_rates_domain(conj, scenario.all_values())


def solve_bsde(conj, control, g, tgrid, sgrid, quad):
    """Backward sweep under a fixed volatility control."""
    check_scenario_shape(control, tgrid, sgrid)
    check_control_domain(conj, control)
    dt = tgrid.dt
    check_cfl(conj, control.all_values(), dt)

    x = sgrid.x
    n = tgrid.n_steps
    y = np.empty((n + 1, sgrid.n_points))
    z = np.empty_like(y)
    y[n] = _terminal_values(g, sgrid)
    z[n] = first_derivative(ValueSurface(sgrid, y[n])).values
    for k in range(n - 1, -1, -1):
        t = k * dt
        a = control.values_at(k, t, x)
        exp_surf = one_step_expectation(ValueSurface(sgrid, y[k + 1]), a, dt, quad)
        zk = first_derivative(exp_surf).values
        drift = conj.evaluator(t, x, exp_surf.values, zk, a)
        y[k] = exp_surf.values - dt * drift
        z[k] = zk
    return BSDESolution(tgrid, sgrid, y, z, terminal=g if callable(g) else None,
                        control=control)


@dataclass
class AprioriReport:
    max_abs_y: float
    max_abs_terminal: float
    drift_budget: float     # sum_k dt * max_x |F(t_k, x, 0, 0, a_k)|
    ratio: float            # max|Y| / (max|g| + drift budget)
    hard_bound: bool        # drift-free case: discrete maximum principle applies
    passed: Optional[bool]  # None when only the ratio is reported


def apriori_check(sol, conj, bound_report_only=False, tol=1e-12):
    """Maximum-principle bound when the drift vanishes; a monitoring ratio otherwise."""
    x = sol.sgrid.x
    dt = sol.tgrid.dt
    budget = 0.0
    zeros = np.zeros_like(x)
    for k in range(sol.tgrid.n_steps):
        a = sol.control.values_at(k, k * dt, x)
        f0 = np.asarray(conj.evaluator(k * dt, x, zeros, zeros, a))
        budget += dt * float(np.max(np.abs(f0)))
    max_y = float(np.max(np.abs(sol.y)))
    max_g = float(np.max(np.abs(sol.y[-1])))
    hard = budget == 0.0
    ratio = max_y / (max_g + budget) if (max_g + budget) > 0 else 0.0
    passed = None
    if hard and not bound_report_only:
        passed = max_y <= max_g + tol
    return AprioriReport(max_abs_y=max_y, max_abs_terminal=max_g,
                         drift_budget=budget, ratio=ratio, hard_bound=hard,
                         passed=passed)
