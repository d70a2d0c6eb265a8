"""Sup-over-controls backward recursion, per-scenario K paths, structural checks.

The central modeling substitution of this package: the family of mutually
singular volatility measures is replaced by the set of lattice volatility
controls. One backward step takes the best one-step BSDE value over the
candidate grid,

    Y_k(x) = max_{a in A} { E_a[Y_{k+1}](x) - dt * F(t_k, x, E_a[Y_{k+1}](x), Z_k^a(x), a) },

ties broken toward the smallest rate for reproducibility of the argmax
table. For any scenario, the nodal shortfall of its one-step value below
Y_k is the increment of that scenario's nondecreasing compensator K; the
argmax feedback scenario has zero increments by construction, which is
the lattice form of the minimum condition.

K increments are accumulated nodewise: on the lattice the nodal shortfall
serves every scenario passing through the node, sidestepping pathwise
aggregation across measures.
"""

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .bsde import (_terminal_values, check_cfl, check_control_domain,
                   check_rates_domain, solve_bsde)
from .controls import (ControlGrid, ControlScenario, check_scenario_shape,
                       constant_control, feedback_control)
from .errors import ConfigError, DomainError
from .grid import (SpaceGrid, SurfaceSeries, TimeGrid, ValueSurface,
                   first_derivative, one_step_expectation, second_derivative)


@dataclass
class TwoBSDESolution:
    tgrid: TimeGrid
    sgrid: SpaceGrid
    y: np.ndarray            # (n_steps+1, n_points)
    z: np.ndarray            # (n_steps+1, n_points)
    gamma: np.ndarray        # (n_steps+1, n_points)
    a_star: np.ndarray       # (n_steps, n_points) argmax rates
    control_grid: ControlGrid
    terminal: Optional[Callable]
    argmax_at_edge_fraction: float  # truncation-bias indicator for unbounded domains

    @property
    def optimal_control(self):
        return feedback_control(self.a_star)

    def y0(self, x0=None):
        surf = ValueSurface(self.sgrid, self.y[0])
        return surf.at(self.sgrid.center if x0 is None else x0)


@dataclass
class KPath:
    scenario: ControlScenario
    increments: np.ndarray   # (n_steps, n_points)
    cumulative: np.ndarray   # (n_steps+1, n_points), running nodal sum, K_0 = 0


def _one_step_candidate(conj, y_next, t, a, dt, sgrid, quad):
    """One-step BSDE value under rate(s) ``a`` plus its gradient surface."""
    exp_surf = one_step_expectation(ValueSurface(sgrid, y_next), a, dt, quad)
    zk = first_derivative(exp_surf).values
    drift = conj.evaluator(t, sgrid.x, exp_surf.values, zk, a)
    return exp_surf.values - dt * drift, zk


def solve_2bsde(conj, g, tgrid, sgrid, cgrid, quad):
    """Dynamic-programming sweep over the control grid."""
    rates = cgrid.values
    check_rates_domain(conj, rates)
    dt = tgrid.dt
    check_cfl(conj, rates, dt)

    n = tgrid.n_steps
    npts = sgrid.n_points
    y = np.empty((n + 1, npts))
    z = np.empty_like(y)
    gam = np.empty_like(y)
    a_star = np.empty((n, npts))
    y[n] = _terminal_values(g, sgrid)
    z[n] = first_derivative(ValueSurface(sgrid, y[n])).values
    gam[n] = second_derivative(ValueSurface(sgrid, y[n])).values

    edge_hits = 0
    for k in range(n - 1, -1, -1):
        t = k * dt
        cands = np.empty((rates.size, npts))
        zs = np.empty_like(cands)
        for i, a in enumerate(rates):
            cands[i], zs[i] = _one_step_candidate(conj, y[k + 1], t, a, dt,
                                                  sgrid, quad)
        # ascending rates + first-max argmax = ties broken toward smallest a
        idx = np.argmax(cands, axis=0)
        cols = np.arange(npts)
        y[k] = cands[idx, cols]
        z[k] = zs[idx, cols]
        a_star[k] = rates[idx]
        gam[k] = second_derivative(ValueSurface(sgrid, y[k])).values
        edge_hits += int(np.count_nonzero((idx == 0) | (idx == rates.size - 1)))

    frac = edge_hits / float(n * npts) if n else 0.0
    return TwoBSDESolution(tgrid, sgrid, y, z, gam, a_star, cgrid,
                           terminal=g if callable(g) else None,
                           argmax_at_edge_fraction=frac)


def extract_k_path(sol, conj, scenario, quad):
    """Nodal K increments: 2BSDE value minus the scenario's one-step value."""
    check_scenario_shape(scenario, sol.tgrid, sol.sgrid)
    check_control_domain(conj, scenario)
    dt = sol.tgrid.dt
    n = sol.tgrid.n_steps
    dk = np.empty((n, sol.sgrid.n_points))
    for k in range(n):
        a = scenario.values_at(k, k * dt, sol.sgrid.x)
        cand, _ = _one_step_candidate(conj, sol.y[k + 1], k * dt, a, dt,
                                      sol.sgrid, quad)
        dk[k] = sol.y[k] - cand
    cum = np.concatenate([np.zeros((1, sol.sgrid.n_points)),
                          np.cumsum(dk, axis=0)])
    return KPath(scenario=scenario, increments=dk, cumulative=cum)


def expected_increment_sum(sol, conj, scenario, quad, x0=None,
                           increments=None):
    """Expected total K increase along the scenario's lattice chain from (0, x0).

    Backward accumulation W_k = dK_k + E_a[W_{k+1}] is the adjoint of
    propagating the chain's law forward and integrating dK against it;
    W_0(x0) is the expected terminal K.
    """
    if increments is None:
        increments = extract_k_path(sol, conj, scenario, quad).increments
    dt = sol.tgrid.dt
    w = np.zeros(sol.sgrid.n_points)
    for k in range(sol.tgrid.n_steps - 1, -1, -1):
        a = scenario.values_at(k, k * dt, sol.sgrid.x)
        w = increments[k] + one_step_expectation(
            ValueSurface(sol.sgrid, w), a, dt, quad).values
    surf = ValueSurface(sol.sgrid, w)
    return surf.at(sol.sgrid.center if x0 is None else x0)


def minimum_condition_gap(sol, conj, scenarios, quad, x0=None):
    """Smallest expected terminal K over the scenarios; ~0 when the argmax
    feedback scenario (or another globally optimal one) is included."""
    if not scenarios:
        raise ConfigError("need at least one scenario")
    return min(expected_increment_sum(sol, conj, s, quad, x0=x0)
               for s in scenarios)


@dataclass
class ComparisonReport:
    terminal_dominated: bool
    max_violation: float
    passed: bool


def comparison_check(sol1, sol2, tol=1e-12):
    """Terminal dominance g1 <= g2 must propagate to every step."""
    if sol1.sgrid != sol2.sgrid or sol1.tgrid != sol2.tgrid:
        raise ConfigError("solutions live on different lattices")
    dominated = bool(np.all(sol1.y[-1] <= sol2.y[-1] + tol))
    violation = float(np.max(sol1.y - sol2.y))
    return ComparisonReport(terminal_dominated=dominated,
                            max_violation=max(violation, 0.0),
                            passed=dominated and violation <= tol)


@dataclass
class RepresentationReport:
    max_dominance_violation: float   # worst Y_bsde - Y_2bsde over nodes/steps
    max_argmax_gap: float            # worst nodewise min over controls of dK
    passed: bool


def representation_lower_bound(conj, g, tgrid, sgrid, cgrid, quad,
                               tol=1e-10):
    """2BSDE value dominates every constant-control BSDE value nodewise,
    and at each node some control attains it (the recursion's argmax)."""
    sol = solve_2bsde(conj, g, tgrid, sgrid, cgrid, quad)
    worst_dom = -np.inf
    min_dk = np.full((tgrid.n_steps, sgrid.n_points), np.inf)
    for a in cgrid.values:
        scen = constant_control(a)
        single = solve_bsde(conj, scen, g, tgrid, sgrid, quad)
        worst_dom = max(worst_dom, float(np.max(single.y - sol.y)))
        kp = extract_k_path(sol, conj, scen, quad)
        np.minimum(min_dk, kp.increments, out=min_dk)
    max_gap = float(np.max(min_dk)) if min_dk.size else 0.0
    return RepresentationReport(
        max_dominance_violation=max(worst_dom, 0.0),
        max_argmax_gap=max_gap,
        passed=worst_dom <= tol and max_gap <= tol)
