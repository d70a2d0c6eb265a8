"""Monotone solver for the fully nonlinear terminal-value PDE, plus the
classical-solution verifier.

The equation is

    d/dt v(t,x) + hhat(t, x, v, Dv, D2v) = S(t,x),   v(1, x) = g(x),

with hhat the nondecreasing convex envelope in the curvature slot and S an
optional forcing (used for manufactured solutions). The scheme consumes
hhat through its dual conjugate f, realizing the envelope as the best
one-step value over a candidate rate grid,

    v_k = max_a { E_a[v_{k+1}] - dt * f(t_k, x, E_a[v_{k+1}], Dv, a) } - dt * S(t_k, x),

which keeps every intermediate finite: +inf values of hhat never enter the
time loop. Direct hhat evaluation appears only in the verifier residuals,
where an out-of-domain curvature is reported node by node instead of
aborting (the boundary-layer situation for banded generators).

This module deliberately re-implements the sweep instead of delegating to
the 2BSDE solver: agreement between the two code paths is itself one of
the verification suites.
"""

from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple

import numpy as np

from .bsde import check_cfl, check_rates_domain, _terminal_values
from .controls import ControlScenario, check_scenario_shape
from .errors import ConfigError
from .generators import BiconjugateGenerator
from .grid import (SurfaceSeries, TimeGrid, ValueSurface, first_derivative,
                   one_step_expectation, second_derivative)


@dataclass
class PDEProblem:
    hhat: BiconjugateGenerator
    terminal: Callable
    source: Optional[Callable] = None   # S(t, x), forcing on the right-hand side


def solve_pde(prob, tgrid, sgrid, cgrid, quad):
    rates = cgrid.values
    dual = prob.hhat.dual
    check_rates_domain(dual, rates)
    dt = tgrid.dt
    check_cfl(dual, rates, dt)

    x = sgrid.x
    n = tgrid.n_steps
    vals = np.empty((n + 1, sgrid.n_points))
    vals[n] = _terminal_values(prob.terminal, sgrid)
    for k in range(n - 1, -1, -1):
        t = k * dt
        best = np.full(sgrid.n_points, -np.inf)
        for a in rates:
            ex = one_step_expectation(ValueSurface(sgrid, vals[k + 1]), a, dt,
                                      quad)
            dv = first_derivative(ex).values
            cand = ex.values - dt * dual.evaluator(t, x, ex.values, dv, a)
            np.maximum(best, cand, out=best)
        if prob.source is not None:
            best = best - dt * np.asarray(prob.source(t, x), dtype=np.float64)
        vals[k] = best
    return SurfaceSeries(tgrid, sgrid, vals)


@dataclass
class FeynmanKacReport:
    residual_max: float
    k_min: float
    k_series: np.ndarray                 # (n_steps, n_points) for the lead scenario
    minimum_gap: float
    domain_violations: List[Tuple[int, int]] = field(default_factory=list)


def _series_values(v, tgrid, sgrid):
    if isinstance(v, SurfaceSeries):
        if v.tgrid != tgrid or v.sgrid != sgrid:
            raise ConfigError("surface series lattice does not match")
        return v.values
    times = tgrid.times
    return np.stack([np.asarray(v(t, sgrid.x), dtype=np.float64)
                     for t in times])


def feynman_kac_verify(v, conj, hhat, scenarios, tgrid, sgrid, quad,
                       x0=None):
    """Check a candidate classical solution against the lattice.

    residual_max: worst |forward-difference d/dt v + hhat(., v, Dv, D2v)|
    over nodes where the curvature lies in hhat's domain; out-of-domain
    nodes are collected in ``domain_violations``.

    k density under a scenario's rate a: hhat(., Gamma) - a*Gamma/2 + f(., a);
    nonnegative for a classical solution, and its expected time integral
    vanishes at the best scenario (lattice minimum condition). The first
    scenario's k table is returned; ``minimum_gap`` minimizes the expected
    integral over all of them.
    """
    if isinstance(scenarios, ControlScenario):
        scenarios = [scenarios]
    if not scenarios:
        raise ConfigError("need at least one scenario")
    for s in scenarios:
        check_scenario_shape(s, tgrid, sgrid)
        check_rates_domain(conj, s.all_values())

    vals = _series_values(v, tgrid, sgrid)
    x = sgrid.x
    dt = tgrid.dt
    n = tgrid.n_steps

    dv = np.empty_like(vals)
    d2v = np.empty_like(vals)
    for k in range(n + 1):
        surf = ValueSurface(sgrid, vals[k])
        dv[k] = first_derivative(surf).values
        d2v[k] = second_derivative(surf).values

    residual_max = 0.0
    violations = []
    for k in range(n):
        t = k * dt
        hh = np.asarray(hhat.evaluator(t, x, vals[k], dv[k], d2v[k]),
                        dtype=np.float64)
        bad = ~np.isfinite(hh)
        if bad.any():
            violations.extend((k, int(j)) for j in np.nonzero(bad)[0])
        resid = (vals[k + 1] - vals[k]) / dt + hh
        finite = resid[~bad]
        if finite.size:
            residual_max = max(residual_max, float(np.max(np.abs(finite))))

    def k_table(scen):
        ks = np.empty((n, sgrid.n_points))
        for k in range(n):
            t = k * dt
            a = np.broadcast_to(
                np.asarray(scen.values_at(k, t, x), dtype=np.float64),
                x.shape)
            hh = np.asarray(hhat.evaluator(t, x, vals[k], dv[k], d2v[k]),
                            dtype=np.float64)
            f = np.asarray(conj.evaluator(t, x, vals[k], dv[k], a),
                           dtype=np.float64)
            ks[k] = hh - 0.5 * a * d2v[k] + f
        return ks

    lead = k_table(scenarios[0])
    finite_lead = lead[np.isfinite(lead)]
    k_min = float(np.min(finite_lead)) if finite_lead.size else np.nan

    gap = np.inf
    for scen in scenarios:
        ks = lead if scen is scenarios[0] else k_table(scen)
        w = np.zeros(sgrid.n_points)
        for k in range(n - 1, -1, -1):
            a = scen.values_at(k, k * dt, x)
            inc = np.where(np.isfinite(ks[k]), ks[k], 0.0) * dt
            w = inc + one_step_expectation(ValueSurface(sgrid, w), a, dt,
                                           quad).values
        surf = ValueSurface(sgrid, w)
        gap = min(gap, surf.at(sgrid.center if x0 is None else x0))

    return FeynmanKacReport(residual_max=residual_max, k_min=k_min,
                            k_series=lead, minimum_gap=gap,
                            domain_violations=violations)


def manufactured_sin(conj_hhat):
    """Exact solution e^{-t} sin(x) and the forcing that makes it solve the PDE.

    Returns (v_star(t, x), source(t, x)); the forcing is the residual of
    v_star in the homogeneous equation, evaluated with the closed-form
    envelope.
    """
    hhat = conj_hhat

    def v_star(t, x):
        return np.exp(-t) * np.sin(np.asarray(x, dtype=np.float64))

    def source(t, x):
        x = np.asarray(x, dtype=np.float64)
        vt = -np.exp(-t) * np.sin(x)
        curv = -np.exp(-t) * np.sin(x)
        dvx = np.exp(-t) * np.cos(x)
        return vt + np.asarray(
            hhat.evaluator(t, x, v_star(t, x), dvx, curv), dtype=np.float64)

    return v_star, source
