"""Volatility control scenarios: the discrete stand-in for a choice of measure.

A scenario assigns a variance rate a(t_k, x_j) on the lattice; constant,
piecewise-constant-in-time, and full feedback tables share one lookup
interface. A ControlGrid is the finite candidate set over which the
2BSDE recursion takes its max.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ConfigError

CONSTANT = "constant"
PIECEWISE = "piecewise"
FEEDBACK = "feedback"


@dataclass(frozen=True)
class ControlScenario:
    kind: str
    a: float = float("nan")
    breakpoints: Optional[np.ndarray] = None
    piece_values: Optional[np.ndarray] = None
    table: Optional[np.ndarray] = None

    def values_at(self, k, t, x):
        """Variance rate at step k / time t; scalar or one value per node."""
        if self.kind == CONSTANT:
            return self.a
        if self.kind == PIECEWISE:
            idx = int(np.searchsorted(self.breakpoints, t, side="right"))
            return float(self.piece_values[idx])
        return self.table[k]

    def all_values(self):
        """Flat array of every rate the scenario can take (domain checks)."""
        if self.kind == CONSTANT:
            return np.array([self.a])
        if self.kind == PIECEWISE:
            return self.piece_values
        return self.table.ravel()

    def label(self):
        if self.kind == CONSTANT:
            return f"constant({self.a:g})"
        if self.kind == PIECEWISE:
            vals = ",".join(f"{v:g}" for v in self.piece_values)
            return f"piecewise({vals})"
        return "feedback"


def constant_control(a):
    if a <= 0:
        raise ConfigError("variance rate must be positive")
    return ControlScenario(kind=CONSTANT, a=float(a))


def piecewise_control(breakpoints, values):
    """values[i] applies on [breakpoints[i-1], breakpoints[i]); one more value than breakpoints."""
    bp = np.asarray(breakpoints, dtype=np.float64)
    vals = np.asarray(values, dtype=np.float64)
    if vals.size != bp.size + 1:
        raise ConfigError("piecewise control needs len(values) == len(breakpoints)+1")
    if bp.size and (np.any(np.diff(bp) <= 0) or bp[0] <= 0 or bp[-1] >= 1):
        raise ConfigError("breakpoints must be strictly increasing inside (0,1)")
    if np.any(vals <= 0):
        raise ConfigError("variance rates must be positive")
    return ControlScenario(kind=PIECEWISE, breakpoints=bp, piece_values=vals)


def feedback_control(table):
    """Full a(t_k, x_j) table, shape (n_steps, n_points)."""
    tab = np.asarray(table, dtype=np.float64)
    if tab.ndim != 2:
        raise ConfigError("feedback table must be 2-d (n_steps, n_points)")
    if np.any(tab <= 0):
        raise ConfigError("variance rates must be positive")
    return ControlScenario(kind=FEEDBACK, table=tab)


def check_scenario_shape(scenario, tgrid, sgrid):
    if scenario.kind == FEEDBACK:
        expected = (tgrid.n_steps, sgrid.n_points)
        if scenario.table.shape != expected:
            raise ConfigError(
                f"feedback table shape {scenario.table.shape}, lattice needs {expected}"
            )


@dataclass(frozen=True)
class ControlGrid:
    """Sorted candidate variance rates for the sup over controls."""

    values: np.ndarray

    def __post_init__(self):
        v = np.unique(np.asarray(self.values, dtype=np.float64))
        if v.size == 0:
            raise ConfigError("control grid must be nonempty")
        if np.any(v <= 0):
            raise ConfigError("control grid rates must be positive")
        object.__setattr__(self, "values", v)


def control_grid(values):
    return ControlGrid(values=np.asarray(values, dtype=np.float64))


def control_grid_for(conj, n=8, a_max=None):
    """Candidate grid covering the conjugate's domain.

    Bounded domains get uniform coverage with both endpoints included;
    unbounded ones must be truncated by the caller via ``a_max``.
    """
    dom = conj.a_domain
    if dom.is_point:
        return control_grid([dom.lo])
    hi = dom.hi
    if not np.isfinite(hi):
        if a_max is None:
            raise ConfigError(
                "conjugate domain is unbounded above; pass a_max to truncate")
        hi = a_max
    lo = dom.lo if not dom.open_lo else min(hi / n, 1e-2)
    return control_grid(np.linspace(lo, hi, n))
