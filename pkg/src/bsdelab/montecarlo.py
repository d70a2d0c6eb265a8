"""Euler-Maruyama simulation of the explicit non-uniqueness system, plus
plain Monte Carlo terminal-value checks.

The simulated pair solves

    Y_t =     - int_0^t 3 Y_s/(1-s) ds            + int_0^t X_s/sqrt(1-s) dB_s
    X_t = 1   - int_0^t 3(1+c^2) X_s/(2c^2(1-s)) ds + int_0^t 3 Y_s/(c sqrt(1-s)) dB_s

for a constant c != 1, so Y starts at zero yet the combination
R_t = (3/c^2) Y_t^2 + X_t^2 has mean exactly (1-t)^3: the constructed
solution is genuinely nonzero. Coefficients blow up at t = 1, so the
simulation stops at t_stop < 1 and enforces max drift coefficient * dt < 1/2.

Randomness comes from a counter-based generator (Philox) with one key per
path batch and normal draws via the inverse CDF, so reports are
bit-reproducible across platforms and batch-parallel runs; the batch
reduction order is fixed.
"""

from dataclasses import dataclass
from typing import Dict, List, Tuple

import numpy as np
from scipy.special import ndtri

from . import backend
from .errors import ConfigError, StabilityError

DEFAULT_BATCH = 20_000
DEFAULT_T_STOP = 1.0 - 1e-3


@dataclass(frozen=True)
class CounterexampleConfig:
    c: float = 2.0
    n_paths: int = 100_000
    n_steps: int = 4000
    t_stop: float = DEFAULT_T_STOP
    seed: int = 0
    batch_size: int = DEFAULT_BATCH

    def __post_init__(self):
        if abs(self.c - 1.0) < 1e-6:
            raise ConfigError("c must stay away from 1")
        if not (0.0 < self.t_stop < 1.0):
            raise ConfigError("t_stop must lie in (0, 1)")
        if self.n_paths < 2 or self.n_steps < 2:
            raise ConfigError("need at least 2 paths and 2 steps")


@dataclass
class CounterexampleReport:
    config: CounterexampleConfig
    checkpoints: np.ndarray
    mean_r: np.ndarray
    stderr_r: np.ndarray
    target_r: np.ndarray          # (1 - t)^3
    sup_y2_mean: np.ndarray       # E[ sup_{s in [t, t_stop]} Y_s^2 ] per checkpoint
    decay_exponent: float
    dynamics_residual: float      # mean |2-step increment - coarse Euler step|


def _max_drift_coeff(c, t):
    return max(3.0 / (1.0 - t), 3.0 * (1.0 + c * c) / (2.0 * c * c * (1.0 - t)))


def _normals(rng, size):
    # open-interval uniforms -> inverse CDF; ndtri(0) = -inf is unreachable
    u = (rng.integers(0, 1 << 53, size) + 0.5) * 2.0 ** -53
    return ndtri(u)


def simulate_counterexample(cfg, checkpoints):
    """Seeded Euler run; per-checkpoint statistics of R and of sup Y^2."""
    checkpoints = np.asarray(sorted(checkpoints), dtype=np.float64)
    if checkpoints.size == 0:
        raise ConfigError("need at least one checkpoint")
    if checkpoints[0] <= 0 or checkpoints[-1] > cfg.t_stop + 1e-12:
        raise ConfigError("checkpoints must lie in (0, t_stop]")
    dt = cfg.t_stop / cfg.n_steps
    if _max_drift_coeff(cfg.c, cfg.t_stop) * dt >= 0.5:
        need = int(np.ceil(_max_drift_coeff(cfg.c, cfg.t_stop) * cfg.t_stop / 0.5)) + 1
        raise StabilityError(
            f"drift * dt = {_max_drift_coeff(cfg.c, cfg.t_stop) * dt:.3g} >= 0.5 "
            f"at t_stop={cfg.t_stop}; need n_steps >= {need}")

    # snap to the nearest grid step; all statistics and targets use the
    # realized times, so snapping introduces no bias
    check_idx = np.clip(np.rint(checkpoints / dt).astype(np.int64), 1,
                        cfg.n_steps)
    if np.unique(check_idx).size != check_idx.size:
        raise ConfigError("checkpoints collide on the time grid")
    checkpoints = check_idx * dt

    c = cfg.c
    sq_dt = np.sqrt(dt)
    n_check = checkpoints.size
    sum_r = np.zeros(n_check)
    sum_r2 = np.zeros(n_check)
    sum_sup = np.zeros(n_check)
    resid_sum = 0.0
    resid_count = 0

    start = 0
    batch_index = 0
    while start < cfg.n_paths:
        size = min(cfg.batch_size, cfg.n_paths - start)
        rng = np.random.Generator(np.random.Philox(key=[cfg.seed, batch_index]))
        y = np.zeros(size)
        x = np.ones(size)
        sup_y2 = np.zeros((n_check, size))
        active = np.zeros(n_check, dtype=bool)
        # state at even steps, for the coarse-grained dynamics residual
        y_prev = y.copy()
        x_prev = x.copy()
        db_carry = np.zeros(size)
        t_prev = 0.0
        for k in range(cfg.n_steps):
            t = k * dt
            db = _normals(rng, size) * sq_dt
            backend.counterexample_step(y, x, db, t, dt, c)
            hit = check_idx <= k + 1
            newly = hit & ~active
            active |= hit
            for i in np.nonzero(active)[0]:
                if newly[i]:
                    sup_y2[i] = y * y
                else:
                    np.maximum(sup_y2[i], y * y, out=sup_y2[i])
            if k % 2 == 0:
                db_carry = db.copy()
            else:
                om = 1.0 - t_prev
                pred = (y_prev - 3.0 * y_prev / om * (2.0 * dt)
                        + x_prev / np.sqrt(om) * (db_carry + db))
                resid_sum += float(np.sum(np.abs(y - pred)))
                resid_count += size
                y_prev = y.copy()
                x_prev = x.copy()
                t_prev = t + dt
            ki = np.nonzero(check_idx == k + 1)[0]
            for i in ki:
                r = 3.0 / (c * c) * y * y + x * x
                sum_r[i] += float(np.sum(r))
                sum_r2[i] += float(np.sum(r * r))
        sum_sup += sup_y2.sum(axis=1)
        start += size
        batch_index += 1

    n = float(cfg.n_paths)
    mean_r = sum_r / n
    var_r = np.maximum(sum_r2 / n - mean_r ** 2, 0.0) * n / (n - 1.0)
    stderr = np.sqrt(var_r / n)
    sup_mean = sum_sup / n
    slope = np.nan
    if n_check >= 2:
        slope = float(np.polyfit(np.log1p(-checkpoints), np.log(sup_mean), 1)[0])
    return CounterexampleReport(
        config=cfg,
        checkpoints=checkpoints,
        mean_r=mean_r,
        stderr_r=stderr,
        target_r=(1.0 - checkpoints) ** 3,
        sup_y2_mean=sup_mean,
        decay_exponent=slope,
        dynamics_residual=resid_sum / max(resid_count, 1),
    )


def mc_terminal_value(g, a, n_paths, seed, x0=0.0):
    """Antithetic Monte Carlo estimate of E[g(x0 + sqrt(a) W_1)]."""
    if a <= 0:
        raise ConfigError("variance rate must be positive")
    half = max(n_paths // 2, 1)
    rng = np.random.Generator(np.random.Philox(key=[seed, 0]))
    xi = _normals(rng, half)
    s = np.sqrt(a)
    pair_avg = 0.5 * (np.asarray(g(x0 + s * xi), dtype=np.float64)
                      + np.asarray(g(x0 - s * xi), dtype=np.float64))
    mean = float(pair_avg.mean())
    stderr = float(pair_avg.std(ddof=1) / np.sqrt(half))
    return mean, stderr
