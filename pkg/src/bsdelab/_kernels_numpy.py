"""Pure-numpy reference kernels.

These mirror the numba kernels in ``_kernels_numba`` operation for
operation (same accumulation order, same clamping), so the two backends
produce bit-identical output. Keep both files in sync.
"""

import numpy as np


def expect_uniform(values, rel_scale, xi, w):
    """One-step conditional expectation on a uniform grid.

    out[j] = sum_m w[m] * I(x_j + scale_j * xi[m]) where I is the
    piecewise-linear interpolant of ``values`` with boundary-slope linear
    extrapolation, and rel_scale[j] = sqrt(a_j * dt) / dx.
    """
    n = values.shape[0]
    j = np.arange(n, dtype=np.float64)
    out = np.zeros(n)
    for q in range(xi.shape[0]):
        pos = j + rel_scale * xi[q]
        i = np.floor(pos).astype(np.int64)
        np.clip(i, 0, n - 2, out=i)
        th = pos - i
        out += w[q] * (values[i] + th * (values[i + 1] - values[i]))
    return out


def counterexample_step(y, x, db, t, dt, c):
    """In-place Euler step of the coupled (Y, X) system at time t.

    dY = -3Y/(1-t) dt + X/sqrt(1-t) dB
    dX = -3(1+c^2)X/(2c^2(1-t)) dt + 3Y/(c sqrt(1-t)) dB
    """
    om = 1.0 - t
    sq = np.sqrt(om)
    cy = 3.0 / om * dt
    cx = 3.0 * (1.0 + c * c) / (2.0 * c * c * om) * dt
    cz = 3.0 / (c * sq)
    dy = -y * cy + x / sq * db
    dx = -x * cx + y * cz * db
    y += dy
    x += dx
