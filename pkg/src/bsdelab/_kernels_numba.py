"""Numba-compiled hot kernels.

Arithmetic must stay operation-for-operation identical to
``_kernels_numpy`` (no fastmath, same accumulation order) so that the env
flag only changes speed, never results.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def expect_uniform(values, rel_scale, xi, w):
    n = values.shape[0]
    m = xi.shape[0]
    out = np.zeros(n)
    for j in range(n):
        s = rel_scale[j]
        acc = 0.0
        for q in range(m):
            pos = j + s * xi[q]
            i = int(np.floor(pos))
            if i < 0:
                i = 0
            elif i > n - 2:
                i = n - 2
            th = pos - i
            acc += w[q] * (values[i] + th * (values[i + 1] - values[i]))
        out[j] = acc
    return out


@njit(cache=True)
def counterexample_step(y, x, db, t, dt, c):
    om = 1.0 - t
    sq = np.sqrt(om)
    cy = 3.0 / om * dt
    cx = 3.0 * (1.0 + c * c) / (2.0 * c * c * om) * dt
    cz = 3.0 / (c * sq)
    for i in range(y.shape[0]):
        dy = -y[i] * cy + x[i] / sq * db[i]
        dx = -x[i] * cx + y[i] * cz * db[i]
        y[i] = y[i] + dy
        x[i] = x[i] + dx
