"""Named terminal payoffs with closed-form oracles.

Every registry entry has a known value under a constant variance rate,
which is what the verification suites lean on. Piecewise-linear tables
cover everything else; no embedded expression language.
"""

import numpy as np

from .errors import ConfigError


def call(strike=0.0):
    return lambda x: np.maximum(np.asarray(x, dtype=np.float64) - strike, 0.0)


def put(strike=0.0):
    return lambda x: np.maximum(strike - np.asarray(x, dtype=np.float64), 0.0)


def callspread(k1, k2):
    if not k1 < k2:
        raise ConfigError("callspread needs k1 < k2")
    lo, hi = call(k1), call(k2)
    return lambda x: lo(x) - hi(x)


def butterfly(k, w):
    if w <= 0:
        raise ConfigError("butterfly needs width w > 0")
    a, b, c = call(k - w), call(k), call(k + w)
    return lambda x: a(x) - 2.0 * b(x) + c(x)


def linear(beta):
    return lambda x: beta * np.asarray(x, dtype=np.float64)


def piecewise_linear(xs, ys):
    """Table interpolant; extrapolates with the boundary segment slopes."""
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    if xs.size < 2 or xs.size != ys.size:
        raise ConfigError("piecewise table needs matching xs/ys, at least 2 points")
    if np.any(np.diff(xs) <= 0):
        raise ConfigError("piecewise table xs must be strictly increasing")
    slope_lo = (ys[1] - ys[0]) / (xs[1] - xs[0])
    slope_hi = (ys[-1] - ys[-2]) / (xs[-1] - xs[-2])

    def f(x):
        x = np.asarray(x, dtype=np.float64)
        out = np.interp(x, xs, ys)
        out = np.where(x < xs[0], ys[0] + slope_lo * (x - xs[0]), out)
        out = np.where(x > xs[-1], ys[-1] + slope_hi * (x - xs[-1]), out)
        return out

    return f


_FIXED = {
    "abs": lambda x: np.abs(np.asarray(x, dtype=np.float64)),
    "square": lambda x: np.asarray(x, dtype=np.float64) ** 2,
    "neg_square": lambda x: -(np.asarray(x, dtype=np.float64) ** 2),
}


def make_payoff(name, **params):
    """Build a payoff from its registry name and parameters."""
    if name in _FIXED:
        if params:
            raise ConfigError(f"payoff {name!r} takes no parameters")
        return _FIXED[name]
    try:
        if name == "call":
            return call(float(params.pop("strike", 0.0)), **params)
        if name == "put":
            return put(float(params.pop("strike", 0.0)), **params)
        if name == "callspread":
            return callspread(float(params.pop("k1")), float(params.pop("k2")), **params)
        if name == "butterfly":
            return butterfly(float(params.pop("k")), float(params.pop("w")), **params)
        if name == "linear":
            return linear(float(params.pop("beta", 1.0)), **params)
        if name == "table":
            return piecewise_linear(params.pop("xs"), params.pop("ys"), **params)
    except KeyError as exc:
        raise ConfigError(f"payoff {name!r} is missing parameter {exc}") from None
    except TypeError as exc:
        raise ConfigError(f"payoff {name!r}: {exc}") from None
    raise ConfigError(f"unknown payoff {name!r}")
