"""Kernel backend selection.

The lattice one-step expectation and the Monte Carlo stepping loop
dominate runtime. Both exist as numba-compiled kernels with a pure-numpy
fallback; the two are arithmetic-identical, so switching backends never
changes results.

Selection is via the environment variable ``BSDELAB_BACKEND``:

* ``auto`` (default) -- numba if importable, else numpy
* ``numba``          -- require numba, fail loudly if missing
* ``numpy``          -- force the pure-numpy path

``benchmarks/bench_kernels.py`` times the two implementations against
each other.
"""

import os
import warnings

from . import _kernels_numpy

_requested = os.environ.get("BSDELAB_BACKEND", "auto").lower()
if _requested not in ("auto", "numba", "numpy"):
    warnings.warn(
        f"BSDELAB_BACKEND={_requested!r} not recognized; falling back to 'auto'"
    )
    _requested = "auto"

if _requested == "numpy":
    _impl = _kernels_numpy
else:
    try:
        from . import _kernels_numba as _impl
    except ImportError:
        if _requested == "numba":
            raise
        warnings.warn("numba unavailable; using pure-numpy kernels")
        _impl = _kernels_numpy

BACKEND = "numba" if _impl is not _kernels_numpy else "numpy"

expect_uniform = _impl.expect_uniform
counterexample_step = _impl.counterexample_step
