"""Hot numeric kernels with a numba fast path and a pure-numpy fallback.

Backend selection is controlled by the ``FINSLERPOLY_BACKEND``
environment variable, read once at import:

* ``auto`` (default): use numba when importable, else numpy
* ``numba``: require the jit backend, raise if unavailable
* ``numpy``: force the vectorized numpy fallback

Both backends implement the same algorithms (cyclic Jacobi sweeps,
LDL^T with diagonal pivoting) so results agree to rounding.  See
``benchmarks/bench_kernels.py`` for a side-by-side timing run.
"""

import os

_BACKEND_REQ = os.environ.get("FINSLERPOLY_BACKEND", "auto").lower()
if _BACKEND_REQ not in ("auto", "numba", "numpy"):
    raise ValueError(
        f"FINSLERPOLY_BACKEND must be auto|numba|numpy, got {_BACKEND_REQ!r}")

if _BACKEND_REQ in ("auto", "numba"):
    try:
        from . import _numba_impl as _impl
        NUMBA_ENABLED = True
    except ImportError:
        if _BACKEND_REQ == "numba":
            raise
        from . import _numpy_impl as _impl
        NUMBA_ENABLED = False
else:
    from . import _numpy_impl as _impl
    NUMBA_ENABLED = False

BACKEND = "numba" if NUMBA_ENABLED else "numpy"

batch_eigen_extremes = _impl.batch_eigen_extremes
batch_is_pd = _impl.batch_is_pd
pencil_pd_mask = _impl.pencil_pd_mask

__all__ = [
    "BACKEND",
    "NUMBA_ENABLED",
    "batch_eigen_extremes",
    "batch_is_pd",
    "pencil_pd_mask",
]
