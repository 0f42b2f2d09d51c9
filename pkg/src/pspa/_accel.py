"""Backend selection for the compiled kernels.

Numba is used when it imports cleanly and ``PSPA_BACKEND`` is not set to
``numpy``. ``PSPA_BACKEND=numba`` makes a missing numba a hard error instead
of a silent fallback.
"""
import os
import warnings

_requested = os.environ.get("PSPA_BACKEND", "auto").strip().lower()
if _requested not in ("auto", "numba", "numpy"):
    raise ImportError(f"PSPA_BACKEND must be auto, numba or numpy, got {_requested!r}")

HAVE_NUMBA = False
if _requested != "numpy":
    try:
        from numba import njit  # noqa: F401

        HAVE_NUMBA = True
    except ImportError:
        if _requested == "numba":
            raise
        warnings.warn("numba is not installed - falling back to numpy kernels")

if not HAVE_NUMBA:

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return lambda f: f


BACKEND = "numba" if HAVE_NUMBA else "numpy"
