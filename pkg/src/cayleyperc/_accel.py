"""Backend selection for the hot kernels.

Set ``CAYLEYPERC_BACKEND=numpy`` to force the pure-numpy path; the default
is numba when it imports cleanly.
"""
import os

BACKEND_ENV = "CAYLEYPERC_BACKEND"


def _numba_available():
    try:
        import numba  # noqa: F401
    except Exception:
        return False
    return True


def requested_backend():
    value = os.environ.get(BACKEND_ENV, "numba").strip().lower()
    if value not in ("numba", "numpy"):
        raise ValueError(f"{BACKEND_ENV} must be 'numba' or 'numpy', got {value!r}")
    return value


HAVE_NUMBA = _numba_available()
USE_NUMBA = HAVE_NUMBA and requested_backend() == "numba"


def _dummy_njit(*args, **kwargs):
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]

    def wrapper(f):
        return f

    return wrapper


if HAVE_NUMBA:
    from numba import njit
else:  # pragma: no cover
    njit = _dummy_njit
