"""Input checks for complex arrays.

``sklearn.utils.check_array`` rejects complex input, so the estimator layer
and the functional API share these helpers instead.
"""

from numbers import Number

import numpy as np

from .exceptions import DimensionError, InvalidScalarError, InvalidToleranceError


def as_vector(v, name="v", allow_empty=False):
    """Return ``v`` as a finite 1-D complex128 array."""
    arr = np.asarray(v)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.ndim != 1:
        raise DimensionError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if arr.size == 0 and not allow_empty:
        raise DimensionError(f"{name} is empty")
    arr = arr.astype(np.complex128, copy=False)
    if not np.all(np.isfinite(arr)):
        raise InvalidScalarError(f"{name} has non-finite entries")
    return arr


def as_matrix(M, name="M", square=False):
    """Return ``M`` as a finite 2-D complex128 array."""
    arr = np.asarray(M)
    if arr.ndim != 2:
        raise DimensionError(f"{name} must be two-dimensional, got shape {arr.shape}")
    if square and arr.shape[0] != arr.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {arr.shape}")
    arr = arr.astype(np.complex128, copy=False)
    if not np.all(np.isfinite(arr)):
        raise InvalidScalarError(f"{name} has non-finite entries")
    return arr


def as_factor(F, n, name="F"):
    """Return a generator factor as an ``(n, d)`` array; 1-D input means d=1."""
    arr = np.asarray(F, dtype=np.complex128)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2 or arr.shape[0] != n:
        raise DimensionError(f"{name} must have {n} rows, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidScalarError(f"{name} has non-finite entries")
    return arr


def as_scalar(x, name="x", nonzero=False):
    if not isinstance(x, Number) and not (isinstance(x, np.ndarray) and x.ndim == 0):
        raise InvalidScalarError(f"{name} must be a scalar")
    z = complex(x)
    if not np.isfinite(z):
        raise InvalidScalarError(f"{name} must be finite")
    if nonzero and z == 0:
        raise InvalidScalarError(f"{name} must be nonzero")
    return z


def check_epsilon(epsilon):
    """Validate an approximation tolerance; ``None`` means exact."""
    if epsilon is None:
        return None
    eps = float(epsilon)
    if not (eps > 0) or not np.isfinite(eps):
        raise InvalidToleranceError(f"epsilon must be positive and finite, got {epsilon!r}")
    return eps


def check_same_length(n, *arrays, names=None):
    for i, a in enumerate(arrays):
        if len(a) != n:
            label = names[i] if names else f"argument {i}"
            raise DimensionError(f"{label} has length {len(a)}, expected {n}")
