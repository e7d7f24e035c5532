"""Input validation helpers shared by the estimators and engine functions."""

import numbers

import numpy as np


def check_points(Z, name="Z", allow_scalar=False):
    """Coerce ``Z`` to a 1-D complex array of finite points.

    Accepts complex arrays, real arrays of shape (n, 2) holding (re, im)
    pairs, or sequences of either.
    """
    if allow_scalar and isinstance(Z, numbers.Number):
        Z = [Z]
    arr = np.asarray(Z)
    if arr.ndim == 2 and arr.shape[1] == 2 and not np.iscomplexobj(arr):
        arr = arr[:, 0] + 1j * arr[:, 1]
    arr = np.asarray(arr, dtype=complex).ravel()
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite coordinates")
    return arr


def check_target(y, n, name="y"):
    y = np.asarray(y, dtype=complex).ravel()
    if y.shape[0] != n:
        raise ValueError(f"{name} has {y.shape[0]} entries, expected {n}")
    if not np.all(np.isfinite(y)):
        raise ValueError(f"{name} contains non-finite values")
    return y


def check_positive(value, name, strict=True):
    value = float(value)
    if not np.isfinite(value) or (value <= 0 if strict else value < 0):
        raise ValueError(f"{name} must be {'positive' if strict else 'non-negative'}, got {value}")
    return value


def as_point(z):
    """Return ``z`` as a Python complex; accepts complex or an [re, im] pair."""
    if isinstance(z, (list, tuple, np.ndarray)) and len(z) == 2 and not np.iscomplexobj(z):
        z = complex(float(z[0]), float(z[1]))
    z = complex(z)
    if not (np.isfinite(z.real) and np.isfinite(z.imag)):
        raise ValueError("point has non-finite coordinates")
    return z
