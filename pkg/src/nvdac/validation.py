"""Input validation helpers shared across the package."""

import numpy as np


def as_float_array(x, name, shape=None):
    """Coerce to a float ndarray, optionally enforcing a shape."""
    arr = np.asarray(x, dtype=float)
    if shape is not None and arr.shape != shape:
        raise ValueError(f"{name} must have shape {shape}, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite")
    return arr


def as_vector3(x, name):
    return as_float_array(x, name, shape=(3,))


def as_matrix3(x, name):
    return as_float_array(x, name, shape=(3, 3))


def check_symmetric(m, tol, name):
    if np.abs(m - m.T).max() > tol:
        raise ValueError(f"{name} must be symmetric to within {tol}")


def check_unit_vector(v, tol, name):
    if abs(np.linalg.norm(v) - 1.0) > tol:
        raise ValueError(f"{name} must be a unit vector to within {tol}")


def check_hermitian(h, name, rtol=1e-9):
    """Hermiticity check scaled to the largest entry magnitude."""
    h = np.asarray(h)
    if h.shape != (3, 3):
        raise ValueError(f"{name} must be a 3x3 matrix, got shape {h.shape}")
    scale = max(np.abs(h).max(), 1.0)
    if np.abs(h - h.conj().T).max() > rtol * scale:
        raise ValueError(f"{name} must be Hermitian to within {rtol} of its largest entry")


def check_positive(x, name):
    if not x > 0:
        raise ValueError(f"{name} must be > 0, got {x}")


def check_non_negative(x, name):
    if not x >= 0:
        raise ValueError(f"{name} must be >= 0, got {x}")


def readonly(arr):
    """Mark an array immutable so frozen dataclasses stay value-like."""
    arr.setflags(write=False)
    return arr
