"""Vector arithmetic with a fixed, deterministic reduction order.

Points are 1-D float64 arrays of dimension >= 1 with finite entries.
All reductions go through :func:`numpy.add.reduce` (numpy's pairwise
summation), so rerunning the same computation on the same platform
produces bit-identical results, and ``inner(a, b) == inner(b, a)``
bit-exactly because the coordinatewise products are identical either way.
"""

from __future__ import annotations

import numpy as np

from .errors import ContractViolation

__all__ = ["as_point", "inner", "norm_sq", "norm", "row_norm_sq"]


def as_point(coords) -> np.ndarray:
    """Validate and return a point as a read-only float64 array.

    Raises ContractViolation for empty vectors or non-finite coordinates.
    """
    x = np.asarray(coords, dtype=np.float64)
    if x.ndim == 0:
        x = x.reshape(1)
    if x.ndim != 1 or x.size < 1:
        raise ContractViolation(f"a point must be a 1-D vector, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ContractViolation("point coordinates must be finite")
    out = x.copy()
    out.flags.writeable = False
    return out


def _check_dims(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise ContractViolation(f"dimension mismatch: {a.shape} vs {b.shape}")


def inner(a, b) -> float:
    """Euclidean inner product, pairwise-summed in coordinate order."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    _check_dims(a, b)
    return float(np.add.reduce(a * b))


def norm_sq(a) -> float:
    """Squared Euclidean norm, same reduction as :func:`inner`."""
    a = np.asarray(a, dtype=np.float64)
    return float(np.add.reduce(a * a))


def norm(a) -> float:
    return norm_sq(a) ** 0.5


def row_norm_sq(m: np.ndarray) -> np.ndarray:
    """Per-row squared norms of a 2-D array, same reduction as norm_sq."""
    return np.add.reduce(m * m, axis=1)
