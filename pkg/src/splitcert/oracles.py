"""Convex function oracles: values, subgradients, certified approximate
subgradients, and proximity operators.

Every oracle is stateless and safe for concurrent use.  Subgradient
selection at nondifferentiable points is deterministic: whenever the zero
vector belongs to the subdifferential it is returned, otherwise the
canonical sign-vector element is.  This keeps solver traces reproducible.

An oracle may declare

* ``lipschitz_bound``:  a uniform bound B on the norm of every subgradient
  it returns.  The bound is asserted on each query.
* ``smoothness_bound``: a Lipschitz constant of the gradient, for oracles
  whose value is differentiable everywhere.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ContractViolation, DomainError
from .numerics import inner, norm, norm_sq

__all__ = [
    "FunctionOracle",
    "EpsSubgradient",
    "Quadratic",
    "ScaledL1",
    "Linear",
    "ScaledSqNorm",
    "Hinge",
    "BoxIndicator",
    "BallIndicator",
    "Zero",
    "prox_l1",
    "project_box",
    "project_ball",
    "prox_quadratic",
    "eps_subgradient_at_shifted_point",
]

# Relative slop applied when asserting a declared subgradient-norm bound;
# covers rounding in the norm computation only, never a genuinely larger
# subgradient.
_BOUND_RTOL = 1e-12


class FunctionOracle:
    """Base class: a proper convex function with queryable slopes.

    Subclasses implement ``value`` and ``_subgradient`` and, when the
    proximity operator is available in closed form, ``_prox``.
    """

    lipschitz_bound: Optional[float] = None
    smoothness_bound: Optional[float] = None

    def value(self, x: np.ndarray) -> float:
        raise NotImplementedError

    def _subgradient(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def subgradient(self, x: np.ndarray) -> np.ndarray:
        g = self._subgradient(np.asarray(x, dtype=np.float64))
        if self.lipschitz_bound is not None:
            b = self.lipschitz_bound
            if norm_sq(g) > b * b * (1.0 + _BOUND_RTOL):
                raise ContractViolation(
                    f"subgradient norm {norm(g):.17g} exceeds declared bound {b:.17g}"
                )
        return g

    @property
    def has_prox(self) -> bool:
        return type(self)._prox is not FunctionOracle._prox

    def _prox(self, lam: float, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def prox(self, lam: float, x: np.ndarray) -> np.ndarray:
        if lam <= 0:
            raise ContractViolation("prox step must be positive")
        return self._prox(float(lam), np.asarray(x, dtype=np.float64))

    @property
    def finite_everywhere(self) -> bool:
        """True when the value is real at every point (no indicator part)."""
        return True


@dataclass(frozen=True)
class EpsSubgradient:
    """A slope ``g`` valid up to an additive error ``eps`` >= 0 in the
    subgradient inequality at the query point."""

    g: np.ndarray
    eps: float


# ---------------------------------------------------------------------------
# Standalone proximity operators and projections
# ---------------------------------------------------------------------------

def prox_l1(lam: float, weight: float, x) -> np.ndarray:
    """Proximity operator of ``weight * ||.||_1``: coordinatewise soft
    threshold at ``lam * weight``.
    """
    if lam <= 0:
        raise ContractViolation("prox step must be positive")
    if weight < 0:
        raise ContractViolation("l1 weight must be nonnegative")
    x = np.asarray(x, dtype=np.float64)
    thr = lam * weight
    return np.sign(x) * np.maximum(np.abs(x) - thr, 0.0)


def project_box(lo, hi, x) -> np.ndarray:
    """Coordinatewise clamp onto ``[lo, hi]``.  Bounds may be infinite."""
    lo = np.asarray(lo, dtype=np.float64)
    hi = np.asarray(hi, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    if np.any(lo > hi):
        raise ContractViolation("infeasible box: lo > hi in some coordinate")
    return np.clip(x, lo, hi)


def project_ball(radius: float, center, x) -> np.ndarray:
    """Euclidean projection onto the closed ball of given radius and center."""
    if radius <= 0:
        raise ContractViolation("ball radius must be positive")
    center = np.asarray(center, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    d = x - center
    dist = norm(d)
    if dist <= radius:
        return x.copy()
    return center + (radius / dist) * d


def prox_quadratic(lam: float, A: np.ndarray, b, x) -> np.ndarray:
    """Proximity operator of ``y -> 0.5 * ||A y - b||^2``.

    Solves ``(I + lam A^T A) p = x + lam A^T b`` with a direct method and
    checks the residual against ``1e-10 * (1 + ||x||)``.
    """
    if lam <= 0:
        raise ContractViolation("prox step must be positive")
    A = np.asarray(A, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    n = x.shape[0]
    M = np.eye(n) + lam * (A.T @ A)
    rhs = x + lam * (A.T @ b)
    p = np.linalg.solve(M, rhs)
    res = norm(M @ p - rhs)
    if res > 1e-10 * (1.0 + norm(x)):
        raise ContractViolation(f"prox linear solve residual too large: {res:.3e}")
    return p


def eps_subgradient_at_shifted_point(f: FunctionOracle, x, y) -> EpsSubgradient:
    """Certified approximate subgradient of ``f`` at ``x``.

    Takes the exact subgradient ``g`` at a shifted point ``y`` and returns
    it together with ``eps = f(x) - f(y) - <g, x - y>``.  Convexity makes
    ``eps`` nonnegative and ``g`` an exact member of the eps-subdifferential
    at ``x``: for every z,

        f(z) >= f(y) + <g, z - y> = f(x) + <g, z - x> - eps.

    Raises DomainError when either point has infinite value.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    fx = f.value(x)
    fy = f.value(y)
    if not np.isfinite(fx) or not np.isfinite(fy):
        raise DomainError("eps-subgradient construction needs finite values at x and y")
    g = f.subgradient(y)
    eps = fx - fy - inner(g, x - y)
    # eps >= 0 holds in exact arithmetic; clamp rounding noise.
    return EpsSubgradient(g=g, eps=max(eps, 0.0))


# ---------------------------------------------------------------------------
# Concrete oracles
# ---------------------------------------------------------------------------

class Quadratic(FunctionOracle):
    """``0.5 * ||A x - b||^2`` for a dense matrix A.

    Differentiable with gradient ``A^T (A x - b)``; the gradient Lipschitz
    constant is the largest eigenvalue of ``A^T A``.
    """

    def __init__(self, A, b):
        self.A = np.asarray(A, dtype=np.float64)
        self.b = np.asarray(b, dtype=np.float64)
        self._AtA = self.A.T @ self.A
        self._Atb = self.A.T @ self.b
        self.smoothness_bound = float(np.linalg.eigvalsh(self._AtA)[-1])

    def value(self, x) -> float:
        r = self.A @ np.asarray(x, dtype=np.float64) - self.b
        return 0.5 * norm_sq(r)

    def _subgradient(self, x):
        return self.A.T @ (self.A @ x - self.b)

    def _prox(self, lam, x):
        return prox_quadratic(lam, self.A, self.b, x)


class ScaledL1(FunctionOracle):
    """``weight * ||x - center||_1``.

    The subgradient is the weighted sign vector with zeros at kinks; with
    the dimension known the norm of any selection is at most
    ``weight * sqrt(dim)``, declared as the Lipschitz bound.
    """

    def __init__(self, weight: float, center=None, dim: Optional[int] = None):
        if weight < 0:
            raise ContractViolation("l1 weight must be nonnegative")
        self.weight = float(weight)
        if center is not None:
            self.center = np.asarray(center, dtype=np.float64)
            dim = self.center.shape[0]
        else:
            self.center = None
        if dim is not None:
            self.lipschitz_bound = self.weight * float(np.sqrt(dim))

    def _shift(self, x):
        return x if self.center is None else x - self.center

    def value(self, x) -> float:
        return self.weight * float(np.add.reduce(np.abs(self._shift(np.asarray(x, dtype=np.float64)))))

    def _subgradient(self, x):
        return self.weight * np.sign(self._shift(x))

    def _prox(self, lam, x):
        if self.center is None:
            return prox_l1(lam, self.weight, x)
        return self.center + prox_l1(lam, self.weight, x - self.center)


class Linear(FunctionOracle):
    """``<c, x>``; prox is a translation by ``lam * c``."""

    def __init__(self, c):
        self.c = np.asarray(c, dtype=np.float64)
        self.lipschitz_bound = norm(self.c)

    def value(self, x) -> float:
        return inner(self.c, x)

    def _subgradient(self, x):
        return self.c.copy()

    def _prox(self, lam, x):
        return x - lam * self.c


class ScaledSqNorm(FunctionOracle):
    """``(scale / 2) * ||x||^2``; prox divides by ``1 + lam * scale``."""

    def __init__(self, scale: float):
        if scale < 0:
            raise ContractViolation("scale must be nonnegative")
        self.scale = float(scale)
        self.smoothness_bound = self.scale

    def value(self, x) -> float:
        return 0.5 * self.scale * norm_sq(x)

    def _subgradient(self, x):
        return self.scale * x

    def _prox(self, lam, x):
        return x / (1.0 + lam * self.scale)


class Hinge(FunctionOracle):
    """``max(0, 1 - label * <a, x>)``.

    At the kink the zero vector is a subgradient and is returned.
    """

    def __init__(self, a, label: float):
        self.a = np.asarray(a, dtype=np.float64)
        self.label = float(label)
        self.lipschitz_bound = abs(self.label) * norm(self.a)

    def margin(self, x) -> float:
        return 1.0 - self.label * inner(self.a, x)

    def value(self, x) -> float:
        return max(0.0, self.margin(x))

    def _subgradient(self, x):
        if self.margin(x) > 0.0:
            return -self.label * self.a
        return np.zeros_like(self.a)


class BoxIndicator(FunctionOracle):
    """Indicator of the box ``[lo, hi]``; prox is the clamp, independent of
    the step.  The subgradient selection for feasible points is the zero
    vector (always in the normal cone)."""

    def __init__(self, lo, hi):
        self.lo = np.asarray(lo, dtype=np.float64)
        self.hi = np.asarray(hi, dtype=np.float64)
        if np.any(self.lo > self.hi):
            raise ContractViolation("infeasible box: lo > hi in some coordinate")

    def contains(self, x) -> bool:
        x = np.asarray(x, dtype=np.float64)
        return bool(np.all(x >= self.lo) and np.all(x <= self.hi))

    def value(self, x) -> float:
        return 0.0 if self.contains(x) else float("inf")

    def _subgradient(self, x):
        if not self.contains(x):
            raise DomainError("normal cone queried outside the box")
        return np.zeros_like(np.asarray(x, dtype=np.float64))

    def _prox(self, lam, x):
        return project_box(self.lo, self.hi, x)

    @property
    def finite_everywhere(self) -> bool:
        return False


class BallIndicator(FunctionOracle):
    """Indicator of a closed Euclidean ball; prox is the radial projection."""

    def __init__(self, radius: float, center):
        if radius <= 0:
            raise ContractViolation("ball radius must be positive")
        self.radius = float(radius)
        self.center = np.asarray(center, dtype=np.float64)

    def contains(self, x) -> bool:
        # The tiny slack admits points produced by the projection itself.
        return norm(np.asarray(x, dtype=np.float64) - self.center) <= self.radius * (1 + 1e-12)

    def value(self, x) -> float:
        return 0.0 if self.contains(x) else float("inf")

    def _subgradient(self, x):
        if not self.contains(x):
            raise DomainError("normal cone queried outside the ball")
        return np.zeros_like(self.center)

    def _prox(self, lam, x):
        return project_ball(self.radius, self.center, x)

    @property
    def finite_everywhere(self) -> bool:
        return False


class Zero(FunctionOracle):
    """The zero function; prox is the identity."""

    lipschitz_bound = 0.0
    smoothness_bound = 0.0

    def value(self, x) -> float:
        return 0.0

    def _subgradient(self, x):
        return np.zeros_like(np.asarray(x, dtype=np.float64))

    def _prox(self, lam, x):
        return np.asarray(x, dtype=np.float64).copy()
