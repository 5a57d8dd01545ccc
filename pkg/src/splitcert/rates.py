"""Closed-form envelopes for the objective-value gap of a run whose
iterates satisfy, for step constants ``(eta_t, xi_t)`` and every reference
point x,

    ||x_{t+1} - x||^2 <= ||x_t - x||^2 - eta_t (f(x_t) - f(x)) + xi_t.

Telescoping that inequality bounds ``f(x_T) - f_*`` by an explicit sum;
for polynomially decaying constants the sum itself is bounded in closed
form.  All logarithms are natural.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractViolation

__all__ = [
    "PolySchedule",
    "envelope_constant",
    "weighted_tail_sum",
    "weighted_tail_sum_bound",
    "gap_bound_from_sequences",
    "gap_bound_curve_from_sequences",
    "gap_bound_zero_error",
    "gap_bound_poly",
]


@dataclass(frozen=True)
class PolySchedule:
    """Polynomially decaying certificate constants.

    ``eta_t = eta * t**(-theta1)`` exactly, and ``xi * t**(-theta2)`` is an
    upper envelope for the per-step error ``xi_t``.
    """

    eta: float
    theta1: float
    xi: float
    theta2: float

    def __post_init__(self):
        if self.eta <= 0:
            raise ContractViolation("eta must be positive")
        if not (0.0 <= self.theta1 < 1.0):
            raise ContractViolation("theta1 must lie in [0, 1)")
        if self.xi < 0 or self.theta2 < 0:
            raise ContractViolation("xi and theta2 must be nonnegative")

    def eta_at(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=np.float64)
        return self.eta * t ** (-self.theta1)

    def xi_at(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=np.float64)
        return self.xi * t ** (-self.theta2)


def envelope_constant(theta2: float) -> float:
    """Piecewise constant multiplying the error term of the polynomial gap
    bound:

        5 + 2/(1 - theta2)                    for theta2 < 1
        9                                     for theta2 = 1
        (2**theta2 + 3*theta2 - 1)/(theta2-1) for theta2 > 1

    The pieces need not agree at theta2 = 1; the middle case is exact.
    """
    if theta2 < 0:
        raise ContractViolation("theta2 must be nonnegative")
    if theta2 < 1.0:
        return 5.0 + 2.0 / (1.0 - theta2)
    if theta2 == 1.0:
        return 9.0
    return (2.0 ** theta2 + 3.0 * theta2 - 1.0) / (theta2 - 1.0)


def weighted_tail_sum(q: float, T: int) -> float:
    """Exact value of ``sum_{t=1}^{T-1} t**(-q) / (T - t)``."""
    if q < 0:
        raise ContractViolation("q must be nonnegative")
    if T < 2:
        raise ContractViolation("T must be at least 2")
    t = np.arange(1, T, dtype=np.float64)
    return float(np.add.reduce(t ** (-q) / (T - t)))


def weighted_tail_sum_bound(q: float, T: int) -> float:
    """Closed-form envelope for :func:`weighted_tail_sum`, valid for T >= 3:

        (4 + 2/(1-q)) * T**(-q) * log(T)   for q < 1
        8 * log(T) / T                     for q = 1
        ((2**q + 2q)/(q - 1)) / T          for q > 1
    """
    if q < 0:
        raise ContractViolation("q must be nonnegative")
    if T < 3:
        raise ContractViolation("the envelope is stated for T >= 3")
    if q < 1.0:
        return (4.0 + 2.0 / (1.0 - q)) * T ** (-q) * np.log(T)
    if q == 1.0:
        return 8.0 * np.log(T) / T
    return (2.0 ** q + 2.0 * q) / (q - 1.0) / T


def _check_sequences(eta: np.ndarray, xi: np.ndarray, T: int) -> None:
    if T < 2:
        raise ContractViolation("the telescoped bound needs T > 1")
    if len(eta) < T or len(xi) < T:
        raise ContractViolation(f"need eta_t, xi_t for t = 1..{T}")
    if np.any(np.diff(eta[:T]) > 0):
        raise ContractViolation("eta sequence must be non-increasing")
    if np.any(eta[:T] <= 0) or np.any(xi[:T] < 0):
        raise ContractViolation("eta_t must be positive and xi_t nonnegative")


def gap_bound_from_sequences(d_sq: float, eta, xi, T: int) -> float:
    """Gap bound from explicit per-step constants, solved for the gap:

        f(x_T) - f_* <= [ d_sq/T + sum_{t=1}^{T-1} xi_t/(T-t) + xi_T ] / eta_T

    ``eta`` and ``xi`` are 1-based sequences given as arrays with entry
    ``[t-1]`` holding the value at step t; ``eta`` must be non-increasing.
    """
    if d_sq < 0:
        raise ContractViolation("d_sq must be nonnegative")
    eta = np.asarray(eta, dtype=np.float64)
    xi = np.asarray(xi, dtype=np.float64)
    _check_sequences(eta, xi, T)
    ts = np.arange(1, T, dtype=np.float64)
    tail = float(np.add.reduce(xi[: T - 1] / (T - ts)))
    return (d_sq / T + tail + float(xi[T - 1])) / float(eta[T - 1])


def gap_bound_curve_from_sequences(d_sq: float, eta, xi, T_max: int) -> np.ndarray:
    """Vectorized :func:`gap_bound_from_sequences` for every T in [2, T_max].

    Returns an array ``b`` with ``b[T-2]`` the bound at horizon T.  The
    weighted tails for all horizons form a discrete convolution of the xi
    sequence with 1/k, evaluated exactly.
    """
    if d_sq < 0:
        raise ContractViolation("d_sq must be nonnegative")
    eta = np.asarray(eta, dtype=np.float64)
    xi = np.asarray(xi, dtype=np.float64)
    _check_sequences(eta, xi, T_max)
    inv = 1.0 / np.arange(1, T_max, dtype=np.float64)
    # tails[T-2] = sum_{t=1}^{T-1} xi_t / (T - t) for T = 2..T_max
    tails = np.convolve(xi[: T_max - 1], inv)[: T_max - 1]
    Ts = np.arange(2, T_max + 1, dtype=np.float64)
    return (d_sq / Ts + tails + xi[1:T_max]) / eta[1:T_max]


def gap_bound_zero_error(d_sq: float, eta_T: float, T: int) -> float:
    """Specialization of the telescoped bound when every xi_t is zero:
    ``d_sq / (eta_T * T)``."""
    if d_sq < 0:
        raise ContractViolation("d_sq must be nonnegative")
    if eta_T <= 0:
        raise ContractViolation("eta_T must be positive")
    if T < 2:
        raise ContractViolation("the bound needs T > 1")
    return d_sq / (eta_T * T)


def gap_bound_poly(d_sq: float, schedule: PolySchedule, T: int) -> float:
    """Closed-form gap bound for polynomially decaying constants:

        (d_sq/eta) T**(theta1-1)
        + (xi * c(theta2) / eta) (log T)**[theta2<=1] T**(theta1-min(theta2,1))

    Valid for T >= 3.  The log factor appears exactly when theta2 <= 1.
    """
    if d_sq < 0:
        raise ContractViolation("d_sq must be nonnegative")
    if T < 3:
        raise ContractViolation("the polynomial bound is stated for T >= 3")
    term1 = (d_sq / schedule.eta) * T ** (schedule.theta1 - 1.0)
    c = envelope_constant(schedule.theta2)
    logf = np.log(T) if schedule.theta2 <= 1.0 else 1.0
    term2 = (schedule.xi * c / schedule.eta) * logf * T ** (
        schedule.theta1 - min(schedule.theta2, 1.0)
    )
    return float(term1 + term2)
