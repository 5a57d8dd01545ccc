"""Trace analysis: closed-form bound curves per rule, empirical-gap
comparison, and log-log slope extraction.

Bound rules are named by short identifiers (the configuration vocabulary
of the harness):

* ``thm32``, ``thm35``, ``thm37``, ``thm310``: the per-algorithm gap
  envelopes for the diminishing-step methods (forward-backward, projected
  subgradient, incremental, Douglas-Rachford), valid from T = 4.
* ``prop33``: the constant-step envelope ``beta d^2 / (2T)`` for the
  smooth method, valid from T = 2.
* ``thm22``: the telescoped bound evaluated on the run's exact certificate
  sequences, valid from T = 2.
* ``thm24``: the polynomial closed form for the same sequences, from T = 3.
* ``cor23``: the zero-error specialization; applicable only when the
  certificate error sequence vanishes identically.
"""

from __future__ import annotations

import numpy as np

from .algorithms import RunTrace
from .certify import certificate_error_coefficient, constants_for_trace, observed_B
from .errors import ConfigError, ContractViolation
from .rates import (
    PolySchedule,
    envelope_constant,
    gap_bound_curve_from_sequences,
    gap_bound_poly,
)

__all__ = ["BOUND_RULES", "bound_curve", "compare_bounds", "fit_slopes"]

BOUND_RULES = ("thm22", "cor23", "thm24", "thm32", "thm35", "thm37", "thm310", "prop33")

_RULE_ALGO = {"thm32": "fb", "thm35": "psg", "thm37": "inc", "thm310": "dr",
              "prop33": "fb-smooth"}


def _rule_B(trace: RunTrace, rule: str) -> float:
    if trace.B_analytic is not None:
        return trace.B_analytic
    if rule == "thm35":
        # The projected-subgradient envelope bounds only the subgradient side.
        if trace.subgrad_norms_l.size == 0:
            raise ContractViolation("trace recorded no subgradient norms")
        return float(np.max(trace.subgrad_norms_l))
    return observed_B(trace)


def _poly_envelope(trace: RunTrace, K: float, Ts: np.ndarray) -> np.ndarray:
    theta = trace.theta
    d_sq = trace.d_sq
    first = d_sq / (2.0 * trace.alpha) * Ts ** (theta - 1.0)
    c = envelope_constant(2.0 * theta)
    logf = np.log(Ts) if 2.0 * theta <= 1.0 else 1.0
    return first + K * c * logf * Ts ** (-min(theta, 1.0 - theta))


def bound_curve(trace: RunTrace, rule: str) -> tuple[np.ndarray, np.ndarray]:
    """Bound values for every admissible horizon of the trace.

    Returns ``(Ts, bounds)`` with Ts starting at the rule's first valid
    horizon.  Raises ConfigError when the rule does not apply to the
    trace's algorithm or recorded constants.
    """
    if rule not in BOUND_RULES:
        raise ConfigError(f"unknown bound rule {rule!r}")
    T = trace.T
    want = _RULE_ALGO.get(rule)
    if want is not None and trace.algo_id != want:
        raise ConfigError(f"rule {rule!r} applies to algorithm {want!r}, "
                          f"trace is {trace.algo_id!r}")

    if rule == "prop33":
        if T < 2:
            raise ConfigError("need at least two iterates")
        Ts = np.arange(2, T + 1, dtype=np.float64)
        return Ts, trace.beta * trace.d_sq / (2.0 * Ts)

    if rule in ("thm32", "thm35", "thm37", "thm310"):
        if T < 4:
            raise ConfigError("the envelope starts at T = 4")
        B = _rule_B(trace, rule)
        a, eps, m = trace.alpha, trace.eps, trace.m
        K = {
            "thm32": a * (5.0 * B * B + eps),
            "thm35": a * (B * B + 2.0 * eps),
            "thm37": a * (4.0 * m + 5.0) * m * B * B / 2.0,
            "thm310": 8.0 * a * B * B,
        }[rule]
        Ts = np.arange(4, T + 1, dtype=np.float64)
        return Ts, _poly_envelope(trace, K, Ts)

    # Certificate-sequence rules: build (eta_t, xi_t) for t = 1..T.
    constants = constants_for_trace(trace)
    alpha_T = trace.alpha_values[T - 1]
    if constants.provenance == "smooth":
        eta_full = np.full(T, 2.0 / trace.beta)
        xi_full = np.zeros(T)
    else:
        coef = certificate_error_coefficient(constants.provenance, constants.B,
                                             eps=constants.eps, m=constants.m)
        eta_full = np.append(constants.eta, 2.0 * alpha_T)
        xi_full = np.append(constants.xi, coef * alpha_T ** 2)

    if rule == "thm22":
        if T < 2:
            raise ConfigError("need at least two iterates")
        Ts = np.arange(2, T + 1, dtype=np.float64)
        return Ts, gap_bound_curve_from_sequences(trace.d_sq, eta_full, xi_full, T)

    if rule == "cor23":
        if np.any(xi_full != 0.0):
            raise ConfigError("the zero-error bound needs a vanishing error sequence")
        if T < 2:
            raise ConfigError("need at least two iterates")
        Ts = np.arange(2, T + 1, dtype=np.float64)
        return Ts, trace.d_sq / (eta_full[1:] * Ts)

    # thm24
    if T < 3:
        raise ConfigError("the polynomial bound starts at T = 3")
    if constants.provenance == "smooth":
        sched = PolySchedule(eta=2.0 / trace.beta, theta1=0.0, xi=0.0, theta2=0.0)
    else:
        coef = certificate_error_coefficient(constants.provenance, constants.B,
                                             eps=constants.eps, m=constants.m)
        sched = PolySchedule(eta=2.0 * trace.alpha, theta1=trace.theta,
                             xi=coef * trace.alpha ** 2, theta2=2.0 * trace.theta)
    Ts = np.arange(3, T + 1, dtype=np.float64)
    bounds = np.array([gap_bound_poly(trace.d_sq, sched, int(t)) for t in Ts])
    return Ts, bounds


def compare_bounds(trace: RunTrace, rule: str) -> dict:
    """Empirical gaps against a rule's bound curve.

    Returns Ts, gaps, bounds, ratios plus ``max_ratio`` and
    ``first_violation_T`` (None when the gap never exceeds the bound).
    """
    Ts, bounds = bound_curve(trace, rule)
    idx = Ts.astype(np.int64) - 1
    gaps = trace.f_gaps()[idx]
    ratios = gaps / bounds
    violations = np.nonzero(gaps > bounds)[0]
    return {
        "rule": rule,
        "Ts": Ts.astype(np.int64),
        "gaps": gaps,
        "bounds": bounds,
        "ratios": ratios,
        "max_ratio": float(np.max(ratios)),
        "first_violation_T": int(Ts[violations[0]]) if violations.size else None,
    }


def fit_slopes(trace: RunTrace, window="decade") -> dict:
    """Least-squares slope of log(gap) against log(t) over a trailing
    window, for the last-iterate gaps and for the running-best gaps.

    ``window`` is either ``"decade"`` (t >= T/10) or a trailing row count.
    Reports ``{"status": "converged"}`` when the window contains
    nonpositive gaps (the run is at the reference value within noise).
    """
    T = trace.T
    if T < 1000:
        raise ContractViolation("slope extraction needs T >= 1000")
    if window == "decade":
        t_start = max(1, T // 10)
    else:
        count = int(window)
        if count < 2:
            raise ContractViolation("window must cover at least 2 rows")
        t_start = max(1, T - count + 1)
    gaps = trace.f_gaps()
    best = np.minimum.accumulate(gaps)
    ts = np.arange(t_start, T + 1, dtype=np.float64)
    g_last = gaps[t_start - 1:]
    g_best = best[t_start - 1:]
    info = {"t_start": int(t_start), "t_end": int(T), "n": int(len(ts))}
    if np.any(g_last <= 0.0) or np.any(g_best <= 0.0):
        return {"status": "converged", **info}
    slope_last = float(np.polyfit(np.log(ts), np.log(g_last), 1)[0])
    slope_best = float(np.polyfit(np.log(ts), np.log(g_best), 1)[0])
    return {"status": "ok", "slope_last": slope_last, "slope_best": slope_best, **info}
