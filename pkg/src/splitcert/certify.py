"""Per-run certification of the step inequality

    ||x_{t+1} - x||^2 <= ||x_t - x||^2 - eta_t (f(x_t) - f(x)) + xi_t

at a finite set of test points.  Each solver ships the constants
``(eta_t, xi_t)`` its analysis guarantees; a certificate evaluates the
per-step slack of the inequality at every test point and passes when no
slack falls below ``-tol_rel * max(1, ||x_t - x||^2)``.

Setting x = x_t in the inequality gives the step-length consequence
``||x_{t+1} - x_t||^2 <= xi_t``, whose slacks are reported alongside.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Optional, Sequence

import numpy as np

from .errors import ContractViolation, DomainError
from .numerics import row_norm_sq

if TYPE_CHECKING:  # pragma: no cover
    from .algorithms import RunTrace

__all__ = [
    "PROVENANCES",
    "CertificateConstants",
    "TestPoint",
    "FejerCertificate",
    "certificate_error_coefficient",
    "constants_for_trace",
    "certify",
    "certify_run",
    "observed_B",
]

PROVENANCES = (
    "forward_backward",
    "projected_subgradient",
    "incremental",
    "douglas_rachford",
    "smooth",
    "custom",
)

_TEST_BLOCK = 1024  # iterate test points per vectorized block


@dataclass
class CertificateConstants:
    """Constants ``(eta_t, xi_t)`` for steps t = 1..T-1, with the recipe
    (`provenance`) and the parameters that produced them."""

    provenance: str
    eta: np.ndarray
    xi: np.ndarray
    B: Optional[float] = None
    eps: float = 0.0
    m: int = 1
    beta: Optional[float] = None
    conditional: bool = False

    def __post_init__(self):
        if self.provenance not in PROVENANCES:
            raise ContractViolation(f"unknown constants provenance {self.provenance!r}")
        self.eta = np.asarray(self.eta, dtype=np.float64)
        self.xi = np.asarray(self.xi, dtype=np.float64)
        if self.eta.shape != self.xi.shape:
            raise ContractViolation("eta and xi sequences must have equal length")
        if np.any(self.eta < 0) or np.any(self.xi < 0):
            raise ContractViolation("certificate constants must be nonnegative")


@dataclass(frozen=True)
class TestPoint:
    __test__ = False  # not a pytest class despite the name

    id: str
    x: np.ndarray
    f_value: float


@dataclass
class FejerCertificate:
    """Outcome of :func:`certify`.

    ``min_slack`` is the smallest slack over all (step, test point) pairs
    and ``argmin_t``/``argmin_test_point_id`` locate it.  ``min_rel_slack``
    is the smallest slack divided by its scale; when every slack is
    nonnegative it equals the scaled value at the argmin.  ``eq3_min_slack``
    is the smallest ``xi_t - ||x_{t+1} - x_t||^2``.
    """

    verdict: str
    min_slack: float
    argmin_t: int
    argmin_test_point_id: str
    min_rel_slack: float
    eq3_min_slack: float
    eq3_argmin_t: int
    constants_provenance: str
    tol_rel: float
    conditional: bool
    n_test_points: int
    n_pairs: int
    ref_slacks: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def to_json_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "min_slack": self.min_slack,
            "argmin": {"t": self.argmin_t, "test_point_id": self.argmin_test_point_id},
            "min_rel_slack": self.min_rel_slack,
            "eq3_min_slack": self.eq3_min_slack,
            "eq3_argmin_t": self.eq3_argmin_t,
            "constants_provenance": self.constants_provenance,
            "tol_rel": self.tol_rel,
            "conditional": self.conditional,
            "n_test_points": self.n_test_points,
            "n_pairs": self.n_pairs,
        }


def observed_B(trace: "RunTrace") -> float:
    """Largest subgradient norm recorded during the run, across the
    subgradient-side and prox-side oracles.  This is the tightest constant
    certifying the observed run when no analytic bound is declared."""
    norms = np.concatenate([trace.subgrad_norms_l, trace.subgrad_norms_r])
    if norms.size == 0:
        raise ContractViolation("trace recorded no subgradient norms")
    return float(np.max(norms))


def certificate_error_coefficient(provenance: str, B: float, eps: float = 0.0, m: int = 1) -> float:
    """Coefficient k such that the certified per-step error is
    ``xi_t = k * alpha_t**2`` for the diminishing-step methods."""
    if provenance in ("forward_backward", "projected_subgradient"):
        return 10.0 * B * B + 2.0 * eps
    if provenance == "incremental":
        return (4.0 * m + 5.0) * m * B * B
    if provenance == "douglas_rachford":
        return 16.0 * B * B
    raise ContractViolation(f"no quadratic error coefficient for {provenance!r}")


_ALGO_PROVENANCE = {
    "fb": "forward_backward",
    "psg": "projected_subgradient",
    "inc": "incremental",
    "dr": "douglas_rachford",
    "fb-smooth": "smooth",
}


def constants_for_trace(trace: "RunTrace", B: Optional[float] = None,
                        provenance: Optional[str] = None) -> CertificateConstants:
    """Build the certificate constants a run's own analysis guarantees.

    With no explicit ``B`` the declared analytic bound is used when the
    problem ships one, otherwise the largest observed subgradient norm.
    For projected-subgradient runs the declared bound covers only the
    subgradient side; if the recorded prox-side norms exceed it the
    constants are enlarged to cover them and flagged ``conditional``.
    An explicit ``provenance`` selects a different recipe than the trace's
    own algorithm implies.
    """
    if provenance is None:
        provenance = _ALGO_PROVENANCE.get(trace.algo_id)
    if provenance is None or provenance == "custom":
        raise ContractViolation(f"no certificate recipe for algorithm {trace.algo_id!r}")
    alphas = trace.alpha_values[: trace.T - 1]
    if provenance == "smooth":
        if trace.beta is None or trace.beta <= 0:
            raise ContractViolation("smooth constants need the gradient Lipschitz constant")
        eta = np.full(trace.T - 1, 2.0 / trace.beta)
        xi = np.zeros(trace.T - 1)
        return CertificateConstants(provenance, eta, xi, B=None, eps=0.0,
                                    m=trace.m, beta=trace.beta)
    conditional = False
    if B is None:
        if trace.B_analytic is not None:
            B = trace.B_analytic
            r_max = float(np.max(trace.subgrad_norms_r)) if trace.subgrad_norms_r.size else 0.0
            if r_max > B * (1.0 + 1e-12):
                conditional = True
                B = max(B, observed_B(trace))
        else:
            B = observed_B(trace)
    coef = certificate_error_coefficient(provenance, B, eps=trace.eps, m=trace.m)
    return CertificateConstants(provenance, 2.0 * alphas, coef * alphas ** 2,
                                B=B, eps=trace.eps, m=trace.m, conditional=conditional)


def _pair_steps(trace: "RunTrace") -> np.ndarray:
    """Stored-row indices i such that iterates t = stored[i], stored[i]+1
    are both available; the pair covers step t."""
    s = trace.stored_indices
    return np.nonzero(s[1:] == s[:-1] + 1)[0]


def certify(
    trace: "RunTrace",
    constants: CertificateConstants,
    test_points: Sequence[TestPoint],
    *,
    include_iterates: bool = True,
    tol_rel: float = 1e-9,
) -> FejerCertificate:
    """Evaluate the per-step slacks at the given test points (plus, by
    default, every stored iterate) and return the certificate.

    The slack of step t at test point x is

        ||x_t - x||^2 - ||x_{t+1} - x||^2 - eta_t (f(x_t) - f(x)) + xi_t

    and the verdict is ``pass`` exactly when every slack is at least
    ``-tol_rel * max(1, ||x_t - x||^2)``.  Distance differences for the
    iterate test points are evaluated through the factored identity
    ``<x_t - x_{t+1}, x_t + x_{t+1} - 2x>`` so the whole slack table costs
    two matrix products.

    For ``smooth`` constants the objective decrement is taken at the next
    iterate, ``eta_t (f(x_{t+1}) - f(x))``: that is the per-step guarantee
    the constant-step analysis provides (it holds for every test point,
    where the current-iterate form provably fails away from the start).
    """
    T = trace.T
    if T < 2:
        raise ContractViolation("certification needs at least two iterates")
    if len(constants.eta) != T - 1:
        raise ContractViolation(
            f"constants cover {len(constants.eta)} steps, trace has {T - 1}"
        )
    for tp in test_points:
        if not np.isfinite(tp.f_value):
            raise DomainError(f"test point {tp.id!r} has non-finite objective value")

    X = trace.iterates
    stored = trace.stored_indices
    pair_rows = _pair_steps(trace)          # rows i: pair (stored[i], stored[i]+1)
    pair_ts = stored[pair_rows]             # 1-based step numbers
    eta_p = constants.eta[pair_ts - 1]
    xi_p = constants.xi[pair_ts - 1]
    shifted = constants.provenance == "smooth"
    f_p = trace.f_values[pair_ts] if shifted else trace.f_values[pair_ts - 1]

    best = {"slack": np.inf, "t": 0, "id": "", "rel": np.inf}
    failed = False

    def _consider(slacks: np.ndarray, scales: np.ndarray, ts: np.ndarray, point_id: str):
        nonlocal failed
        rel = slacks / scales
        i = int(np.argmin(rel))
        if rel[i] < best["rel"]:
            best.update(slack=float(slacks[i]), t=int(ts[i]), id=point_id, rel=float(rel[i]))
        if rel[i] < -tol_rel:
            failed = True

    ref_slacks = None
    for tp in test_points:
        if trace.x_ref is not None and np.array_equal(tp.x, trace.x_ref):
            # Recorded distance channel covers every step even on thinned traces.
            d2 = trace.dist_sq_to_ref
            ts = np.arange(1, T)
            f_step = trace.f_values[1:] if shifted else trace.f_values[:-1]
            slacks = (d2[:-1] - d2[1:]) - constants.eta * (f_step - tp.f_value) + constants.xi
            scales = np.maximum(1.0, d2[:-1])
            if tp.id == "x_ref":
                ref_slacks = slacks
        else:
            diff = X - tp.x
            d2 = row_norm_sq(diff)
            slacks = (d2[pair_rows] - d2[pair_rows + 1]) - eta_p * (f_p - tp.f_value) + xi_p
            scales = np.maximum(1.0, d2[pair_rows])
            ts = pair_ts
        _consider(slacks, scales, ts, tp.id)

    n_points = len(test_points)
    if include_iterates and len(pair_rows) > 0:
        A = X[pair_rows]
        Bn = X[pair_rows + 1]
        U = A - Bn
        S = A + Bn
        w = np.add.reduce(U * S, axis=1)
        base = w - eta_p * f_p + xi_p                    # test-point independent part
        nA2 = row_norm_sq(A)
        n_points += X.shape[0]
        for j0 in range(0, X.shape[0], _TEST_BLOCK):
            Xb = X[j0: j0 + _TEST_BLOCK]
            fb = trace.f_values[stored[j0: j0 + _TEST_BLOCK] - 1]
            G = U @ Xb.T
            G *= -2.0
            G += base[:, None]
            G += eta_p[:, None] * fb[None, :]            # G now holds the slacks
            H = A @ Xb.T
            H *= -2.0
            H += nA2[:, None]
            H += row_norm_sq(Xb)[None, :]                # H now holds the distances
            np.maximum(H, 1.0, out=H)
            rel = np.divide(G, H, out=H)
            k = int(np.argmin(rel))
            r, c = divmod(k, rel.shape[1])
            if rel[r, c] < best["rel"]:
                best.update(
                    slack=float(G[r, c]),
                    t=int(pair_ts[r]),
                    id=f"iterate_{stored[j0 + c]}",
                    rel=float(rel[r, c]),
                )
            if rel[r, c] < -tol_rel:
                failed = True

    # Step-length consequence: xi_t - ||x_{t+1} - x_t||^2 on available pairs.
    step_sq = row_norm_sq(X[pair_rows + 1] - X[pair_rows])
    eq3 = xi_p - step_sq
    if eq3.size:
        j = int(np.argmin(eq3))
        eq3_min, eq3_t = float(eq3[j]), int(pair_ts[j])
    else:
        eq3_min, eq3_t = float("inf"), 0

    return FejerCertificate(
        verdict="fail" if failed else "pass",
        min_slack=best["slack"],
        argmin_t=best["t"],
        argmin_test_point_id=best["id"],
        min_rel_slack=best["rel"],
        eq3_min_slack=eq3_min,
        eq3_argmin_t=eq3_t,
        constants_provenance=constants.provenance,
        tol_rel=tol_rel,
        conditional=constants.conditional,
        n_test_points=n_points,
        n_pairs=int(len(pair_rows)),
        ref_slacks=ref_slacks,
    )


def certify_run(trace: "RunTrace", problem, *, tol_rel: float = 1e-9,
                B: Optional[float] = None,
                provenance: Optional[str] = None) -> FejerCertificate:
    """Certify a run with its own constants against the reference minimizer
    and the stored iterates."""
    constants = constants_for_trace(trace, B=B, provenance=provenance)
    ref = TestPoint("x_ref", problem.x_ref, problem.f_star)
    return certify(trace, constants, [ref], tol_rel=tol_rel)
