"""The four first-order solvers, each emitting a :class:`RunTrace`.

* forward-backward: approximate-subgradient step on the first summand,
  proximity step on the second, with diminishing steps ``alpha * t**-theta``.
* constant-step forward-backward for a differentiable first summand with
  Lipschitz gradient (step ``1/beta``).
* projected approximate subgradient: forward-backward specialized to an
  indicator second summand, with a hard feasibility assertion per iterate.
* Douglas-Rachford: two proximity steps driven by a reflected governing
  sequence.

Every run records, besides iterates and objective values, the norm of each
subgradient the analysis of the method relies on, split into the
subgradient-side and prox-side channels.  Runs are deterministic given
(problem, schedule, seed, T).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ConfigError, ContractViolation
from .numerics import norm, norm_sq
from .oracles import FunctionOracle, eps_subgradient_at_shifted_point

__all__ = [
    "PolyStepSchedule",
    "ConstantStepSchedule",
    "ObjectiveSpec",
    "RunTrace",
    "forward_backward_step",
    "run_forward_backward",
    "run_smooth_fb",
    "run_projected_subgradient",
    "run_incremental",
    "douglas_rachford_step",
    "run_douglas_rachford",
    "incremental_cycle",
    "best_iterate",
]

# Iterates are stored in full up to this horizon; beyond it they are
# subsampled geometrically (powers of two plus each successor, so that
# consecutive pairs remain certifiable), while objective values, step
# sizes, and distances to the reference stay per-iteration.
FULL_STORE_MAX_T = 10_000

_EPS_MAX_HALVINGS = 60
_EPS_INITIAL_RADIUS = 1.0


@dataclass(frozen=True)
class PolyStepSchedule:
    """Diminishing steps ``alpha_t = alpha * t**(-theta)``, theta in (0,1)."""

    alpha: float
    theta: float

    def __post_init__(self):
        if self.alpha <= 0:
            raise ContractViolation("alpha must be positive")
        if not (0.0 < self.theta < 1.0):
            raise ContractViolation("theta must lie in (0, 1)")

    def alpha_at(self, t: int) -> float:
        return self.alpha * float(t) ** (-self.theta)


@dataclass(frozen=True)
class ConstantStepSchedule:
    value: float

    def __post_init__(self):
        if self.value <= 0:
            raise ContractViolation("step must be positive")

    def alpha_at(self, t: int) -> float:
        return self.value


@dataclass
class ObjectiveSpec:
    """Composite objective ``sum_i (l_i + r_i)`` with subgradient oracles
    for the ``l_i`` and (where available) proximity oracles for the
    ``r_i``."""

    smooth_parts: list
    prox_parts: list

    def __post_init__(self):
        if len(self.smooth_parts) != len(self.prox_parts) or not self.smooth_parts:
            raise ContractViolation("need equally many l_i and r_i parts, at least one")

    @property
    def m(self) -> int:
        return len(self.smooth_parts)

    def value(self, x) -> float:
        total = 0.0
        for p in self.smooth_parts:
            total += p.value(x)
        for p in self.prox_parts:
            total += p.value(x)
        return float(total)


@dataclass
class RunTrace:
    """Per-iteration record of a run.

    Arrays are aligned so that python index ``i`` holds iterate ``t = i+1``.
    ``eps_values[i]`` is the certified subgradient error of the step taken
    from iterate i+1 (zero on the last row, where no step is taken), and
    ``max_norm_so_far[i]`` is the running maximum of all recorded
    subgradient norms through that step.  ``iterates`` holds the rows
    listed in ``stored_indices`` (1-based); objective values are never
    thinned.
    """

    algo_id: str
    problem_id: str
    seed: int
    T: int
    m: int
    eps: float
    alpha: Optional[float]
    theta: Optional[float]
    beta: Optional[float]
    f_star: float
    d_sq: float
    x_ref: Optional[np.ndarray]
    B_analytic: Optional[float]
    f_values: np.ndarray
    alpha_values: np.ndarray
    eps_values: np.ndarray
    dist_sq_to_ref: np.ndarray
    max_norm_so_far: np.ndarray
    stored_indices: np.ndarray
    iterates: np.ndarray
    subgrad_norms_l: np.ndarray
    subgrad_norms_r: np.ndarray
    y_next: Optional[np.ndarray] = None
    z_next: Optional[np.ndarray] = None
    f_at_z: Optional[np.ndarray] = None

    @property
    def dim(self) -> int:
        return self.iterates.shape[1]

    @property
    def is_full(self) -> bool:
        return len(self.stored_indices) == self.T

    def f_gaps(self) -> np.ndarray:
        return self.f_values - self.f_star


def best_iterate(trace: RunTrace) -> tuple[int, float]:
    """Smallest 1-based index attaining the minimum objective value."""
    if trace.T < 1:
        raise ContractViolation("empty trace")
    i = int(np.argmin(trace.f_values))
    return i + 1, float(trace.f_values[i])


def _stored_indices(T: int, thinning: str) -> np.ndarray:
    if thinning not in ("auto", "full", "geometric"):
        raise ConfigError(f"unknown thinning policy {thinning!r}")
    if thinning == "full" or (thinning == "auto" and T <= FULL_STORE_MAX_T):
        return np.arange(1, T + 1)
    keep = {1, T}
    p = 1
    while p <= T:
        keep.add(p)
        if p + 1 <= T:
            keep.add(p + 1)  # successor, so the pair stays certifiable
        p *= 2
    return np.array(sorted(keep), dtype=np.int64)


class _Recorder:
    """Accumulates the norm of every subgradient a run's analysis relies
    on, split by oracle side, plus the per-row running maximum."""

    def __init__(self):
        self.l: list[float] = []
        self.r: list[float] = []
        self._max = 0.0

    def add_l(self, g) -> None:
        v = norm(g)
        self.l.append(v)
        self._max = max(self._max, v)

    def add_r(self, g) -> None:
        v = norm(g)
        self.r.append(v)
        self._max = max(self._max, v)

    @property
    def running_max(self) -> float:
        return self._max


def _eps_step_subgradient(l: FunctionOracle, x, budget: float, rng, radius: float):
    """Approximate subgradient of ``l`` at x with certified error at most
    ``budget``: evaluate the exact subgradient at a shifted point and halve
    the shift until the certified error fits, falling back to the exact
    subgradient after _EPS_MAX_HALVINGS halvings.  Returns
    (g, achieved_eps, accepted_radius)."""
    if budget <= 0.0:
        return l.subgradient(x), 0.0, radius
    u = rng.standard_normal(x.shape[0])
    u /= norm(u)
    r = radius
    for _ in range(_EPS_MAX_HALVINGS + 1):
        cand = eps_subgradient_at_shifted_point(l, x, x + r * u)
        if cand.eps <= budget:
            return cand.g, cand.eps, r
        r *= 0.5
    return l.subgradient(x), 0.0, radius


def forward_backward_step(x, alpha_t: float, l: FunctionOracle, r: FunctionOracle,
                          eps_budget: float, rng=None, radius: float = _EPS_INITIAL_RADIUS):
    """One forward-backward step ``prox_{alpha r}(x - alpha g)`` with
    ``g`` an approximate subgradient of ``l`` at x whose certified error is
    at most ``eps_budget`` (exact subgradient when the budget is zero).

    Returns ``(x_next, achieved_eps)``.
    """
    if eps_budget < 0:
        raise ContractViolation("eps budget must be nonnegative")
    if not r.has_prox:
        raise ConfigError("second summand has no proximity operator")
    x = np.asarray(x, dtype=np.float64)
    if eps_budget > 0 and rng is None:
        rng = np.random.default_rng(0)
    g, achieved, _ = _eps_step_subgradient(l, x, eps_budget, rng, radius)
    return r.prox(alpha_t, x - alpha_t * g), achieved


def _run_splitting(problem, schedule, eps, T, seed, *, algo_id, thinning="auto",
                   feasibility: Optional[FunctionOracle] = None):
    """Shared driver for the diminishing-step and constant-step
    forward-backward family (one l part, one prox-capable r part)."""
    spec = problem.spec
    if spec.m != 1:
        raise ConfigError(f"{algo_id} needs a single (l, r) pair, problem has m={spec.m}")
    l, r = spec.smooth_parts[0], spec.prox_parts[0]
    if not r.has_prox:
        raise ConfigError("second summand has no proximity operator")
    if T < 1:
        raise ContractViolation("T must be at least 1")
    if eps < 0:
        raise ContractViolation("eps must be nonnegative")

    rng = np.random.default_rng(seed)
    rec = _Recorder()
    x = np.asarray(problem.x1, dtype=np.float64).copy()
    if feasibility is not None and not feasibility.contains(x):
        raise ConfigError("start point is infeasible")

    stored = _stored_indices(T, thinning)
    keep = set(int(s) for s in stored)
    rows = []
    f_values = np.empty(T)
    eps_values = np.zeros(T)
    max_so_far = np.zeros(T)
    dist_sq = np.empty(T)

    f_values[0] = spec.value(x)
    dist_sq[0] = norm_sq(x - problem.x_ref)
    if 1 in keep:
        rows.append(x.copy())
    radius = _EPS_INITIAL_RADIUS
    for t in range(1, T):
        a_t = schedule.alpha_at(t)
        budget = eps * a_t
        g, achieved, radius = _eps_step_subgradient(l, x, budget, rng, min(2.0 * radius, _EPS_INITIAL_RADIUS))
        rec.add_l(g)
        rec.add_r(r.subgradient(x))       # prox-side slope at the current point
        forward = x - a_t * g
        x_next = r.prox(a_t, forward)
        rec.add_r((forward - x_next) / a_t)  # prox residual, a slope at the new point
        if feasibility is not None and not feasibility.contains(x_next):
            raise ContractViolation(f"iterate {t + 1} left the feasible set")
        x = x_next
        f_values[t] = spec.value(x)
        dist_sq[t] = norm_sq(x - problem.x_ref)
        eps_values[t - 1] = achieved
        max_so_far[t - 1] = rec.running_max
        if t + 1 in keep:
            rows.append(x.copy())
    max_so_far[T - 1] = rec.running_max

    alphas = np.array([schedule.alpha_at(t) for t in range(1, T + 1)])
    return RunTrace(
        algo_id=algo_id,
        problem_id=problem.id,
        seed=seed,
        T=T,
        m=1,
        eps=eps,
        alpha=getattr(schedule, "alpha", None),
        theta=getattr(schedule, "theta", None),
        beta=None,
        f_star=problem.f_star,
        d_sq=float(dist_sq[0]),
        x_ref=problem.x_ref,
        B_analytic=problem.B_analytic,
        f_values=f_values,
        alpha_values=alphas,
        eps_values=eps_values,
        dist_sq_to_ref=dist_sq,
        max_norm_so_far=max_so_far,
        stored_indices=stored,
        iterates=np.array(rows),
        subgrad_norms_l=np.array(rec.l),
        subgrad_norms_r=np.array(rec.r),
    )


def run_forward_backward(problem, schedule: PolyStepSchedule, eps: float, T: int,
                         seed: int = 0, thinning: str = "auto") -> RunTrace:
    """Forward-backward run with approximate subgradients.

    The certified per-step subgradient error is kept within
    ``eps * alpha_t``; the achieved errors are recorded per step.
    """
    return _run_splitting(problem, schedule, eps, T, seed,
                          algo_id="fb", thinning=thinning)


def run_smooth_fb(problem, T: int, seed: int = 0, thinning: str = "auto") -> RunTrace:
    """Constant-step forward-backward for a differentiable first summand.

    The step is the reciprocal of the declared gradient Lipschitz constant
    and subgradient queries are exact.
    """
    spec = problem.spec
    if spec.m != 1:
        raise ConfigError("the constant-step method needs a single (l, r) pair")
    beta = spec.smooth_parts[0].smoothness_bound
    if beta is None or beta <= 0:
        raise ConfigError("first summand declares no gradient Lipschitz constant")
    schedule = ConstantStepSchedule(1.0 / beta)
    trace = _run_splitting(problem, schedule, 0.0, T, seed,
                           algo_id="fb-smooth", thinning=thinning)
    trace.beta = beta
    trace.alpha = None
    trace.theta = None
    return trace


def run_projected_subgradient(problem, schedule: PolyStepSchedule, eps: float, T: int,
                              seed: int = 0, thinning: str = "auto") -> RunTrace:
    """Projected approximate subgradient method: forward-backward with an
    indicator second summand, all iterates hard-asserted feasible."""
    r = problem.spec.prox_parts[0] if problem.spec.m == 1 else None
    if r is None or not hasattr(r, "contains") or not r.has_prox:
        raise ConfigError("projected subgradient needs a projectable constraint part")
    return _run_splitting(problem, schedule, eps, T, seed,
                          algo_id="psg", thinning=thinning, feasibility=r)


def incremental_cycle(x, alpha_t: float, spec: ObjectiveSpec, _rec: Optional[_Recorder] = None):
    """One cycle of the incremental method: for i = 1..m in fixed order,

        psi_i = prox_{alpha r_i}(psi_{i-1} - alpha g_i),  g_i in dl_i(psi_{i-1})

    starting from psi_0 = x; returns psi_m.  Inner subgradients are exact.
    """
    psi = np.asarray(x, dtype=np.float64)
    for l_i, r_i in zip(spec.smooth_parts, spec.prox_parts):
        if not r_i.has_prox:
            raise ConfigError("every r_i needs a proximity operator")
        g = l_i.subgradient(psi)
        if _rec is not None:
            _rec.add_l(g)
        forward = psi - alpha_t * g
        psi_next = r_i.prox(alpha_t, forward)
        if _rec is not None:
            _rec.add_r((forward - psi_next) / alpha_t)
        psi = psi_next
    return psi


def run_incremental(problem, schedule: PolyStepSchedule, T: int,
                    seed: int = 0, thinning: str = "auto") -> RunTrace:
    """Incremental subgradient-proximal run over the m components in fixed
    cyclic order.  Besides the inner-step slopes, the slopes of every
    component at each outer iterate are recorded, matching the bound the
    certificate constants assume."""
    spec = problem.spec
    if T < 1:
        raise ContractViolation("T must be at least 1")
    for r_i in spec.prox_parts:
        if not r_i.has_prox:
            raise ConfigError("every r_i needs a proximity operator")

    rec = _Recorder()
    x = np.asarray(problem.x1, dtype=np.float64).copy()
    stored = _stored_indices(T, thinning)
    keep = set(int(s) for s in stored)
    rows = []
    f_values = np.empty(T)
    eps_values = np.zeros(T)
    max_so_far = np.zeros(T)
    dist_sq = np.empty(T)

    f_values[0] = spec.value(x)
    dist_sq[0] = norm_sq(x - problem.x_ref)
    if 1 in keep:
        rows.append(x.copy())
    for t in range(1, T):
        a_t = schedule.alpha_at(t)
        for l_i, r_i in zip(spec.smooth_parts, spec.prox_parts):
            rec.add_l(l_i.subgradient(x))
            rec.add_r(r_i.subgradient(x))
        x = incremental_cycle(x, a_t, spec, _rec=rec)
        f_values[t] = spec.value(x)
        dist_sq[t] = norm_sq(x - problem.x_ref)
        max_so_far[t - 1] = rec.running_max
        if t + 1 in keep:
            rows.append(x.copy())
    max_so_far[T - 1] = rec.running_max

    alphas = np.array([schedule.alpha_at(t) for t in range(1, T + 1)])
    return RunTrace(
        algo_id="inc",
        problem_id=problem.id,
        seed=seed,
        T=T,
        m=spec.m,
        eps=0.0,
        alpha=schedule.alpha,
        theta=schedule.theta,
        beta=None,
        f_star=problem.f_star,
        d_sq=float(dist_sq[0]),
        x_ref=problem.x_ref,
        B_analytic=problem.B_analytic,
        f_values=f_values,
        alpha_values=alphas,
        eps_values=eps_values,
        dist_sq_to_ref=dist_sq,
        max_norm_so_far=max_so_far,
        stored_indices=stored,
        iterates=np.array(rows),
        subgrad_norms_l=np.array(rec.l),
        subgrad_norms_r=np.array(rec.r),
    )


def douglas_rachford_step(x, alpha_t: float, l: FunctionOracle, r: FunctionOracle):
    """One Douglas-Rachford update:

        y = prox_{alpha l}(x);  z = prox_{alpha r}(2y - x);  x_next = x + z - y

    Returns ``(x_next, y, z)``.  Both summands need proximity operators.
    """
    if not (l.has_prox and r.has_prox):
        raise ConfigError("both summands need proximity operators")
    x = np.asarray(x, dtype=np.float64)
    y = l.prox(alpha_t, x)
    z = r.prox(alpha_t, 2.0 * y - x)
    return x + z - y, y, z


def run_douglas_rachford(problem, schedule: PolyStepSchedule, T: int,
                         seed: int = 0, thinning: str = "auto") -> RunTrace:
    """Douglas-Rachford run.  The governing sequence x_t is traced and
    certified; the shadow points y, z are stored alongside and the
    objective at z is logged for comparison.  Recorded slopes: the two
    prox residuals (slopes at y and z) and both summands' slopes at x_t."""
    spec = problem.spec
    if spec.m != 1:
        raise ConfigError("Douglas-Rachford needs a single (l, r) pair")
    l, r = spec.smooth_parts[0], spec.prox_parts[0]
    if not (l.has_prox and r.has_prox):
        raise ConfigError("both summands need proximity operators")
    if not (l.finite_everywhere and r.finite_everywhere):
        raise ConfigError("Douglas-Rachford needs real-valued summands")
    if T < 1:
        raise ContractViolation("T must be at least 1")

    rec = _Recorder()
    x = np.asarray(problem.x1, dtype=np.float64).copy()
    stored = _stored_indices(T, thinning)
    keep = set(int(s) for s in stored)
    rows = []
    f_values = np.empty(T)
    eps_values = np.zeros(T)
    max_so_far = np.zeros(T)
    dist_sq = np.empty(T)
    y_next = np.empty((T - 1, x.shape[0])) if T > 1 else np.empty((0, x.shape[0]))
    z_next = np.empty_like(y_next)
    f_at_z = np.empty(T - 1) if T > 1 else np.empty(0)

    f_values[0] = spec.value(x)
    dist_sq[0] = norm_sq(x - problem.x_ref)
    if 1 in keep:
        rows.append(x.copy())
    for t in range(1, T):
        a_t = schedule.alpha_at(t)
        y = l.prox(a_t, x)
        rec.add_l((x - y) / a_t)                 # slope of l at y
        ref = 2.0 * y - x
        z = r.prox(a_t, ref)
        rec.add_r((ref - z) / a_t)               # slope of r at z
        rec.add_l(l.subgradient(x))
        rec.add_r(r.subgradient(x))
        x = x + z - y
        y_next[t - 1] = y
        z_next[t - 1] = z
        f_at_z[t - 1] = spec.value(z)
        f_values[t] = spec.value(x)
        dist_sq[t] = norm_sq(x - problem.x_ref)
        max_so_far[t - 1] = rec.running_max
        if t + 1 in keep:
            rows.append(x.copy())
    max_so_far[T - 1] = rec.running_max

    alphas = np.array([schedule.alpha_at(t) for t in range(1, T + 1)])
    return RunTrace(
        algo_id="dr",
        problem_id=problem.id,
        seed=seed,
        T=T,
        m=1,
        eps=0.0,
        alpha=schedule.alpha,
        theta=schedule.theta,
        beta=None,
        f_star=problem.f_star,
        d_sq=float(dist_sq[0]),
        x_ref=problem.x_ref,
        B_analytic=problem.B_analytic,
        f_values=f_values,
        alpha_values=alphas,
        eps_values=eps_values,
        dist_sq_to_ref=dist_sq,
        max_norm_so_far=max_so_far,
        stored_indices=stored,
        iterates=np.array(rows),
        subgrad_norms_l=np.array(rec.l),
        subgrad_norms_r=np.array(rec.r),
        y_next=y_next,
        z_next=z_next,
        f_at_z=f_at_z,
    )
