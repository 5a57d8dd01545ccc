"""Acceptance gate: one test per shipped criterion, each printing a
PASS/FAIL line (run with ``pytest tests/test_acceptance.py -v -s``).

Criteria with a stated runtime budget measure wall time for exactly the
work the criterion names.
"""

import time

import numpy as np
import pytest

from conftest import (
    ACCEPTANCE_RULES,
    ACCEPTANCE_RUNS,
    ACCEPTANCE_T,
    execute_named_run,
)

import splitcert as sc
from splitcert import analysis
from splitcert.oracles import (
    BallIndicator,
    BoxIndicator,
    Quadratic,
    ScaledL1,
    ScaledSqNorm,
    eps_subgradient_at_shifted_point,
)
from splitcert.rates import (
    envelope_constant,
    gap_bound_curve_from_sequences,
    gap_bound_poly,
    weighted_tail_sum,
    weighted_tail_sum_bound,
)
from splitcert.traceio import trace_csv_text


def _verdict(num: int, desc: str, ok: bool) -> None:
    print(f"\nACCEPTANCE {num:2d} {desc}: {'PASS' if ok else 'FAIL'}")
    assert ok, f"criterion {num} failed: {desc}"


@pytest.fixture(scope="module")
def certs(acceptance_traces):
    """Certificates for the rule-gated acceptance runs plus the wall time
    spent certifying."""
    out = {}
    total = 0.0
    for name in ACCEPTANCE_RULES:
        trace, _ = acceptance_traces[name]
        prob = sc.get_problem(trace.problem_id)
        t0 = time.perf_counter()
        out[name] = sc.certify_run(trace, prob)
        total += time.perf_counter() - t0
    return out, total


def test_criterion_01_tail_sum_dominance():
    qs = (0.0, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0)
    t0 = time.perf_counter()
    ok = True
    inv = 1.0 / np.arange(1, 2000, dtype=np.float64)
    Ts = np.arange(3, 2001)
    for q in qs:
        xs = np.arange(1, 2000, dtype=np.float64) ** (-q)
        sums = np.convolve(xs, inv)[1:1999]          # exact sums for T = 3..2000
        bounds = np.array([weighted_tail_sum_bound(q, int(T)) for T in Ts])
        ok = ok and bool(np.all(sums <= bounds))
    elapsed = time.perf_counter() - t0
    # tie the vectorized sums to the direct oracle
    for q, T in ((0.0, 3), (1.0, 777), (3.0, 2000)):
        xs = np.arange(1, 2000, dtype=np.float64) ** (-q)
        s = np.convolve(xs, inv)[T - 2]
        assert s == pytest.approx(weighted_tail_sum(q, T), rel=1e-12)
    ok = ok and elapsed < 1.0
    _verdict(1, f"weighted tail sums under their closed-form envelope "
                f"(8 exponents x T<=2000, {elapsed:.2f}s)", ok)


def test_criterion_02_envelope_constant_spot_values():
    ok = envelope_constant(1.0) == 9.0
    ok = ok and abs(envelope_constant(0.0) - (5.0 + 2.0 / (1.0 - 0.0))) <= 1e-15
    indep = (2.0 ** 2.0 + 3.0 * 2.0 - 1.0) / (2.0 - 1.0)
    ok = ok and abs(envelope_constant(2.0) - indep) <= 1e-15
    _verdict(2, "envelope constant spot values (9 exact at 1; 7 and 9 to 1e-15)", ok)


def test_criterion_03_poly_bound_dominates_exact_bound():
    rng = np.random.default_rng(2024)
    T_max = 10_000
    ts = np.arange(1, T_max + 1, dtype=np.float64)
    Ts = np.arange(3, T_max + 1, dtype=np.float64)
    t0 = time.perf_counter()
    ok = True
    for _ in range(50):
        eta = float(rng.uniform(0.05, 2.0))
        theta1 = float(rng.uniform(0.0, 0.9))
        xi = float(rng.uniform(0.0, 5.0))
        theta2 = float(rng.uniform(0.0, 3.0))
        d_sq = float(rng.uniform(0.0, 10.0))
        eta_seq = eta * ts ** (-theta1)
        xi_seq = xi * ts ** (-theta2)
        exact = gap_bound_curve_from_sequences(d_sq, eta_seq, xi_seq, T_max)[1:]
        c = envelope_constant(theta2)
        logf = np.log(Ts) if theta2 <= 1.0 else 1.0
        poly = (d_sq / eta) * Ts ** (theta1 - 1.0) + \
            (xi * c / eta) * logf * Ts ** (theta1 - min(theta2, 1.0))
        ok = ok and bool(np.all(poly >= exact))
        for T in rng.integers(3, T_max, size=2):
            assert poly[T - 3] == pytest.approx(
                gap_bound_poly(d_sq, sc.PolySchedule(eta, theta1, xi, theta2), int(T)),
                rel=1e-12)
    elapsed = time.perf_counter() - t0
    ok = ok and elapsed < 10.0
    _verdict(3, f"polynomial bound dominates the telescoped bound "
                f"(50 schedules x T<=1e4, {elapsed:.1f}s)", ok)


def test_criterion_04_certificates(certs):
    certificates, total = certs
    ok = True
    for name, cert in certificates.items():
        good = cert.passed and cert.min_rel_slack >= -1e-9
        print(f"    {name}: {cert.verdict}, min rel slack {cert.min_rel_slack:.3e}")
        ok = ok and good
    ok = ok and total < 60.0
    _verdict(4, f"step-inequality certificates at T={ACCEPTANCE_T} "
                f"(certification {total:.1f}s)", ok)


def test_criterion_05_rate_envelopes(acceptance_traces):
    ok = True
    for name, rule in ACCEPTANCE_RULES.items():
        trace, _ = acceptance_traces[name]
        cmp = analysis.compare_bounds(trace, rule)
        none_violated = cmp["first_violation_T"] is None
        covers = cmp["Ts"][0] <= 4 and cmp["Ts"][-1] == ACCEPTANCE_T
        print(f"    {name}/{rule}: max ratio {cmp['max_ratio']:.4f}, "
              f"first violation {cmp['first_violation_T']}")
        ok = ok and none_violated and covers
    _verdict(5, "empirical gaps under their closed-form envelopes for all T in [4, 1e4]", ok)


def test_criterion_06_smooth_one_over_T(acceptance_traces):
    trace, _ = acceptance_traces["smooth_lasso"]
    beta, d_sq = trace.beta, trace.d_sq
    gaps = trace.f_gaps()
    ok = gaps[999] <= beta * d_sq / (2.0 * 1000.0)
    Ts = np.arange(10, 1001)
    ok = ok and bool(np.all(Ts * gaps[9:1000] <= beta * d_sq / 2.0))
    _verdict(6, "constant-step method meets the beta d^2/(2T) envelope", ok)


def test_criterion_07_slope_window(acceptance_traces):
    trace, run_seconds = acceptance_traces["fb_box"]
    t0 = time.perf_counter()
    res = analysis.fit_slopes(trace, "decade")
    elapsed = run_seconds + (time.perf_counter() - t0)
    ok = res["status"] == "ok"
    if ok:
        print(f"    last-iterate slope {res['slope_last']:.3f}, "
              f"best-iterate slope {res['slope_best']:.3f}")
        ok = -0.75 <= res["slope_last"] <= -0.35
        ok = ok and abs(res["slope_last"] - res["slope_best"]) <= 0.1
    ok = ok and elapsed < 30.0
    _verdict(7, f"trailing-decade log-log slope in [-0.75, -0.35], last vs best "
                f"within 0.1 ({elapsed:.1f}s)", ok)


def test_criterion_08_reduction_equivalences():
    prob = sc.get_problem("od_quad_l1")
    sched = sc.PolyStepSchedule(0.4, 0.5)
    fb = sc.run_forward_backward(prob, sched, eps=0.0, T=2000, seed=1)
    inc = sc.run_incremental(prob, sched, T=2000, seed=1)
    ok = trace_csv_text(fb) == trace_csv_text(inc)
    ok = ok and np.array_equal(fb.iterates, inc.iterates)

    box = sc.get_problem("box_l1")
    sched = sc.PolyStepSchedule(0.25, 0.5)
    fb2 = sc.run_forward_backward(box, sched, eps=1.0, T=2000, seed=1)
    psg = sc.run_projected_subgradient(box, sched, eps=1.0, T=2000, seed=1)
    ok = ok and trace_csv_text(fb2) == trace_csv_text(psg)
    ok = ok and np.array_equal(fb2.iterates, psg.iterates)
    _verdict(8, "incremental(m=1) == forward-backward and "
                "forward-backward(indicator) == projected subgradient, bit-exact", ok)


def _batch_value(oracle, Y):
    if isinstance(oracle, ScaledL1):
        Z = Y if oracle.center is None else Y - oracle.center
        return oracle.weight * np.add.reduce(np.abs(Z), axis=1)
    if isinstance(oracle, Quadratic):
        R = Y @ oracle.A.T - oracle.b
        return 0.5 * np.add.reduce(R * R, axis=1)
    raise TypeError(type(oracle))


def test_criterion_09_oracle_properties():
    rng = np.random.default_rng(909)
    n = 4
    t0 = time.perf_counter()
    A = rng.standard_normal((n + 2, n))
    quad = Quadratic(A, rng.standard_normal(n + 2))
    l1 = ScaledL1(0.8, dim=n)
    sq = ScaledSqNorm(1.3)
    box = BoxIndicator(-np.ones(n), np.ones(n))
    ball = BallIndicator(1.5, rng.standard_normal(n))
    proxable = (quad, l1, sq, box, ball)

    ok = True
    # prox optimality: 1000 cases, 100 probes each
    for i in range(1000):
        f = proxable[i % len(proxable)]
        lam = float(rng.uniform(0.05, 3.0))
        x = 2.0 * rng.standard_normal(n)
        p = f.prox(lam, x)
        fp = f.value(p) + sc.norm_sq(p - x) / (2.0 * lam)
        probes = p + rng.standard_normal((100, n)) * rng.uniform(0.01, 2.0, (100, 1))
        vals = np.array([f.value(y) for y in probes])
        vals = vals + np.add.reduce((probes - x) ** 2, axis=1) / (2.0 * lam)
        ok = ok and bool(np.all(vals - fp >= -1e-9))

    # nonexpansiveness: 1000 random pairs
    for i in range(1000):
        f = proxable[i % len(proxable)]
        lam = float(rng.uniform(0.05, 3.0))
        x, y = rng.standard_normal(n), rng.standard_normal(n)
        ok = ok and sc.norm(f.prox(lam, x) - f.prox(lam, y)) <= sc.norm(x - y) + 1e-9

    # projection idempotence: 1000 cases
    for i in range(1000):
        P = (box, ball)[i % 2]
        x = 3.0 * rng.standard_normal(n)
        p = P.prox(1.0, x)
        ok = ok and sc.norm(P.prox(1.0, p) - p) <= 1e-12

    # certified approximate subgradients: 1000 constructions x 1000 probes
    for i in range(1000):
        f = (l1, quad)[i % 2]
        x = 2.0 * rng.standard_normal(n)
        y = x + rng.standard_normal(n) * rng.uniform(0.0, 1.5)
        es = eps_subgradient_at_shifted_point(f, x, y)
        probes = rng.standard_normal((1000, n)) * 3.0
        lhs = f.value(x) + (probes - x) @ es.g - es.eps
        ok = ok and bool(np.all(lhs <= _batch_value(f, probes) + 1e-9))

    elapsed = time.perf_counter() - t0
    ok = ok and elapsed < 10.0
    _verdict(9, f"prox optimality, nonexpansiveness, idempotence, and "
                f"approximate-subgradient certificates ({elapsed:.1f}s)", ok)


def test_criterion_10_determinism(acceptance_traces):
    ok = True
    for name in ACCEPTANCE_RUNS:
        first, _ = acceptance_traces[name]
        second = execute_named_run(name)
        same = trace_csv_text(first).encode() == trace_csv_text(second).encode()
        ok = ok and same
        if not same:
            print(f"    {name}: rerun differs")
    _verdict(10, "acceptance reruns produce byte-identical trace CSVs", ok)
