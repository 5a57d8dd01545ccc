"""Command-line harness.

Subcommands: ``run`` (execute a solver, write trace CSV + JSON sidecar),
``certify`` (evaluate the step-inequality certificate of a trace),
``bounds`` (compare empirical gaps against a closed-form bound rule),
``slope`` (trailing log-log slope extraction), ``sweep`` (execute a list
of run configs), ``catalog`` (problem descriptors), ``report`` (render
figures for a trace).

Exit codes: 0 success (for ``certify``: verdict pass), 1 certificate
failure, 2 configuration/parse/applicability error, 3 oracle or domain
error during execution.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import analysis, problems, report, traceio
from .certify import (
    PROVENANCES,
    CertificateConstants,
    TestPoint,
    certify as evaluate_certificate,
    certify_run,
)
from .algorithms import (
    PolyStepSchedule,
    run_douglas_rachford,
    run_forward_backward,
    run_incremental,
    run_projected_subgradient,
    run_smooth_fb,
)
from .errors import ConfigError, ContractViolation, DomainError

ALGOS = ("fb", "fb-smooth", "psg", "inc", "dr")

_RUN_DEFAULTS = {"alpha": 0.1, "theta": 0.5, "eps": 0.0, "T": 1000,
                 "seed": 0, "thinning": "auto"}


def _merge_config(args: argparse.Namespace) -> dict:
    """Effective run settings: flags override the config file, which
    overrides defaults."""
    cfg = dict(_RUN_DEFAULTS)
    if getattr(args, "config", None):
        path = Path(args.config)
        if not path.exists():
            raise ConfigError(f"config file not found: {path}")
        cfg.update(json.loads(path.read_text(encoding="utf-8")))
    for key in ("problem", "algo", "alpha", "theta", "eps", "T", "seed",
                "thinning", "out"):
        v = getattr(args, key, None)
        if v is not None:
            cfg[key] = v
    return cfg


def execute_run(cfg: dict):
    """Validate a run config against the problem's capabilities and
    execute it."""
    for key in ("problem", "algo", "out"):
        if key not in cfg or cfg[key] is None:
            raise ConfigError(f"missing required setting {key!r}")
    if cfg["algo"] not in ALGOS:
        raise ConfigError(f"unknown algorithm {cfg['algo']!r}")
    prob = problems.get_problem(cfg["problem"])
    if cfg["algo"] not in prob.algos():
        raise ConfigError(
            f"problem {prob.id!r} does not support algorithm {cfg['algo']!r} "
            f"(supported: {', '.join(prob.algos())})"
        )
    T = int(cfg["T"])
    if T < 1:
        raise ConfigError("T must be at least 1")
    seed = int(cfg["seed"])
    eps = float(cfg["eps"])
    thinning = cfg["thinning"]
    algo = cfg["algo"]
    if algo == "fb-smooth":
        if eps != 0.0:
            raise ConfigError("the constant-step method uses exact gradients (eps must be 0)")
        trace = run_smooth_fb(prob, T, seed=seed, thinning=thinning)
    else:
        schedule = PolyStepSchedule(float(cfg["alpha"]), float(cfg["theta"]))
        if algo == "fb":
            trace = run_forward_backward(prob, schedule, eps, T, seed=seed, thinning=thinning)
        elif algo == "psg":
            trace = run_projected_subgradient(prob, schedule, eps, T, seed=seed, thinning=thinning)
        elif algo == "inc":
            if eps != 0.0:
                raise ConfigError("the incremental method uses exact subgradients (eps must be 0)")
            trace = run_incremental(prob, schedule, T, seed=seed, thinning=thinning)
        else:
            if eps != 0.0:
                raise ConfigError("Douglas-Rachford uses proximity steps only (eps must be 0)")
            trace = run_douglas_rachford(prob, schedule, T, seed=seed, thinning=thinning)
    return trace, prob


def _cmd_run(args) -> int:
    cfg = _merge_config(args)
    trace, _ = execute_run(cfg)
    traceio.write_trace(trace, cfg["out"])
    print(cfg["out"])
    return 0


def _cmd_certify(args) -> int:
    trace = traceio.read_trace(args.trace)
    prob = problems.get_problem(trace.problem_id)
    src = args.constants
    if src == "auto":
        cert = certify_run(trace, prob, tol_rel=args.tol_rel)
    elif src in PROVENANCES:
        cert = certify_run(trace, prob, tol_rel=args.tol_rel, provenance=src)
    else:
        d = traceio.read_json(src)
        constants = CertificateConstants(
            provenance=d.get("provenance", "custom"),
            eta=np.asarray(d["eta"], dtype=np.float64),
            xi=np.asarray(d["xi"], dtype=np.float64),
        )
        ref = TestPoint("x_ref", prob.x_ref, prob.f_star)
        cert = evaluate_certificate(trace, constants, [ref], tol_rel=args.tol_rel)
    out = args.out or str(Path(args.trace).with_suffix("")) + "_certificate.json"
    traceio.write_json(cert.to_json_dict(), out)
    print(json.dumps(cert.to_json_dict(), sort_keys=True))
    return 0 if cert.passed else 1


def _cmd_bounds(args) -> int:
    trace = traceio.read_trace(args.trace)
    cmp = analysis.compare_bounds(trace, args.theorem)
    stem = args.out or str(Path(args.trace).with_suffix("")) + f"_{args.theorem}"
    csv_path = Path(stem + "_bounds.csv")
    lines = ["T,empirical_gap,bound,ratio"]
    for T, g, b, r in zip(cmp["Ts"], cmp["gaps"], cmp["bounds"], cmp["ratios"]):
        lines.append(f"{T},{traceio.fmt(g)},{traceio.fmt(b)},{traceio.fmt(r)}")
    csv_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    summary = {"rule": cmp["rule"], "max_ratio": cmp["max_ratio"],
               "first_violation_T": cmp["first_violation_T"]}
    traceio.write_json(summary, stem + "_summary.json")
    print(json.dumps(summary, sort_keys=True))
    return 0


def _cmd_slope(args) -> int:
    trace = traceio.read_trace(args.trace)
    window = args.window
    if window != "decade":
        window = int(window)
    res = analysis.fit_slopes(trace, window)
    if args.out:
        traceio.write_json(res, args.out)
    print(json.dumps(res, sort_keys=True))
    return 0


def _cmd_sweep(args) -> int:
    cfg = json.loads(Path(args.config).read_text(encoding="utf-8"))
    runs = cfg.get("runs")
    if not isinstance(runs, list) or not runs:
        raise ConfigError("sweep config needs a nonempty 'runs' list")
    out_dir = Path(cfg.get("out_dir", "."))
    out_dir.mkdir(parents=True, exist_ok=True)
    for i, run_cfg in enumerate(runs):
        merged = dict(_RUN_DEFAULTS)
        merged.update(cfg.get("base", {}))
        merged.update(run_cfg)
        name = merged.pop("name", f"run_{i:03d}")
        merged["out"] = str(out_dir / f"{name}.csv")
        trace, _ = execute_run(merged)
        traceio.write_trace(trace, merged["out"])
        print(merged["out"])
    return 0


def _cmd_catalog(args) -> int:
    desc = [p.describe() for p in problems.catalog()]
    text = json.dumps(desc, indent=2, sort_keys=True)
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
    print(text)
    return 0


def _cmd_report(args) -> int:
    trace = traceio.read_trace(args.trace)
    bounds = None
    if args.theorem:
        bounds = analysis.compare_bounds(trace, args.theorem)
    paths = report.render_report(trace, args.out_dir, bounds=bounds)
    for p in paths:
        print(p)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="splitcert", description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="execute a solver and write its trace")
    p.add_argument("--problem")
    p.add_argument("--algo", choices=ALGOS)
    p.add_argument("--alpha", type=float)
    p.add_argument("--theta", type=float)
    p.add_argument("--eps", type=float)
    p.add_argument("--T", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--thinning", choices=("auto", "full", "geometric"))
    p.add_argument("--out", help="trace CSV path (JSON sidecar written next to it)")
    p.add_argument("--config", help="JSON file with default settings")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("certify", help="evaluate the step-inequality certificate")
    p.add_argument("trace", help="trace CSV path")
    p.add_argument("--constants", default="auto",
                   help="'auto', a constants recipe name, or a JSON file with "
                        "explicit eta/xi sequences")
    p.add_argument("--tol-rel", type=float, default=1e-9)
    p.add_argument("--out", help="certificate JSON path")
    p.set_defaults(func=_cmd_certify)

    p = sub.add_parser("bounds", help="compare a trace against a bound rule")
    p.add_argument("trace")
    p.add_argument("--theorem", required=True, choices=analysis.BOUND_RULES)
    p.add_argument("--out", help="output stem for the comparison CSV and summary JSON")
    p.set_defaults(func=_cmd_bounds)

    p = sub.add_parser("slope", help="trailing log-log slope of the gap curve")
    p.add_argument("trace")
    p.add_argument("--window", default="decade",
                   help="'decade' or a trailing row count")
    p.add_argument("--out", help="JSON output path")
    p.set_defaults(func=_cmd_slope)

    p = sub.add_parser("sweep", help="execute a list of run configs")
    p.add_argument("--config", required=True, help="JSON sweep description")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("catalog", help="print problem descriptors")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_catalog)

    p = sub.add_parser("report", help="render figures for a trace")
    p.add_argument("trace")
    p.add_argument("--theorem", choices=analysis.BOUND_RULES,
                   help="overlay this bound rule on the gap figure")
    p.add_argument("--out-dir", default="figures")
    p.set_defaults(func=_cmd_report)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except ContractViolation as e:
        # Trace parse and validity problems for the analysis commands map
        # to the config exit code; runtime contract breaches to the
        # oracle/domain one.
        code = 2 if args.command in ("certify", "bounds", "slope", "report") else 3
        print(f"error: {e}", file=sys.stderr)
        return code
    except DomainError as e:
        print(f"error: {e}", file=sys.stderr)
        return 3
    except FileNotFoundError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except json.JSONDecodeError as e:
        print(f"error: invalid JSON input ({e})", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
