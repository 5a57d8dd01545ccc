"""Trace serialization.

A run is written as two files with a shared stem: a CSV with the fixed
per-iteration schema

    t,f_gap,alpha_t,eps_t,dist_sq_to_ref,max_subgrad_norm_so_far

and a JSON sidecar holding the run metadata plus everything the CSV does
not carry (stored iterates, recorded subgradient norms, shadow sequences).
Floats are written with 17 significant digits, which round-trips float64
exactly and is locale independent, so identical runs produce identical
bytes.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Optional

import numpy as np

from .algorithms import RunTrace
from .errors import ContractViolation

__all__ = ["CSV_HEADER", "fmt", "trace_csv_text", "write_trace", "read_trace",
           "sidecar_path", "write_json", "read_json"]

CSV_HEADER = "t,f_gap,alpha_t,eps_t,dist_sq_to_ref,max_subgrad_norm_so_far"


def fmt(v: float) -> str:
    """17-significant-digit decimal text for a float."""
    return format(float(v), ".17g")


def sidecar_path(csv_path) -> Path:
    return Path(csv_path).with_suffix(".json")


def trace_csv_text(trace: RunTrace) -> str:
    gaps = trace.f_gaps()
    lines = [CSV_HEADER]
    for i in range(trace.T):
        lines.append(",".join((
            str(i + 1),
            fmt(gaps[i]),
            fmt(trace.alpha_values[i]),
            fmt(trace.eps_values[i]),
            fmt(trace.dist_sq_to_ref[i]),
            fmt(trace.max_norm_so_far[i]),
        )))
    return "\n".join(lines) + "\n"


def _arr(a: Optional[np.ndarray]):
    return None if a is None else np.asarray(a).tolist()


def write_json(obj: dict, path) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n",
                          encoding="utf-8")


def read_json(path) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))


def write_trace(trace: RunTrace, csv_path) -> Path:
    """Write the CSV and its JSON sidecar; returns the sidecar path."""
    csv_path = Path(csv_path)
    csv_path.parent.mkdir(parents=True, exist_ok=True)
    csv_path.write_text(trace_csv_text(trace), encoding="utf-8")
    side = {
        "schema": "splitcert-trace-v1",
        "algo_id": trace.algo_id,
        "problem_id": trace.problem_id,
        "seed": trace.seed,
        "T": trace.T,
        "m": trace.m,
        "eps": trace.eps,
        "alpha": trace.alpha,
        "theta": trace.theta,
        "beta": trace.beta,
        "f_star": trace.f_star,
        "d_sq": trace.d_sq,
        "B_analytic": trace.B_analytic,
        "x_ref": _arr(trace.x_ref),
        "f_values": _arr(trace.f_values),
        "alpha_values": _arr(trace.alpha_values),
        "eps_values": _arr(trace.eps_values),
        "dist_sq_to_ref": _arr(trace.dist_sq_to_ref),
        "max_norm_so_far": _arr(trace.max_norm_so_far),
        "stored_indices": _arr(trace.stored_indices),
        "iterates": _arr(trace.iterates),
        "subgrad_norms_l": _arr(trace.subgrad_norms_l),
        "subgrad_norms_r": _arr(trace.subgrad_norms_r),
        "y_next": _arr(trace.y_next),
        "z_next": _arr(trace.z_next),
        "f_at_z": _arr(trace.f_at_z),
    }
    out = sidecar_path(csv_path)
    write_json(side, out)
    return out


def read_trace(csv_path) -> RunTrace:
    """Load a trace from its CSV path (the sidecar must sit next to it)."""
    csv_path = Path(csv_path)
    side_path = sidecar_path(csv_path)
    if not csv_path.exists():
        raise ContractViolation(f"trace file not found: {csv_path}")
    if not side_path.exists():
        raise ContractViolation(f"trace sidecar not found: {side_path}")
    header = csv_path.read_text(encoding="utf-8").splitlines()[0]
    if header != CSV_HEADER:
        raise ContractViolation(f"unexpected trace CSV header: {header!r}")
    d = read_json(side_path)
    if d.get("schema") != "splitcert-trace-v1":
        raise ContractViolation("unexpected trace sidecar schema")

    def arr(key, dtype=np.float64):
        v = d.get(key)
        return None if v is None else np.asarray(v, dtype=dtype)

    return RunTrace(
        algo_id=d["algo_id"],
        problem_id=d["problem_id"],
        seed=d["seed"],
        T=d["T"],
        m=d["m"],
        eps=d["eps"],
        alpha=d["alpha"],
        theta=d["theta"],
        beta=d["beta"],
        f_star=d["f_star"],
        d_sq=d["d_sq"],
        x_ref=arr("x_ref"),
        B_analytic=d["B_analytic"],
        f_values=arr("f_values"),
        alpha_values=arr("alpha_values"),
        eps_values=arr("eps_values"),
        dist_sq_to_ref=arr("dist_sq_to_ref"),
        max_norm_so_far=arr("max_norm_so_far"),
        stored_indices=arr("stored_indices", dtype=np.int64),
        iterates=arr("iterates"),
        subgrad_norms_l=arr("subgrad_norms_l"),
        subgrad_norms_r=arr("subgrad_norms_r"),
        y_next=arr("y_next"),
        z_next=arr("z_next"),
        f_at_z=arr("f_at_z"),
    )
