import json

import numpy as np

from conftest import make_hand_trace

from splitcert.cli import main
from splitcert.traceio import CSV_HEADER, read_trace, write_trace


def run_cli(*argv):
    return main([str(a) for a in argv])


def test_run_row_count_and_header(tmp_path):
    out = tmp_path / "fb.csv"
    code = run_cli("run", "--problem", "od_quad_l1", "--algo", "fb",
                   "--alpha", 0.5, "--theta", 0.5, "--T", 123, "--seed", 1,
                   "--out", out)
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == CSV_HEADER
    assert len(lines) == 124


def test_run_capability_validation(tmp_path):
    code = run_cli("run", "--problem", "box_l1", "--algo", "dr",
                   "--out", tmp_path / "x.csv")
    assert code == 2
    code = run_cli("run", "--problem", "no_such", "--algo", "fb",
                   "--out", tmp_path / "x.csv")
    assert code == 2
    code = run_cli("run", "--problem", "od_quad_l1", "--algo", "fb",
                   "--T", 0, "--out", tmp_path / "x.csv")
    assert code == 2


def test_rerun_is_byte_identical(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ("run", "--problem", "box_l1", "--algo", "psg", "--alpha", 0.25,
            "--theta", 0.5, "--eps", 1.0, "--T", 400, "--seed", 11)
    assert run_cli(*args, "--out", a) == 0
    assert run_cli(*args, "--out", b) == 0
    assert a.read_bytes() == b.read_bytes()


def test_certify_pass_and_fail(tmp_path):
    out = tmp_path / "fb.csv"
    assert run_cli("run", "--problem", "od_quad_l1", "--algo", "fb",
                   "--alpha", 0.5, "--theta", 0.5, "--T", 200, "--seed", 2,
                   "--out", out) == 0
    cert_path = tmp_path / "cert.json"
    assert run_cli("certify", out, "--out", cert_path) == 0
    cert = json.loads(cert_path.read_text())
    assert cert["verdict"] == "pass"
    assert cert["constants_provenance"] == "forward_backward"

    # hand-crafted violating trace
    X = np.array([[0.0], [10.0]])
    tr = make_hand_trace(X, np.array([0.0, 50.0]), x_ref=np.array([0.0]),
                         f_star=0.0, problem_id="od_quad_l1", algo_id="fb")
    tr.alpha, tr.theta = 1.0, 0.5
    tr.subgrad_norms_l = np.array([0.1])
    tr.subgrad_norms_r = np.array([0.1])
    bad = tmp_path / "bad.csv"
    write_trace(tr, bad)
    code = run_cli("certify", bad, "--out", tmp_path / "bad_cert.json")
    assert code == 1
    cert = json.loads((tmp_path / "bad_cert.json").read_text())
    assert cert["verdict"] == "fail"
    assert cert["argmin"]["t"] == 1


def test_certify_missing_file(tmp_path):
    assert run_cli("certify", tmp_path / "nope.csv") == 2


def test_certify_custom_constants(tmp_path):
    out = tmp_path / "fb.csv"
    run_cli("run", "--problem", "od_quad_l1", "--algo", "fb", "--alpha", 0.5,
            "--theta", 0.5, "--T", 50, "--seed", 2, "--out", out)
    custom = tmp_path / "constants.json"
    custom.write_text(json.dumps({"eta": [1.0] * 49, "xi": [100.0] * 49}))
    assert run_cli("certify", out, "--constants", custom) == 0


def test_bounds_outputs_and_gate(tmp_path):
    out = tmp_path / "fb.csv"
    run_cli("run", "--problem", "od_quad_l1", "--algo", "fb", "--alpha", 0.5,
            "--theta", 0.5, "--T", 300, "--seed", 2, "--out", out)
    assert run_cli("bounds", out, "--theorem", "thm32", "--out", tmp_path / "fb32") == 0
    rows = (tmp_path / "fb32_bounds.csv").read_text().splitlines()
    assert rows[0] == "T,empirical_gap,bound,ratio"
    assert rows[1].split(",")[0] == "4"
    summary = json.loads((tmp_path / "fb32_summary.json").read_text())
    assert summary["first_violation_T"] is None
    # applicability gate: zero-error rule on a nonzero-error trace
    assert run_cli("bounds", out, "--theorem", "cor23") == 2


def test_bounds_smooth_ratio_below_one(tmp_path):
    out = tmp_path / "sm.csv"
    run_cli("run", "--problem", "lasso_small", "--algo", "fb-smooth",
            "--T", 300, "--out", out)
    assert run_cli("bounds", out, "--theorem", "prop33", "--out", tmp_path / "sm33") == 0
    summary = json.loads((tmp_path / "sm33_summary.json").read_text())
    assert summary["max_ratio"] <= 1.0
    assert summary["first_violation_T"] is None


def test_slope_command(tmp_path):
    out = tmp_path / "fb.csv"
    run_cli("run", "--problem", "box_l1", "--algo", "fb", "--alpha", 0.25,
            "--theta", 0.5, "--eps", 1.0, "--T", 2000, "--seed", 1, "--out", out)
    res_path = tmp_path / "slope.json"
    assert run_cli("slope", out, "--out", res_path) == 0
    res = json.loads(res_path.read_text())
    assert res["status"] in ("ok", "converged")
    if res["status"] == "ok":
        assert "slope_last" in res and "slope_best" in res


def test_sweep(tmp_path):
    cfg = {
        "out_dir": str(tmp_path / "sweep"),
        "base": {"problem": "od_quad_l1", "algo": "fb", "theta": 0.5, "T": 50},
        "runs": [
            {"name": "a", "alpha": 0.5},
            {"name": "b", "alpha": 0.25},
        ],
    }
    cfg_path = tmp_path / "sweep.json"
    cfg_path.write_text(json.dumps(cfg))
    assert run_cli("sweep", "--config", cfg_path) == 0
    assert (tmp_path / "sweep" / "a.csv").exists()
    assert (tmp_path / "sweep" / "b.json").exists()


def test_catalog_command(tmp_path, capsys):
    assert run_cli("catalog") == 0
    desc = json.loads(capsys.readouterr().out)
    assert {d["id"] for d in desc} >= {"lasso_small", "box_l1"}


def test_report_renders_figures(tmp_path):
    out = tmp_path / "fb.csv"
    run_cli("run", "--problem", "od_quad_l1", "--algo", "fb", "--alpha", 0.5,
            "--theta", 0.5, "--T", 200, "--seed", 2, "--out", out)
    figs = tmp_path / "figs"
    assert run_cli("report", out, "--theorem", "thm32", "--out-dir", figs) == 0
    pngs = sorted(p.name for p in figs.glob("*.png"))
    assert pngs == ["od_quad_l1_fb_gap.png", "od_quad_l1_fb_schedule.png"]
    assert all((figs / p).stat().st_size > 0 for p in pngs)


def test_config_file_precedence(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"problem": "od_quad_l1", "algo": "fb",
                               "alpha": 0.5, "theta": 0.5, "T": 60, "seed": 4}))
    out1 = tmp_path / "c1.csv"
    assert run_cli("run", "--config", cfg, "--out", out1) == 0
    tr = read_trace(out1)
    assert tr.T == 60 and tr.alpha == 0.5
    out2 = tmp_path / "c2.csv"
    assert run_cli("run", "--config", cfg, "--T", 25, "--out", out2) == 0
    assert read_trace(out2).T == 25  # flag wins over the file
