"""Drive the CLI in process and check exit codes, verdict lines, artifacts."""

import json

import pytest

from blowlab import __version__, read_series_csv
from blowlab.cli import main

DEEP = """\
[model]
p1 = 2.0
p2 = 3.0
q1 = 1.2
q2 = 1.2

[grid]
nodes = 201

[time]
m_stop = 1e10
t_max = 1.0
record_every = 10
"""

QUICK = """\
[model]
p1 = 2.0
p2 = 3.0
q1 = 1.2
q2 = 1.2

[grid]
nodes = 51

[time]
m_stop = 50.0
t_max = 0.05
record_every = 10
"""


def _write(directory, text, name="cfg.toml"):
    p = directory / name
    p.write_text(text)
    return str(p)


@pytest.fixture(scope="session")
def rundir(tmp_path_factory):
    """One deep coupled run; every artifact-consuming command reads it."""
    root = tmp_path_factory.mktemp("cli_run")
    cfg = _write(root, DEEP)
    out = root / "out"
    assert main(["run", cfg, "--out", str(out)]) == 0
    return out


@pytest.fixture(scope="session")
def sweep_base(tmp_path_factory):
    return _write(tmp_path_factory.mktemp("cli_sweep"), QUICK)


# ---------------------------------------------------------------------------
# parser plumbing

def test_version_flag(capsys):
    with pytest.raises(SystemExit) as ei:
        main(["--version"])
    assert ei.value.code == 0
    assert capsys.readouterr().out.strip() == f"blowlab {__version__}"


def test_usage_errors_exit_1(capsys):
    for argv in ([], ["frobnicate"], ["fit"]):
        with pytest.raises(SystemExit) as ei:
            main(argv)
        assert ei.value.code == 1
    assert "error:" in capsys.readouterr().err


def test_missing_rundir_exits_1(capsys):
    assert main(["fit", "/nonexistent/rundir"]) == 1
    assert "error:" in capsys.readouterr().err


def test_bad_config_exits_1(tmp_path, capsys):
    cfg = _write(tmp_path, "[model\n")
    assert main(["run", cfg, "--out", str(tmp_path / "o")]) == 1
    assert "invalid TOML" in capsys.readouterr().err
    cfg = _write(tmp_path, "[model]\np1 = 2.0\n", "short.toml")
    assert main(["check", cfg]) == 1
    assert "p2 is required" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# check

def test_check_reports_exponents_and_passes(tmp_path, capsys):
    cfg = _write(tmp_path, QUICK)
    assert main(["check", cfg]) == 0
    out = capsys.readouterr().out
    assert "alpha = 0.6  beta = 0.8" in out
    assert "PASS range condition" in out
    assert "PASS gradient exponent condition" in out

    assert main(["check", cfg, "--json"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["all_hold"] is True
    assert rep["exponents"]["alpha"] == 0.6
    assert rep["hypotheses"]["cond_q"] is True


def test_check_flags_gradient_power_above_the_ceiling(tmp_path, capsys):
    cfg = _write(tmp_path, QUICK.replace("q1 = 1.2", "q1 = 1.9"))
    assert main(["check", cfg]) == 2
    assert "FAIL gradient exponent condition" in capsys.readouterr().out


def test_check_flags_subcritical_dimension(tmp_path, capsys):
    cfg = _write(tmp_path, QUICK.replace("q2 = 1.2", "q2 = 1.2\nn = 4"))
    assert main(["check", cfg]) == 2
    assert "FAIL range condition" in capsys.readouterr().out


# ---------------------------------------------------------------------------
# run

def test_run_writes_artifacts_and_refuses_bad_hypotheses(tmp_path, capsys):
    out = tmp_path / "quick"
    assert main(["run", _write(tmp_path, QUICK), "--out", str(out)]) == 0
    printed = capsys.readouterr().out
    assert "stop: threshold" in printed
    # too shallow for an extrapolation decade, and says so
    assert "no blow-up time estimate" in printed
    for name in ("series.csv", "snapshots.csv", "fit.csv", "manifest.json"):
        assert (out / name).exists()

    bad = _write(tmp_path, QUICK.replace("q1 = 1.2", "q1 = 1.9"), "bad.toml")
    assert main(["run", bad, "--out", str(tmp_path / "x")]) == 2
    assert "hypotheses fail" in capsys.readouterr().err


def test_deep_run_writes_every_artifact(rundir):
    for name in ("series.csv", "snapshots.csv", "fit.csv", "doubling.csv",
                 "rate.svg", "manifest.json"):
        assert (rundir / name).exists()
    ser = read_series_csv(rundir / "series.csv")
    # the faster channel v trips the threshold first
    assert max(ser.M_u[-1], ser.M_v[-1]) >= 1e10
    assert "slope -" in (rundir / "rate.svg").read_text()


# ---------------------------------------------------------------------------
# artifact-consuming verdicts, all against the same deep run

def test_fit_passes_at_default_tolerance(rundir, capsys):
    assert main(["fit", str(rundir)]) == 0
    out = capsys.readouterr().out
    for ch in ("M_u", "M_v", "max_u", "max_v"):
        assert f"PASS {ch}: exponent" in out
    assert "PASS powered gradients compensated spread" in out
    assert "T_est = 0.0087" in out


def test_fit_fails_when_squeezed(rundir, capsys):
    assert main(["fit", str(rundir), "--tol", "0.001"]) == 3
    assert "FAIL M_u" in capsys.readouterr().out


def test_fit_json_report(rundir, capsys):
    assert main(["fit", str(rundir), "--json"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["pass"] is True
    assert abs(rep["estimate"]["T_est"] - 0.00873474597) <= 1e-9
    assert len(rep["fits"]) == 4
    for f in rep["fits"]:
        rel = abs(f["exponent"] - f["predicted_exponent"]) / f["predicted_exponent"]
        assert rel <= 0.15
    assert max(rep["gradient_spread"]) <= 1.01


def test_doubling_verdict(rundir, capsys):
    assert main(["doubling", str(rundir)]) == 0
    out = capsys.readouterr().out
    assert "20 doublings of M_u" in out
    assert "PASS tail increment ratio" in out
    assert main(["doubling", str(rundir), "--tol", "1e-9"]) == 3
    assert main(["doubling", str(rundir), "--min-doublings", "25"]) == 1
    err = capsys.readouterr().err
    assert "need at least 25 doublings" in err

    assert main(["doubling", str(rundir), "--json"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert len(rep["t_j"]) == 20
    assert abs(rep["tail_ratio"] - rep["rho"]) / rep["rho"] <= 0.25


def test_ratio_verdict(rundir, capsys):
    assert main(["ratio", str(rundir)]) == 0
    out = capsys.readouterr().out
    assert "PASS ratio stays within [1/10, 10]" in out
    assert main(["ratio", str(rundir), "--bound", "1.05"]) == 3
    assert "FAIL" in capsys.readouterr().out

    assert main(["ratio", str(rundir), "--json"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert 0.5 <= rep["phi_min"] <= rep["phi_max"] <= 2.0


def test_rescale_verify_levels(rundir, capsys):
    for level in ("2", "3"):
        assert main(["rescale-verify", str(rundir), "--level", level]) == 0
        out = capsys.readouterr().out
        assert f"frame at doubling level {level}" in out
        assert "PASS rescaled functional sup" in out
        assert "PASS rescaled functional center" in out

    assert main(["rescale-verify", str(rundir), "--level", "3",
                 "--sup-tol", "0.5"]) == 3
    assert "FAIL rescaled functional sup" in capsys.readouterr().out

    assert main(["rescale-verify", str(rundir), "--level", "3", "--json"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert abs(rep["sup"] - 0.879445) <= 1e-4
    assert abs(rep["center"] - 0.878783) <= 1e-4
    assert rep["residual"]["res1"] < 0.05


def test_blowup_set_verdict(rundir, capsys):
    assert main(["blowup-set", str(rundir), "--expect", "single_point"]) == 0
    assert "classification: single_point" in capsys.readouterr().out
    assert main(["blowup-set", str(rundir), "--expect", "global"]) == 3
    assert "FAIL expected global, classified single_point" in capsys.readouterr().out

    assert main(["blowup-set", str(rundir), "--json"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["classification"] == "single_point"
    assert rep["width"][-1] < 0.2


# ---------------------------------------------------------------------------
# self-contained oracles

def test_oracle_ode_matches_the_closed_form(capsys):
    assert main(["oracle-ode"]) == 0
    out = capsys.readouterr().out
    assert "PASS relative error vs closed form" in out
    assert "PASS estimated blow-up time" in out
    assert "PASS fitted max_u exponent" in out
    assert main(["oracle-ode", "--t-tol", "1e-9"]) == 3
    assert "FAIL estimated blow-up time" in capsys.readouterr().out


def test_oracle_transform_agreement(capsys):
    assert main(["oracle-transform"]) == 0
    assert "PASS sup |u - log(1+w)|" in capsys.readouterr().out
    assert main(["oracle-transform", "--tol", "1e-9"]) == 3


# ---------------------------------------------------------------------------
# sweep

def test_sweep_tabulates_faults_and_outcomes(sweep_base, tmp_path, capsys):
    out = tmp_path / "sw"
    assert main(["sweep", sweep_base, "--vary", "model.q1=1.5:2.5:0.5",
                 "--out", str(out)]) == 0
    assert "3 cells" in capsys.readouterr().out
    lines = (out / "phase.csv").read_text().splitlines()
    assert lines[0] == "model.q1,hyp_ok,stop_reason,T_est,exponent_u,rel_err_u,fault"
    assert len(lines) == 4
    rows = {ln.split(",")[0]: ln for ln in lines[1:]}
    # q1 = 2.5 violates the parameter range outright
    assert '"config:' in rows["2.5"] or "config:" in rows["2.5"]
    # q1 = 1.5 and 2.0 are legal parameters that break the rate hypotheses;
    # the cells still run and record how they stopped
    for q1 in ("1.5", "2"):
        row = rows[q1]
        assert ",no,threshold," in row


def test_sweep_output_is_independent_of_jobs(sweep_base, tmp_path):
    outs = []
    for jobs in ("1", "2"):
        out = tmp_path / f"sw{jobs}"
        assert main(["sweep", sweep_base, "--vary", "model.q1=1.2:1.4:0.1",
                     "--jobs", jobs, "--out", str(out)]) == 0
        outs.append((out / "phase.csv").read_bytes())
    assert outs[0] == outs[1]


def test_sweep_two_axes(sweep_base, tmp_path, capsys):
    out = tmp_path / "sw2"
    assert main(["sweep", sweep_base, "--vary", "model.q1=1.2:1.3:0.1",
                 "--vary", "model.q2=1.2:1.3:0.1", "--out", str(out)]) == 0
    assert "4 cells" in capsys.readouterr().out
    lines = (out / "phase.csv").read_text().splitlines()
    assert lines[0].startswith("model.q1,model.q2,")
    assert len(lines) == 5
    # rows are sorted by the axis values regardless of execution order
    keys = [tuple(float(x) for x in ln.split(",")[:2]) for ln in lines[1:]]
    assert keys == sorted(keys)


@pytest.mark.parametrize("spec,msg", [
    ("model.q1", "wants section.key=lo:hi:step"),
    ("domain.kind=0:1:1", "not numeric"),
    ("model.zz=0:1:1", "unknown config key"),
    ("model.q1=2:1:0.5", "step > 0 and hi >= lo"),
    ("model.q1=1:2:zz", "range wants lo:hi:step"),
])
def test_sweep_rejects_bad_axis_specs(sweep_base, tmp_path, capsys, spec, msg):
    assert main(["sweep", sweep_base, "--vary", spec,
                 "--out", str(tmp_path / "x")]) == 1
    assert msg in capsys.readouterr().err


def test_sweep_enforces_the_cell_cap(sweep_base, tmp_path, capsys):
    assert main(["sweep", sweep_base,
                 "--vary", "model.q1=1.0:2.0:0.05",
                 "--vary", "grid.nodes=11:51:2",
                 "--out", str(tmp_path / "x")]) == 1
    assert "exceeds the 400-cell cap" in capsys.readouterr().err
