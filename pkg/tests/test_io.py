"""Config schema, artifact round-trips, manifest replay, SVG chart."""

import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from blowlab import (
    ConfigError,
    FieldState,
    RadialGrid,
    SupNormSeries,
    build_manifest,
    check_theorem_hypotheses,
    compute_exponents,
    emit_doubling_csv,
    emit_fit_csv,
    emit_series_csv,
    emit_snapshots_csv,
    emit_svg,
    fit_rate,
    parse_config,
    read_manifest,
    read_series_csv,
    read_snapshots_csv,
    resolve_config,
    run_to_blowup,
    write_manifest,
)
from blowlab.io import _f

MODEL = {"p1": 2.0, "p2": 3.0, "q1": 1.2, "q2": 1.2}


# ---------------------------------------------------------------------------
# config schema

def test_defaults_fill_in():
    rc = resolve_config({"model": dict(MODEL)})
    assert rc.grid.n_nodes == 801
    assert rc.params.radius == 1.0
    assert rc.params.boundary == "dirichlet"
    assert rc.solver.m_stop == 1e8
    assert rc.solver.record_every == 50
    assert rc.params.init.width == pytest.approx(0.3)
    assert rc.fit_window == (1e-3, 1e-1)
    # the embedded echo replays to the same objects
    rc2 = resolve_config(rc.echo)
    assert rc2.echo == rc.echo


def test_init_width_tracks_the_domain_radius():
    rc = resolve_config({"model": dict(MODEL), "domain": {"radius": 2.0}})
    assert rc.params.init.width == pytest.approx(0.6)
    rc = resolve_config({"model": dict(MODEL), "domain": {"radius": 2.0},
                         "init": {"width": 0.1}})
    assert rc.params.init.width == 0.1


@pytest.mark.parametrize("raw,msg", [
    ({"model": dict(MODEL), "extra": {}}, "unknown config sections"),
    ({"model": 5}, r"\[model\] must be a table"),
    ({"model": dict(MODEL, bogus=1)}, r"unknown keys in \[model\]: \['bogus'\]"),
    ({"model": {"p1": 2.0, "p2": 3.0, "q1": 1.2}}, r"\[model\] q2 is required"),
    ({"model": dict(MODEL, p1="two")}, "p1 must be a number"),
    ({"model": dict(MODEL, p1=True)}, "p1 must be a number"),
    ({"model": dict(MODEL), "grid": {"nodes": 2.5}}, "nodes must be an integer"),
    ({"model": dict(MODEL), "domain": {"kind": 7}}, "kind must be a string"),
    ({"model": dict(MODEL, q1=2.5)}, "q1"),
    ({"model": dict(MODEL), "grid": {"nodes": 2}}, "integer >= 3"),
    ({"model": dict(MODEL), "fit": {"window_lo": 0.1, "window_hi": 0.1}},
     r"\[fit\] must satisfy 0 < window_lo < window_hi"),
])
def test_config_rejections(raw, msg):
    with pytest.raises(ConfigError, match=msg):
        resolve_config(raw)


def test_parse_config_toml(tmp_path):
    p = tmp_path / "ok.toml"
    p.write_text("[model]\np1 = 2.0\np2 = 3.0\nq1 = 1.2\nq2 = 1.2\n"
                 "[grid]\nnodes = 51\n")
    rc = parse_config(p)
    assert rc.grid.n_nodes == 51
    bad = tmp_path / "bad.toml"
    bad.write_text("[model\np1 = 2.0\n")
    with pytest.raises(ConfigError, match="invalid TOML"):
        parse_config(bad)


# ---------------------------------------------------------------------------
# 17-digit float formatting and CSV round-trips

@given(st.floats(allow_nan=False, allow_infinity=False))
def test_float_formatting_round_trips(x):
    assert float(_f(x)) == x


def test_series_csv_round_trip_is_bitwise(tmp_path):
    t = np.array([0.0, 1e-300, 1.0 / 3.0, 0.1 + 0.2, 1e300])
    vals = np.array([np.pi, np.e, 2.0 ** -1074, 1.0, 7.1e222])
    ser = SupNormSeries(t, vals, vals[::-1].copy(), vals * 3.0, vals / 7.0,
                        np.sqrt(vals), vals ** 0.3, np.linspace(0, 1, 5))
    p = tmp_path / "series.csv"
    emit_series_csv(ser, p)
    back = read_series_csv(p)
    assert np.array_equal(back.as_matrix(), ser.as_matrix())


def test_series_csv_rejects_foreign_header(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("time,sup\n0.0,1.0\n")
    with pytest.raises(ConfigError, match="unexpected series header"):
        read_series_csv(p)


def test_snapshots_csv_round_trip(tmp_path):
    grid = RadialGrid(7, 1.0)
    rng = np.random.default_rng(4)
    snaps = [FieldState(float(k) + 0.125, rng.random(7), rng.random(7))
             for k in range(3)]
    p = tmp_path / "snaps.csv"
    emit_snapshots_csv(snaps, grid, p)
    back = read_snapshots_csv(p)
    assert len(back) == 3
    for a, b in zip(snaps, back):
        assert b.t == a.t
        assert np.array_equal(b.u, a.u)
        assert np.array_equal(b.v, a.v)
    p2 = tmp_path / "bad.csv"
    p2.write_text("t,r,u\n")
    with pytest.raises(ConfigError, match="unexpected snapshots header"):
        read_snapshots_csv(p2)


def test_fit_csv_structure(tmp_path):
    ser, tau = _power_series()
    with_pred = fit_rate(ser, 1.0, "M_u", compute_exponents(*MODEL.values()))
    without = fit_rate(ser, 1.0, "max_u")
    p = tmp_path / "fit.csv"
    emit_fit_csv([with_pred, without], p)
    lines = p.read_text().splitlines()
    assert lines[0].startswith("channel,T_est,exponent,predicted_exponent")
    row = lines[1].split(",")
    assert row[0] == "M_u"
    assert float(row[2]) == with_pred.exponent
    assert float(row[4]) <= 1e-12  # rel error of an exact power law
    assert int(row[9]) == with_pred.points_used
    row2 = lines[2].split(",")
    assert row2[3] == "nan" and row2[4] == "nan"


def test_doubling_csv_pads_the_tail(tmp_path):
    p = tmp_path / "doubling.csv"
    emit_doubling_csv(np.array([0.1, 0.2, 0.3]), np.array([1.5, 1.4]),
                      np.array([0.9]), p)
    lines = p.read_text().splitlines()
    assert lines[0] == "j,t_j,D_j,ratio_j"
    assert lines[1].split(",") == ["0", "0.10000000000000001", "1.5", "0.90000000000000002"]
    assert lines[3].split(",")[2:] == ["nan", "nan"]


def _power_series(alpha=0.6, C=3.0, num=30_000):
    tau = np.geomspace(0.5, 1e-4, num)
    m = C * tau ** (-alpha)
    z = np.zeros(num)
    return SupNormSeries(1.0 - tau, m, m, m, m, z, z, z), tau


# ---------------------------------------------------------------------------
# manifest

def _tiny_run():
    rc = resolve_config({
        "model": dict(MODEL),
        "grid": {"nodes": 41},
        "time": {"m_stop": 100.0, "t_max": 0.05, "record_every": 10},
    })
    exps = compute_exponents(rc.params.p1, rc.params.p2, rc.params.q1, rc.params.q2)
    hyp = check_theorem_hypotheses(rc.params.p1, rc.params.p2, rc.params.q1,
                                   rc.params.q2, rc.params.n)
    result = run_to_blowup(rc.params, rc.grid, rc.solver, exps)
    return rc, exps, hyp, result


def test_manifest_round_trip(tmp_path):
    rc, exps, hyp, result = _tiny_run()
    man = build_manifest(rc, exps, hyp, result, None, [], 1.25,
                         estimate_error="series too short")
    p = tmp_path / "manifest.json"
    write_manifest(man, p)
    back = read_manifest(p)
    assert back["config_echo"] == rc.echo
    assert back["stop_reason"] == result.stop_reason
    assert back["steps_taken"] == result.steps_taken
    assert back["rows_recorded"] == len(result.series)
    assert back["blowup_time"] is None
    assert back["estimate_error"] == "series too short"
    assert back["exponents"]["alpha"] == 0.6
    assert back["hypothesis_report"]["cond_q"] is True
    assert back["wall_seconds"] == 1.25
    # a manifest is valid JSON with sorted keys, ending in a newline
    text = p.read_text()
    assert text.endswith("\n")
    assert list(json.loads(text)) == sorted(json.loads(text))


def test_manifest_echo_replays_bit_identically(tmp_path):
    rc, exps, hyp, result = _tiny_run()
    man = build_manifest(rc, exps, hyp, result, None, [], 0.0)
    p = tmp_path / "manifest.json"
    write_manifest(man, p)
    rc2 = resolve_config(read_manifest(p)["config_echo"])
    result2 = run_to_blowup(rc2.params, rc2.grid, rc2.solver)
    assert np.array_equal(result2.series.as_matrix(), result.series.as_matrix())
    assert result2.steps_taken == result.steps_taken
    assert result2.stop_reason == result.stop_reason


# ---------------------------------------------------------------------------
# SVG chart

def test_svg_smoke_and_decimation(tmp_path):
    ser, tau = _power_series(num=10_000)
    fit = fit_rate(ser, 1.0, "M_u")
    p = tmp_path / "rate.svg"
    emit_svg(tau, ser.M_u, p, fit=fit, title="rate")
    text = p.read_text()
    assert text.startswith("<svg")
    assert "polyline" in text and "slope -0.6" in text
    pts = text.split('points="')[1].split('"')[0].split()
    assert len(pts) <= 2000


def test_svg_needs_positive_data(tmp_path):
    with pytest.raises(ValueError, match="nothing positive"):
        emit_svg(np.zeros(4), np.zeros(4), tmp_path / "no.svg")
