"""Command line front end.

Exit codes: 0 everything requested passed, 1 usage/config/data errors,
2 the structural hypotheses fail for the given parameters, 3 a quantitative
verdict failed its threshold.

Verdict thresholds and their defaults (all overridable per command):

    fit       --tol 0.15          relative error of fitted vs predicted rate
    fit       --spread-tol 3.0    powered-gradient compensated-spread factor
    doubling  --tol 0.15          relative error of tail increment ratios
    ratio     --bound 10.0        allowed band [1/bound, bound] for the
                                  cross-component ratio
    rescale-verify --sup-tol 1.05 allowed sup of the rescaled functional
    rescale-verify --center-min 0.45   required center value (nominal 0.5)
    oracle-ode --tol 5e-3         pointwise relative error against the closed
                                  form over the first 3/4 of its lifespan
    oracle-ode --t-tol 1e-3       blow-up time estimate vs the closed form
    oracle-ode --rate-tol 0.02    fitted max_u exponent vs 1/(p-1)
    oracle-transform --tol 2e-2   sup difference direct vs substituted run
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (
    FIT_CHANNELS,
    AnalysisError,
    blowup_set_width,
    build_rescaled_frame,
    classify_blowup_set,
    doubling_analysis,
    estimate_blowup_time,
    fit_rate,
    frame_functional,
    gradient_channel_spread,
    ratio_trace,
    rescaled_residual,
)
from .grid import RadialGrid, initial_state
from .io import (
    ConfigError,
    ResolvedConfig,
    build_manifest,
    emit_doubling_csv,
    emit_fit_csv,
    emit_series_csv,
    emit_snapshots_csv,
    emit_svg,
    parse_config,
    read_manifest,
    read_series_csv,
    read_snapshots_csv,
    resolve_config,
    write_manifest,
)
from .model import (
    BOUNDARY_NEUMANN,
    DOMAIN_TRUNCATED,
    INIT_CONSTANT,
    INIT_GAUSSIAN,
    InitSpec,
    ParameterError,
    SystemParams,
    check_theorem_hypotheses,
    compute_exponents,
)
from .solver import (
    IntegrationFault,
    RunResult,
    SolverConfig,
    compare_with_transform,
    run_scalar,
    run_to_blowup,
    transform_oracle,
)


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; the contract here reserves 2 for
    hypothesis failures, so route usage errors to exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _json_default(obj):
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj)}")


def _emit(args, report: dict, lines: list[str]) -> None:
    if getattr(args, "json", False):
        print(json.dumps(report, indent=2, sort_keys=True, default=_json_default))
    else:
        for line in lines:
            print(line)


def _check_line(ok: bool, text: str, lines: list[str]) -> bool:
    lines.append(("PASS " if ok else "FAIL ") + text)
    return ok


def _load_run_dir(path: str, need_snapshots: bool = False):
    """Rebuild (resolved config, exponents, RunResult) from a run directory."""
    d = Path(path)
    manifest = read_manifest(d / "manifest.json")
    resolved = resolve_config(manifest["config_echo"])
    p = resolved.params
    exps = compute_exponents(p.p1, p.p2, p.q1, p.q2)
    series = read_series_csv(d / "series.csv")
    snap_path = d / "snapshots.csv"
    snapshots = []
    if need_snapshots:
        if not snap_path.exists():
            raise ConfigError(f"{snap_path} is missing; rerun `blowlab run`")
        snapshots = read_snapshots_csv(snap_path)
        if snapshots and len(snapshots[0].u) != resolved.grid.n_nodes:
            raise ConfigError(
                f"snapshots have {len(snapshots[0].u)} nodes but the manifest "
                f"grid has {resolved.grid.n_nodes}"
            )
    result = RunResult(series, snapshots, manifest["stop_reason"],
                       manifest["steps_taken"])
    return resolved, exps, result


# ---------------------------------------------------------------------------
# subcommands

def cmd_check(args) -> int:
    resolved = parse_config(args.config)
    p = resolved.params
    exps = compute_exponents(p.p1, p.p2, p.q1, p.q2)
    hyp = check_theorem_hypotheses(p.p1, p.p2, p.q1, p.q2, p.n)
    lines = [
        f"alpha = {exps.alpha:.12g}  beta = {exps.beta:.12g}",
        f"theta1 = {exps.theta1:.12g}  theta2 = {exps.theta2:.12g}",
        f"mu1 = {exps.mu1:.12g}  mu2 = {exps.mu2:.12g}",
        f"gradient exponent bounds: q1 < {exps.q1_bound:.12g} (q1 = {p.q1:g}), "
        f"q2 < {exps.q2_bound:.12g} (q2 = {p.q2:g})",
    ]
    _check_line(hyp.cond_fujita,
                f"range condition max(alpha, beta) >= n/2 (margin {hyp.margin_fujita:+.6g})",
                lines)
    _check_line(hyp.cond_q,
                f"gradient exponent condition (margins {hyp.margin_q1:+.6g}, "
                f"{hyp.margin_q2:+.6g})", lines)
    report = {"exponents": asdict(exps), "hypotheses": asdict(hyp),
              "all_hold": hyp.all_hold}
    _emit(args, report, lines)
    return 0 if hyp.all_hold else 2


def cmd_run(args) -> int:
    resolved = parse_config(args.config)
    p = resolved.params
    exps = compute_exponents(p.p1, p.p2, p.q1, p.q2)
    hyp = check_theorem_hypotheses(p.p1, p.p2, p.q1, p.q2, p.n)
    if not hyp.all_hold:
        print("hypotheses fail for these parameters; run `blowlab check` for "
              "details", file=sys.stderr)
        return 2

    started = time.perf_counter()
    result = run_to_blowup(p, resolved.grid, resolved.solver, exps)
    wall = time.perf_counter() - started

    estimate, est_err = None, None
    fits = []
    try:
        estimate = estimate_blowup_time(result.series, exps.alpha)
    except AnalysisError as exc:
        est_err = str(exc)
    if estimate is not None:
        for ch in FIT_CHANNELS:
            try:
                fits.append(fit_rate(result.series, estimate.T_est, ch, exps,
                                     resolved.fit_window))
            except AnalysisError:
                pass

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    emit_series_csv(result.series, out / "series.csv")
    emit_snapshots_csv(result.snapshots, resolved.grid, out / "snapshots.csv")
    emit_fit_csv(fits, out / "fit.csv")
    try:
        rep = doubling_analysis(result.series, exps.alpha, min_doublings=2)
        emit_doubling_csv(rep.t_j, rep.D_j, rep.ratio_j, out / "doubling.csv")
    except AnalysisError:
        pass
    if estimate is not None:
        tau = estimate.T_est - result.series.t
        keep = tau > 0.0
        fit_mu = next((f for f in fits if f.channel == "M_u"), None)
        emit_svg(tau[keep], result.series.M_u[keep], out / "rate.svg",
                 fit=fit_mu, title=f"p = ({p.p1:g}, {p.p2:g}), q = ({p.q1:g}, {p.q2:g})")

    manifest = build_manifest(resolved, exps, hyp, result, estimate, fits,
                              wall, est_err)
    write_manifest(manifest, out / "manifest.json")

    lines = [
        f"stop: {result.stop_reason} after {result.steps_taken} steps "
        f"({len(result.series)} rows, {len(result.snapshots)} snapshots, "
        f"{wall:.1f} s)",
        f"final M_u = {result.series.M_u[-1]:.6g}  M_v = {result.series.M_v[-1]:.6g}",
    ]
    if estimate is not None:
        lines.append(f"T_est = {estimate.T_est:.9g} (geometric {estimate.T_geometric:.9g}, "
                     f"discrepancy {estimate.discrepancy:.3g})")
        for f in fits:
            lines.append(f"  {f.channel}: exponent {f.exponent:.6g} "
                         f"(predicted {f.predicted_exponent:g}, "
                         f"{f.points_used} points)")
    else:
        lines.append(f"no blow-up time estimate: {est_err}")
    lines.append(f"artifacts in {out}")
    _emit(args, {"manifest": manifest, "out": str(out)}, lines)
    return 0


def cmd_fit(args) -> int:
    resolved, exps, result = _load_run_dir(args.rundir)
    window = tuple(args.window) if args.window else resolved.fit_window
    est = estimate_blowup_time(result.series, exps.alpha)
    lines = [
        f"T_est = {est.T_est:.9g}  (geometric {est.T_geometric:.9g}, "
        f"discrepancy {est.discrepancy:.3g})",
    ]
    ok = True
    fits = []
    for ch in ("M_u", "M_v", "max_u", "max_v"):
        f = fit_rate(result.series, est.T_est, ch, exps, window)
        fits.append(f)
        rel = abs(f.exponent - f.predicted_exponent) / f.predicted_exponent
        ok &= _check_line(
            rel <= args.tol,
            f"{ch}: exponent {f.exponent:.6g} vs predicted "
            f"{f.predicted_exponent:.6g}, rel err {rel:.2%} (tol {args.tol:.0%}, "
            f"{f.points_used} points)", lines)
    spread_u, spread_v = gradient_channel_spread(result.series, est.T_est,
                                                 exps, window)
    ok &= _check_line(
        spread_u <= args.spread_tol and spread_v <= args.spread_tol,
        f"powered gradients compensated spread {spread_u:.3g}, {spread_v:.3g} "
        f"(tol {args.spread_tol:g})", lines)
    report = {"estimate": asdict(est), "fits": [asdict(f) for f in fits],
              "gradient_spread": [spread_u, spread_v], "pass": ok}
    _emit(args, report, lines)
    return 0 if ok else 3


def cmd_doubling(args) -> int:
    _, exps, result = _load_run_dir(args.rundir)
    rep = doubling_analysis(result.series, exps.alpha,
                            min_doublings=args.min_doublings)
    rho = 2.0 ** (-1.0 / exps.alpha)
    tail = float(np.mean(rep.ratio_j[-3:]))
    lines = [f"{len(rep.t_j)} doublings of M_u, sup D_j = {rep.sup_D:.6g}",
             "   j        t_j          D_j      ratio_j"]
    first = max(0, len(rep.t_j) - args.rows)
    for j in range(first, len(rep.t_j)):
        d = f"{rep.D_j[j]:12.6g}" if j < len(rep.D_j) else " " * 12
        r = f"{rep.ratio_j[j]:12.6g}" if j < len(rep.ratio_j) else " " * 12
        lines.append(f"{j:4d} {rep.t_j[j]:12.9g} {d} {r}")
    rel = abs(tail - rho) / rho
    ok = _check_line(
        rel <= args.tol,
        f"tail increment ratio {tail:.6g} vs 2^(-1/alpha) = {rho:.6g}, "
        f"rel err {rel:.2%} (tol {args.tol:.0%})", lines)
    report = {"t_j": rep.t_j, "D_j": rep.D_j, "ratio_j": rep.ratio_j,
              "sup_D": rep.sup_D, "tail_ratio": tail, "rho": rho, "pass": ok}
    _emit(args, report, lines)
    return 0 if ok else 3


def cmd_ratio(args) -> int:
    _, exps, result = _load_run_dir(args.rundir)
    tr = ratio_trace(result.series, exps.alpha, exps.beta)
    ok = tr.phi_min >= 1.0 / args.bound and tr.phi_max <= args.bound
    lines = [f"cross-component ratio over t in [{tr.t[0]:.6g}, {tr.t[-1]:.6g}]: "
             f"min {tr.phi_min:.6g}, max {tr.phi_max:.6g}"]
    _check_line(ok, f"ratio stays within [1/{args.bound:g}, {args.bound:g}]",
                lines)
    report = {"phi_min": tr.phi_min, "phi_max": tr.phi_max,
              "bound": args.bound, "pass": ok}
    _emit(args, report, lines)
    return 0 if ok else 3


def cmd_rescale_verify(args) -> int:
    resolved, exps, result = _load_run_dir(args.rundir, need_snapshots=True)
    rep = doubling_analysis(result.series, exps.alpha,
                            min_doublings=max(2, args.level))
    t0 = float(rep.t_j[args.level - 1])
    frame = build_rescaled_frame(result, resolved.grid, exps, t0,
                                 K=args.half_width)
    sup, center = frame_functional(frame, exps)
    res = rescaled_residual(frame, resolved.params, exps)
    lines = [
        f"frame at doubling level {args.level}: t0 = {t0:.9g}, "
        f"gamma = {frame.gamma:.6g}, x_star = {frame.x_star:.6g}",
        f"{len(frame.s_levels)} time levels over s in "
        f"[{frame.s_range[0]:.4g}, {frame.s_range[1]:.4g}], "
        f"{len(frame.y)} y nodes" + ("  [relaxed center]" if frame.relaxed_center else ""),
        f"residuals: {res.res1:.4g}, {res.res2:.4g}; weighted gradient share "
        f"{res.grad1_share:.3g}, {res.grad2_share:.3g}",
    ]
    ok = _check_line(sup <= args.sup_tol,
                     f"rescaled functional sup {sup:.6g} <= {args.sup_tol:g}",
                     lines)
    ok &= _check_line(center >= args.center_min,
                      f"rescaled functional center {center:.6g} >= {args.center_min:g}",
                      lines)
    report = {"t0": t0, "gamma": frame.gamma, "x_star": frame.x_star,
              "sup": sup, "center": center, "residual": asdict(res),
              "relaxed_center": frame.relaxed_center, "pass": ok}
    _emit(args, report, lines)
    return 0 if ok else 3


def cmd_oracle_ode(args) -> int:
    p, a = args.p, args.amplitude
    init = InitSpec(kind=INIT_CONSTANT, amplitude_u=a, amplitude_v=a, width=0.3)
    params = SystemParams(p1=p, p2=p, q1=2.0, q2=2.0, n=1,
                          domain_kind=DOMAIN_TRUNCATED, radius=1.0,
                          boundary=BOUNDARY_NEUMANN, init=init)
    t_true = a ** (1.0 - p) / (p - 1.0)
    cfg = SolverConfig(safety=0.4, reaction_cap=args.cap, m_stop=args.m_stop,
                       t_max=2.0 * t_true, record_every=1000)
    grid = RadialGrid(args.nodes, 1.0)
    result = run_to_blowup(params, grid, cfg)
    t, m = result.series.t, result.series.max_u
    # the Euler trajectory blows up at its own time, t_true + O(cap), so the
    # pointwise quotient is meaningless near the pole; compare away from it
    sel = t <= 0.75 * t_true
    exact = a * (1.0 - t[sel] / t_true) ** (-1.0 / (p - 1.0))
    rel = float(np.max(np.abs(m[sel] - exact) / exact))
    drift = float(result.series.max_grad_u.max())
    alpha = 1.0 / (p - 1.0)
    est = estimate_blowup_time(result.series, alpha)
    f = fit_rate(result.series, est.T_est, "max_u")
    t_err = abs(est.T_est - t_true)
    rate_err = abs(f.exponent - alpha) / alpha
    lines = [
        f"uniform data a = {a:g}, p = {p:g}: closed-form blow-up at "
        f"T = {t_true:.9g}",
        f"stop: {result.stop_reason} at t = {t[-1]:.9g} "
        f"(max_u = {m[-1]:.6g}, {result.steps_taken} steps)",
        f"spatial gradient stayed at {drift:.3g}",
    ]
    ok = _check_line(rel <= args.tol,
                     f"relative error vs closed form over t <= 3T/4: {rel:.3e} "
                     f"(tol {args.tol:g})", lines)
    ok &= _check_line(t_err <= args.t_tol,
                      f"estimated blow-up time {est.T_est:.9g} vs {t_true:.9g}, "
                      f"|diff| = {t_err:.3e} (tol {args.t_tol:g})", lines)
    ok &= _check_line(rate_err <= args.rate_tol,
                      f"fitted max_u exponent {f.exponent:.6g} vs {alpha:g}, "
                      f"rel err {rate_err:.2%} (tol {args.rate_tol:.0%})", lines)
    report = {"T_true": t_true, "T_est": est.T_est, "max_rel_error": rel,
              "fit_exponent": f.exponent, "stop_reason": result.stop_reason,
              "pass": ok}
    _emit(args, report, lines)
    return 0 if ok else 3


def cmd_oracle_transform(args) -> int:
    p = args.p
    init = InitSpec(kind=INIT_GAUSSIAN, amplitude_u=args.amplitude,
                    amplitude_v=args.amplitude, width=args.width)
    params = SystemParams(p1=p, p2=p, q1=2.0, q2=2.0, n=args.n, init=init)
    grid = RadialGrid(args.nodes, 1.0)
    cfg = SolverConfig(safety=0.4, reaction_cap=args.cap, m_stop=args.m_stop,
                       t_max=10.0, record_every=args.record_every)
    direct = run_scalar(params, grid, cfg)
    u0 = initial_state(params, grid).u
    transformed = transform_oracle(p, grid, cfg, u0, n=args.n)
    diff = compare_with_transform(direct, transformed, u_cap=args.u_cap)
    lines = [
        f"direct scalar run: {direct.stop_reason} after {direct.steps_taken} steps",
        f"substituted run:   {transformed.stop_reason} after "
        f"{transformed.steps_taken} steps",
    ]
    ok = _check_line(
        diff <= args.tol,
        f"sup |u - log(1+w)| = {diff:.3e} while u <= {args.u_cap:g} "
        f"(tol {args.tol:g})", lines)
    report = {"max_diff": diff, "u_cap": args.u_cap, "pass": ok}
    _emit(args, report, lines)
    return 0 if ok else 3


def cmd_blowup_set(args) -> int:
    resolved, _, result = _load_run_dir(args.rundir, need_snapshots=True)
    trace = blowup_set_width(result, resolved.grid, theta=args.theta)
    label = classify_blowup_set(trace, resolved.params.radius)
    lines = ["        t        max_u        width"]
    first = max(0, len(trace.t) - args.rows)
    for k in range(first, len(trace.t)):
        lines.append(f"{trace.t[k]:12.9g} {trace.max_u[k]:12.6g} "
                     f"{trace.width[k]:12.6g}")
    lines.append(f"classification: {label} (final width {trace.width[-1]:.6g} "
                 f"of radius {resolved.params.radius:g})")
    ok = True
    if args.expect is not None:
        ok = _check_line(label == args.expect,
                         f"expected {args.expect}, classified {label}", lines)
    report = {"t": trace.t, "width": trace.width, "max_u": trace.max_u,
              "classification": label, "pass": ok}
    _emit(args, report, lines)
    return 0 if ok else 3


# ---------------------------------------------------------------------------
# parameter sweep

def _parse_vary(spec: str) -> tuple[str, str, list]:
    from .io import _SCHEMA

    key_part, sep, range_part = spec.partition("=")
    section, dot, key = key_part.partition(".")
    if not sep or not dot:
        raise ConfigError(f"--vary wants section.key=lo:hi:step (got {spec!r})")
    if section not in _SCHEMA or key not in _SCHEMA[section]:
        raise ConfigError(f"unknown config key [{section}] {key}")
    kind = _SCHEMA[section][key][0]
    if kind == "str":
        raise ConfigError(f"[{section}] {key} is not numeric; cannot sweep it")
    try:
        lo, hi, step = (float(x) for x in range_part.split(":"))
    except ValueError:
        raise ConfigError(f"--vary range wants lo:hi:step (got {range_part!r})") from None
    if step <= 0.0 or hi < lo:
        raise ConfigError(f"--vary range needs step > 0 and hi >= lo (got {range_part!r})")
    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    values = [lo + i * step for i in range(count)]
    if kind == "int":
        values = [int(round(v)) for v in values]
    return section, key, values


def _sweep_cell(payload: tuple) -> dict:
    raw, axis_vals = payload
    row: dict = {name: val for name, val in axis_vals}
    row.update(hyp_ok="", stop_reason="", T_est=math.nan,
               exponent_u=math.nan, rel_err_u=math.nan, fault="")
    try:
        resolved = resolve_config(raw)
        p = resolved.params
    except (ConfigError, ParameterError) as exc:
        row["fault"] = f"config: {exc}"
        return row
    try:
        exps = compute_exponents(p.p1, p.p2, p.q1, p.q2)
        hyp = check_theorem_hypotheses(p.p1, p.p2, p.q1, p.q2, p.n)
        row["hyp_ok"] = "yes" if hyp.all_hold else "no"
    except ParameterError as exc:
        row["hyp_ok"] = "no"
        row["fault"] = str(exc)
        return row
    try:
        result = run_to_blowup(p, resolved.grid, resolved.solver, exps)
        row["stop_reason"] = result.stop_reason
        est = estimate_blowup_time(result.series, exps.alpha)
        row["T_est"] = est.T_est
        f = fit_rate(result.series, est.T_est, "M_u", exps, resolved.fit_window)
        row["exponent_u"] = f.exponent
        row["rel_err_u"] = abs(f.exponent - exps.alpha) / exps.alpha
    except IntegrationFault as exc:
        row["fault"] = f"integration: {exc}"
    except AnalysisError as exc:
        row["fault"] = f"analysis: {exc}"
    return row


def cmd_sweep(args) -> int:
    resolved = parse_config(args.config)  # validate the base file up front
    base = resolved.echo
    axes = [_parse_vary(spec) for spec in args.vary]
    if len(axes) > 2:
        raise ConfigError("at most two --vary axes")
    cells = [[(axes[0][0], axes[0][1], v) for v in axes[0][2]]]
    if len(axes) == 2:
        cells.append([(axes[1][0], axes[1][1], v) for v in axes[1][2]])
    combos = [(a,) for a in cells[0]] if len(cells) == 1 else [
        (a, b) for a in cells[0] for b in cells[1]
    ]
    if len(combos) > 400:
        raise ConfigError(f"sweep of {len(combos)} cells exceeds the 400-cell cap")

    payloads = []
    for combo in combos:
        raw = {sec: dict(tbl) for sec, tbl in base.items()}
        names = []
        for section, key, value in combo:
            raw[section][key] = value
            names.append((f"{section}.{key}", value))
        payloads.append((raw, names))

    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(_sweep_cell, payloads))
    else:
        rows = [_sweep_cell(pl) for pl in payloads]

    axis_names = [f"{s}.{k}" for s, k, _ in axes]
    rows.sort(key=lambda r: tuple(r[name] for name in axis_names))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    cols = axis_names + ["hyp_ok", "stop_reason", "T_est", "exponent_u",
                         "rel_err_u", "fault"]
    path = out / "phase.csv"
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(cols)
        for row in rows:
            w.writerow([format(row[c], ".17g") if isinstance(row[c], float)
                        else row[c] for c in cols])

    reasons: dict[str, int] = {}
    for row in rows:
        key = row["stop_reason"] or "failed"
        reasons[key] = reasons.get(key, 0) + 1
    lines = [f"{len(rows)} cells -> {path}"]
    lines.extend(f"  {k}: {v}" for k, v in sorted(reasons.items()))
    _emit(args, {"cells": len(rows), "out": str(path), "by_stop": reasons}, lines)
    return 0


# ---------------------------------------------------------------------------

def _build_parser() -> _Parser:
    parser = _Parser(prog="blowlab", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version",
                        version=f"blowlab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        sp = sub.add_parser(name, help=help_)
        sp.set_defaults(func=fn)
        sp.add_argument("--json", action="store_true",
                        help="machine-readable report on stdout")
        return sp

    sp = add("check", cmd_check, "exponents and hypothesis margins for a config")
    sp.add_argument("config")

    sp = add("run", cmd_run, "integrate to blow-up and write run artifacts")
    sp.add_argument("config")
    sp.add_argument("--out", default="out", help="artifact directory")

    sp = add("fit", cmd_fit, "rate fits against the predicted exponents")
    sp.add_argument("rundir")
    sp.add_argument("--tol", type=float, default=0.15)
    sp.add_argument("--spread-tol", type=float, default=3.0)
    sp.add_argument("--window", type=float, nargs=2, metavar=("LO", "HI"))

    sp = add("doubling", cmd_doubling, "doubling times of M_u and their ratios")
    sp.add_argument("rundir")
    sp.add_argument("--tol", type=float, default=0.15)
    sp.add_argument("--min-doublings", type=int, default=5)
    sp.add_argument("--rows", type=int, default=10, help="table rows to print")

    sp = add("ratio", cmd_ratio, "boundedness of the cross-component ratio")
    sp.add_argument("rundir")
    sp.add_argument("--bound", type=float, default=10.0)

    sp = add("rescale-verify", cmd_rescale_verify,
             "normalization of the solution in the rescaled frame")
    sp.add_argument("rundir")
    sp.add_argument("--level", type=int, default=3,
                    help="doubling level of M_u to anchor the frame at")
    sp.add_argument("--half-width", type=float, default=5.0,
                    help="frame half-width in units of gamma")
    sp.add_argument("--sup-tol", type=float, default=1.05)
    sp.add_argument("--center-min", type=float, default=0.45)

    sp = add("oracle-ode", cmd_oracle_ode,
             "uniform-data run against the closed-form solution")
    sp.add_argument("--p", type=float, default=2.0)
    sp.add_argument("--amplitude", type=float, default=1.0)
    sp.add_argument("--nodes", type=int, default=41)
    sp.add_argument("--cap", type=float, default=0.002)
    sp.add_argument("--m-stop", type=float, default=1e6)
    sp.add_argument("--tol", type=float, default=5e-3)
    sp.add_argument("--t-tol", type=float, default=1e-3)
    sp.add_argument("--rate-tol", type=float, default=0.02)

    sp = add("oracle-transform", cmd_oracle_transform,
             "scalar q = 2 run against its exponential substitution")
    sp.add_argument("--p", type=float, default=3.0)
    sp.add_argument("--n", type=int, default=1)
    sp.add_argument("--amplitude", type=float, default=4.0)
    sp.add_argument("--width", type=float, default=0.3)
    sp.add_argument("--nodes", type=int, default=201)
    sp.add_argument("--cap", type=float, default=0.01)
    sp.add_argument("--m-stop", type=float, default=50.0)
    sp.add_argument("--record-every", type=int, default=10)
    sp.add_argument("--u-cap", type=float, default=6.0)
    sp.add_argument("--tol", type=float, default=2e-2)

    sp = add("blowup-set", cmd_blowup_set,
             "width of the near-peak set over the late snapshots")
    sp.add_argument("rundir")
    sp.add_argument("--theta", type=float, default=0.5)
    sp.add_argument("--expect", choices=("single_point", "regional", "global"))
    sp.add_argument("--rows", type=int, default=8)

    sp = add("sweep", cmd_sweep, "run a grid of configs and tabulate outcomes")
    sp.add_argument("config")
    sp.add_argument("--vary", action="append", required=True,
                    metavar="SECTION.KEY=LO:HI:STEP")
    sp.add_argument("--out", default="sweep")
    sp.add_argument("--jobs", type=int, default=1)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ParameterError, AnalysisError, IntegrationFault,
            OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
