"""Config parsing, CSV/JSON artifacts, and the SVG chart.

The TOML schema is strict: unknown sections or keys are errors, and every
range violation reports the constraint it broke.  All floating point output
uses 17 significant digits so a written artifact parses back bit for bit,
and a manifest echoes the fully resolved config so a run can be replayed
identically.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from .analysis import RateFit
from .grid import FieldState, RadialGrid
from .model import InitSpec, ParameterError, SystemParams
from .solver import RunResult, SolverConfig, SupNormSeries


class ConfigError(ValueError):
    """The config file violates the schema or a parameter constraint."""


# section -> key -> (type tag, default or REQUIRED)
_REQUIRED = object()
_SCHEMA: dict[str, dict[str, tuple[str, object]]] = {
    "model": {
        "p1": ("float", _REQUIRED),
        "p2": ("float", _REQUIRED),
        "q1": ("float", _REQUIRED),
        "q2": ("float", _REQUIRED),
        "n": ("int", 1),
    },
    "domain": {
        "kind": ("str", "ball"),
        "radius": ("float", 1.0),
        "boundary": ("str", "dirichlet"),
    },
    "grid": {
        "nodes": ("int", 801),
    },
    "time": {
        "safety": ("float", 0.4),
        "reaction_cap": ("float", 0.05),
        "m_stop": ("float", 1e8),
        "t_max": ("float", 10.0),
        "record_every": ("int", 50),
    },
    "init": {
        "kind": ("str", "gaussian"),
        "amplitude_u": ("float", 20.0),
        "amplitude_v": ("float", 20.0),
        # width defaults to 0.3 * radius, resolved after the domain section
        "width": ("float", None),
    },
    "fit": {
        "window_lo": ("float", 1e-3),
        "window_hi": ("float", 1e-1),
    },
}


@dataclass(frozen=True)
class ResolvedConfig:
    """Validated parameter objects plus the echo dict that rebuilds them."""

    params: SystemParams
    grid: RadialGrid
    solver: SolverConfig
    fit_window: tuple[float, float]
    echo: dict


def _coerce(section: str, key: str, kind: str, value: object) -> object:
    if kind == "float":
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"[{section}] {key} must be a number (got {value!r})")
        return float(value)
    if kind == "int":
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"[{section}] {key} must be an integer (got {value!r})")
        return int(value)
    if not isinstance(value, str):
        raise ConfigError(f"[{section}] {key} must be a string (got {value!r})")
    return value


def resolve_config(raw: dict) -> ResolvedConfig:
    """Validate a parsed config dict and build the parameter objects."""
    unknown_sections = set(raw) - set(_SCHEMA)
    if unknown_sections:
        raise ConfigError(f"unknown config sections: {sorted(unknown_sections)}")
    resolved: dict[str, dict] = {}
    for section, keys in _SCHEMA.items():
        given = raw.get(section, {})
        if not isinstance(given, dict):
            raise ConfigError(f"[{section}] must be a table")
        unknown = set(given) - set(keys)
        if unknown:
            raise ConfigError(f"unknown keys in [{section}]: {sorted(unknown)}")
        out: dict[str, object] = {}
        for key, (kind, default) in keys.items():
            if key in given:
                out[key] = _coerce(section, key, kind, given[key])
            elif default is _REQUIRED:
                raise ConfigError(f"[{section}] {key} is required")
            else:
                out[key] = default
        resolved[section] = out

    if resolved["init"]["width"] is None:
        resolved["init"]["width"] = 0.3 * resolved["domain"]["radius"]

    try:
        init = InitSpec(
            kind=resolved["init"]["kind"],
            amplitude_u=resolved["init"]["amplitude_u"],
            amplitude_v=resolved["init"]["amplitude_v"],
            width=resolved["init"]["width"],
        )
        params = SystemParams(
            p1=resolved["model"]["p1"],
            p2=resolved["model"]["p2"],
            q1=resolved["model"]["q1"],
            q2=resolved["model"]["q2"],
            n=resolved["model"]["n"],
            domain_kind=resolved["domain"]["kind"],
            radius=resolved["domain"]["radius"],
            boundary=resolved["domain"]["boundary"],
            init=init,
        )
        grid = RadialGrid(n_nodes=resolved["grid"]["nodes"], radius=resolved["domain"]["radius"])
        solver = SolverConfig(
            safety=resolved["time"]["safety"],
            reaction_cap=resolved["time"]["reaction_cap"],
            m_stop=resolved["time"]["m_stop"],
            t_max=resolved["time"]["t_max"],
            record_every=resolved["time"]["record_every"],
        )
    except ParameterError as exc:
        raise ConfigError(str(exc)) from exc

    lo, hi = resolved["fit"]["window_lo"], resolved["fit"]["window_hi"]
    if not 0.0 < lo < hi:
        raise ConfigError(f"[fit] must satisfy 0 < window_lo < window_hi (got {lo}, {hi})")
    return ResolvedConfig(params, grid, solver, (lo, hi), resolved)


def parse_config(path: str | Path) -> ResolvedConfig:
    """Parse and validate a TOML config file."""
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"invalid TOML in {path}: {exc}") from exc
    return resolve_config(raw)


# ---------------------------------------------------------------------------
# CSV artifacts, 17 significant digits everywhere

def _f(x: float) -> str:
    return format(float(x), ".17g")


def emit_series_csv(series: SupNormSeries, path: str | Path) -> None:
    with open(path, "w") as fh:
        fh.write(",".join(SupNormSeries.COLUMNS) + "\n")
        mat = series.as_matrix()
        for row in mat:
            fh.write(",".join(_f(x) for x in row) + "\n")


def read_series_csv(path: str | Path) -> SupNormSeries:
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        if tuple(header) != SupNormSeries.COLUMNS:
            raise ConfigError(f"unexpected series header {header}")
        mat = np.loadtxt(fh, delimiter=",", ndmin=2)
    return SupNormSeries.from_matrix(mat)


def emit_fit_csv(fits: list[RateFit], path: str | Path) -> None:
    with open(path, "w") as fh:
        fh.write("channel,T_est,exponent,predicted_exponent,rel_error,"
                 "amplitude,rms_residual,window_lo,window_hi,points_used\n")
        for f in fits:
            rel = abs(f.exponent - f.predicted_exponent) / abs(f.predicted_exponent) \
                if f.predicted_exponent and math.isfinite(f.predicted_exponent) else math.nan
            fh.write(",".join([
                f.channel, _f(f.T_est), _f(f.exponent), _f(f.predicted_exponent),
                _f(rel), _f(f.amplitude), _f(f.rms_residual),
                _f(f.window[0]), _f(f.window[1]), str(f.points_used),
            ]) + "\n")


def emit_doubling_csv(t_j: np.ndarray, d_j: np.ndarray, ratio_j: np.ndarray,
                      path: str | Path) -> None:
    with open(path, "w") as fh:
        fh.write("j,t_j,D_j,ratio_j\n")
        for j in range(len(t_j)):
            d = _f(d_j[j]) if j < len(d_j) else "nan"
            r = _f(ratio_j[j]) if j < len(ratio_j) else "nan"
            fh.write(f"{j},{_f(t_j[j])},{d},{r}\n")


def emit_snapshots_csv(snapshots: list[FieldState], grid: RadialGrid,
                       path: str | Path) -> None:
    r = grid.r
    with open(path, "w") as fh:
        fh.write("t,r,u,v\n")
        for snap in snapshots:
            ts = _f(snap.t)
            for i in range(len(r)):
                fh.write(f"{ts},{_f(r[i])},{_f(snap.u[i])},{_f(snap.v[i])}\n")


def read_snapshots_csv(path: str | Path) -> list[FieldState]:
    with open(path) as fh:
        header = fh.readline().strip()
        if header != "t,r,u,v":
            raise ConfigError(f"unexpected snapshots header {header!r}")
        mat = np.loadtxt(fh, delimiter=",", ndmin=2)
    if mat.size == 0:
        return []
    t = mat[:, 0]
    starts = np.flatnonzero(np.r_[True, t[1:] != t[:-1]])
    bounds = np.r_[starts, len(t)]
    return [
        FieldState(float(t[a]), mat[a:b, 2].copy(), mat[a:b, 3].copy())
        for a, b in zip(bounds[:-1], bounds[1:])
    ]


# ---------------------------------------------------------------------------
# manifest

def build_manifest(resolved: ResolvedConfig, exps, hyp, result: RunResult,
                   estimate, fits: list[RateFit], wall_seconds: float,
                   estimate_error: str | None = None) -> dict:
    from dataclasses import asdict

    from . import __version__

    return {
        "tool_version": __version__,
        "config_echo": resolved.echo,
        "exponents": asdict(exps),
        "hypothesis_report": asdict(hyp),
        "stop_reason": result.stop_reason,
        "steps_taken": result.steps_taken,
        "rows_recorded": len(result.series),
        "blowup_time": None if estimate is None else asdict(estimate),
        "estimate_error": estimate_error,
        "fits": [asdict(f) for f in fits],
        "wall_seconds": wall_seconds,
    }


def write_manifest(manifest: dict, path: str | Path) -> None:
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_manifest(path: str | Path) -> dict:
    with open(path) as fh:
        return json.load(fh)


# ---------------------------------------------------------------------------
# SVG log-log chart

def emit_svg(x: np.ndarray, y: np.ndarray, path: str | Path, *,
             fit: RateFit | None = None, xlabel: str = "T_est - t",
             ylabel: str = "M_u", title: str = "") -> None:
    """Log-log polyline of y against x with an optional fitted-line overlay."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    ok = (x > 0.0) & (y > 0.0) & np.isfinite(x) & np.isfinite(y)
    if not np.any(ok):
        raise ValueError("nothing positive to plot")
    lx, ly = np.log10(x[ok]), np.log10(y[ok])
    if len(lx) > 2000:
        keep = np.unique(np.round(np.linspace(0, len(lx) - 1, 2000)).astype(int))
        lx, ly = lx[keep], ly[keep]
    x0, x1 = float(lx.min()), float(lx.max())
    y0, y1 = float(ly.min()), float(ly.max())
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    w, h, ml, mr, mt, mb = 640, 480, 72, 16, 28, 48

    def px(v: float) -> float:
        return ml + (v - x0) / (x1 - x0) * (w - ml - mr)

    def py(v: float) -> float:
        return h - mb - (v - y0) / (y1 - y0) * (h - mt - mb)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" '
        f'viewBox="0 0 {w} {h}" font-family="monospace" font-size="11">',
        f'<rect width="{w}" height="{h}" fill="white"/>',
        f'<rect x="{ml}" y="{mt}" width="{w - ml - mr}" height="{h - mt - mb}" '
        'fill="none" stroke="black"/>',
    ]
    for k in range(math.ceil(x0), math.floor(x1) + 1):
        parts.append(f'<line x1="{px(k):.2f}" y1="{h - mb}" x2="{px(k):.2f}" '
                     f'y2="{h - mb + 5}" stroke="black"/>')
        parts.append(f'<text x="{px(k):.2f}" y="{h - mb + 18}" '
                     f'text-anchor="middle">1e{k}</text>')
    for k in range(math.ceil(y0), math.floor(y1) + 1):
        parts.append(f'<line x1="{ml - 5}" y1="{py(k):.2f}" x2="{ml}" '
                     f'y2="{py(k):.2f}" stroke="black"/>')
        parts.append(f'<text x="{ml - 8}" y="{py(k):.2f}" text-anchor="end" '
                     f'dominant-baseline="middle">1e{k}</text>')
    pts = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(lx, ly))
    parts.append(f'<polyline points="{pts}" fill="none" stroke="steelblue" '
                 'stroke-width="1.5"/>')
    if fit is not None:
        fy0 = math.log10(fit.amplitude) - fit.exponent * x0
        fy1 = math.log10(fit.amplitude) - fit.exponent * x1
        parts.append(f'<line x1="{px(x0):.2f}" y1="{py(fy0):.2f}" '
                     f'x2="{px(x1):.2f}" y2="{py(fy1):.2f}" '
                     'stroke="crimson" stroke-dasharray="6 3"/>')
        parts.append(f'<text x="{w - mr - 4}" y="{mt + 14}" text-anchor="end" '
                     f'fill="crimson">slope -{fit.exponent:.4g}</text>')
    parts.append(f'<text x="{(ml + w - mr) / 2:.0f}" y="{h - 10}" '
                 f'text-anchor="middle">{xlabel}</text>')
    parts.append(f'<text x="14" y="{(mt + h - mb) / 2:.0f}" text-anchor="middle" '
                 f'transform="rotate(-90 14 {(mt + h - mb) / 2:.0f})">{ylabel}</text>')
    if title:
        parts.append(f'<text x="{(ml + w - mr) / 2:.0f}" y="18" '
                     f'text-anchor="middle">{title}</text>')
    parts.append("</svg>")
    Path(path).write_text("\n".join(parts) + "\n")
