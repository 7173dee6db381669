"""Estimators and verification built on recorded runs.

Nothing here integrates anything: every function consumes a recorded series
or snapshot list and reduces it to the quantities the rate theory speaks
about (blow-up time, rate exponents, doubling structure, the rescaled frame
and its equation residual, blow-up set widths).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from .grid import RadialGrid, gradient_magnitude
from .model import Exponents, SystemParams
from .solver import RunResult, SupNormSeries

log = logging.getLogger(__name__)

# the two blow-up time estimators must agree to this fraction of the
# remaining-time scale, otherwise the series is not trustworthy
ESTIMATOR_AGREEMENT = 0.05
# a frame whose best recorded functional value falls below half the sup is
# accepted down to this fraction, with a warning
CENTER_RELAXED = 0.45


class AnalysisError(ValueError):
    """A series does not support the requested reduction."""


# ---------------------------------------------------------------------------
# doubling times

def _doubling_times(t: np.ndarray, m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Times at which the running sup first reaches base*2^k, k = 1, 2, ...

    Located on the piecewise-linear interpolant of log m against t, which is
    monotone because m is a running sup.  Returns (times, levels).
    """
    if m[0] <= 0.0:
        raise AnalysisError("doubling analysis needs a positive initial sup")
    if np.any(np.diff(m) < 0.0):
        raise AnalysisError("M_u series is not nondecreasing")
    n_levels = int(math.floor(math.log2(m[-1] / m[0])))
    if n_levels < 1:
        return np.empty(0), np.empty(0)
    levels = m[0] * 2.0 ** np.arange(1, n_levels + 1)
    logm = np.log(m)
    times = np.empty(n_levels)
    for j, lev in enumerate(levels):
        k = int(np.searchsorted(m, lev, side="left"))
        if k == 0:
            times[j] = t[0]
        elif m[k] == m[k - 1]:
            times[j] = t[k]
        else:
            lam = (math.log(lev) - logm[k - 1]) / (logm[k] - logm[k - 1])
            times[j] = t[k - 1] + lam * (t[k] - t[k - 1])
    return times, levels


# ---------------------------------------------------------------------------
# blow-up time

@dataclass(frozen=True)
class BlowupTimeEstimate:
    """Primary estimate with its independent cross-check.

    T_est is the affine extrapolation of M_u^(-1/alpha) to zero over the last
    clean decade of M_u (the top half-decade is dropped as potentially
    contaminated by the stop).  T_geometric resums the doubling increments as
    the geometric series with ratio 2^(-1/alpha).
    """

    T_est: float
    T_geometric: float
    discrepancy: float
    t_last_doubling: float


def estimate_blowup_time(series: SupNormSeries, alpha: float) -> BlowupTimeEstimate:
    """Estimate the blow-up time from a recorded series.

    Raises AnalysisError when there are fewer than 4 doublings, too few
    points in the extrapolation decade, or the two estimators disagree by
    more than 5% of the remaining-time scale (T_est - t_last_doubling).
    """
    t, m = series.t, series.M_u
    if len(t) < 16:
        raise AnalysisError(f"series too short to extrapolate ({len(t)} points)")
    m_top = m[-1]
    if not m_top > 0.0:
        raise AnalysisError("M_u never became positive")
    lo, hi = m_top * 10.0**-1.5, m_top * 10.0**-0.5
    mask = (m >= lo) & (m <= hi)
    if int(mask.sum()) < 8:
        raise AnalysisError(
            f"only {int(mask.sum())} points in the extrapolation decade (need >= 8)"
        )
    y = m[mask] ** (-1.0 / alpha)
    slope, intercept = np.polyfit(t[mask], y, 1)
    if not slope < 0.0:
        raise AnalysisError("M_u^(-1/alpha) is not decreasing over the extrapolation decade")
    t_primary = -intercept / slope

    times, _ = _doubling_times(t, m)
    if len(times) < 4:
        raise AnalysisError(f"need at least 4 doublings of M_u (got {len(times)})")
    rho = 2.0 ** (-1.0 / alpha)
    delta = times[-1] - times[-2]
    t_geo = times[-1] + delta * rho / (1.0 - rho)

    disc = abs(t_primary - t_geo)
    scale = t_primary - times[-1]
    if not scale > 0.0:
        raise AnalysisError("primary estimate does not lie beyond the last doubling")
    if disc > ESTIMATOR_AGREEMENT * scale:
        raise AnalysisError(
            f"blow-up time estimators disagree: affine {t_primary:.9g} vs "
            f"geometric {t_geo:.9g} (|diff| = {disc:.3g} > 5% of {scale:.3g})"
        )
    return BlowupTimeEstimate(t_primary, t_geo, disc, float(times[-1]))


# ---------------------------------------------------------------------------
# rate fits

FIT_CHANNELS = ("M_u", "M_v", "max_u", "max_v", "max_grad_u^theta", "max_grad_v^theta")


@dataclass(frozen=True)
class RateFit:
    channel: str
    T_est: float
    exponent: float
    amplitude: float
    rms_residual: float
    window: tuple[float, float]
    points_used: int
    predicted_exponent: float = math.nan


def _channel_values(series: SupNormSeries, channel: str,
                    exps: Exponents | None) -> tuple[np.ndarray, float]:
    if channel in ("M_u", "M_v", "max_u", "max_v"):
        y = getattr(series, channel)
        pred = math.nan
        if exps is not None:
            pred = exps.alpha if channel.endswith("_u") else exps.beta
        return y, pred
    if channel == "max_grad_u^theta":
        if exps is None:
            raise AnalysisError("gradient channels need the exponent set")
        return series.max_grad_u**exps.theta1, exps.alpha
    if channel == "max_grad_v^theta":
        if exps is None:
            raise AnalysisError("gradient channels need the exponent set")
        return series.max_grad_v**exps.theta2, exps.beta
    raise AnalysisError(f"unknown channel {channel!r} (choose from {FIT_CHANNELS})")


def fit_rate(series: SupNormSeries, T_est: float, channel: str,
             exps: Exponents | None = None,
             window: tuple[float, float] = (1e-3, 1e-1)) -> RateFit:
    """Least-squares slope of log10(channel) against log10(T_est - t).

    The window is in units of remaining time: points with
    window[0]*T_est <= T_est - t <= window[1]*T_est enter the fit.  The
    reported exponent is the negated slope, so a pure power law
    C*(T_est-t)^(-a) fits to exponent a and amplitude C.
    """
    lo, hi = window
    if not 0.0 < lo < hi:
        raise AnalysisError(f"window must satisfy 0 < lo < hi (got {window})")
    y, predicted = _channel_values(series, channel, exps)
    tau = T_est - series.t
    mask = (tau >= lo * T_est) & (tau <= hi * T_est) & (tau > 0.0) & (y > 0.0)
    used = int(mask.sum())
    if used < 8:
        raise AnalysisError(
            f"window [{lo:g}, {hi:g}]*T_est holds {used} usable points (need >= 8)"
        )
    x = np.log10(tau[mask])
    z = np.log10(y[mask])
    slope, intercept = np.polyfit(x, z, 1)
    rms = float(np.sqrt(np.mean((z - (slope * x + intercept)) ** 2)))
    return RateFit(
        channel=channel,
        T_est=T_est,
        exponent=float(-slope),
        amplitude=float(10.0**intercept),
        rms_residual=rms,
        window=(lo, hi),
        points_used=used,
        predicted_exponent=predicted,
    )


def gradient_channel_spread(series: SupNormSeries, T_est: float, exps: Exponents,
                            window: tuple[float, float] = (1e-3, 1e-1)) -> tuple[float, float]:
    """Boundedness measure of the compensated gradient channels.

    For each component, form the running max of |grad|_max^theta * (T_est-t)^rate
    over the fit window and return its largest factor of deviation from the
    window median.  Values near 1 mean the powered gradient tracks the
    predicted rate; the acceptance bar downstream is a factor of 3.
    """
    out = []
    for ch, rate in (("max_grad_u^theta", exps.alpha), ("max_grad_v^theta", exps.beta)):
        y, _ = _channel_values(series, ch, exps)
        tau = T_est - series.t
        mask = (tau >= window[0] * T_est) & (tau <= window[1] * T_est) & (y > 0.0)
        if int(mask.sum()) < 8:
            raise AnalysisError("too few points in the fit window for the gradient channel")
        prod = np.maximum.accumulate(y[mask] * tau[mask] ** rate)
        med = float(np.median(prod))
        out.append(max(float(prod.max()) / med, med / float(prod.min())))
    return out[0], out[1]


# ---------------------------------------------------------------------------
# doubling structure

@dataclass(frozen=True)
class DoublingReport:
    """Doubling times of M_u with the scale-invariant increments.

    D_j = M_u(t_j)^(1/alpha) * (t_{j+1} - t_j) is the doubling time measured
    in units of the frame time scale gamma^2 = M_u^(-1/alpha); the rate
    theory demands it stay bounded.  ratio_j is the raw increment ratio
    (t_{j+2}-t_{j+1})/(t_{j+1}-t_j), which a pure power law pins at
    2^(-1/alpha).
    """

    t_j: np.ndarray
    levels: np.ndarray
    D_j: np.ndarray
    ratio_j: np.ndarray
    sup_D: float


def doubling_analysis(series: SupNormSeries, alpha: float,
                      min_doublings: int = 5) -> DoublingReport:
    times, levels = _doubling_times(series.t, series.M_u)
    if len(times) < min_doublings:
        raise AnalysisError(
            f"need at least {min_doublings} doublings of M_u (got {len(times)})"
        )
    delta = np.diff(times)
    if np.any(delta <= 0.0):
        raise AnalysisError("doubling times are not strictly increasing")
    d_j = levels[:-1] ** (1.0 / alpha) * delta
    ratio = delta[1:] / delta[:-1]
    return DoublingReport(times, levels, d_j, ratio, float(d_j.max()))


# ---------------------------------------------------------------------------
# ratio of the two components

@dataclass(frozen=True)
class RatioTrace:
    t: np.ndarray
    phi: np.ndarray
    phi_min: float
    phi_max: float


def ratio_trace(series: SupNormSeries, alpha: float, beta: float) -> RatioTrace:
    """M_u^(-1/(2 alpha)) * M_v^(1/(2 beta)) over the second half of the run.

    The rate theory bounds this ratio away from 0 and infinity near blow-up;
    on symmetric runs it is identically 1.
    """
    t = series.t
    mask = t >= 0.5 * (t[0] + t[-1])
    mu, mv = series.M_u[mask], series.M_v[mask]
    if not (np.all(mu > 0.0) and np.all(mv > 0.0)):
        raise AnalysisError("sup functionals must be positive over the second half of the run")
    phi = mu ** (-1.0 / (2.0 * alpha)) * mv ** (1.0 / (2.0 * beta))
    return RatioTrace(t[mask], phi, float(phi.min()), float(phi.max()))


# ---------------------------------------------------------------------------
# rescaled frame

@dataclass(frozen=True)
class RescaledFrame:
    """The solution around its functional peak in self-similar variables.

    phi1[k, i] = gamma^(2 alpha) * u(x_star + gamma*y_i, t_star + gamma^2*s_k)
    and the beta twin for phi2.  s_levels are actual snapshot times mapped
    into frame time (no interpolation in t); the spatial profile is cubic
    interpolated.  s_range covers at most [-1, 0] with s = 0 at t_star.
    """

    gamma: float
    x_star: float
    t_star: float
    t0: float
    m0: float
    y: np.ndarray
    s_levels: np.ndarray
    phi1: np.ndarray
    phi2: np.ndarray
    relaxed_center: bool

    @property
    def s_range(self) -> tuple[float, float]:
        return float(self.s_levels[0]), float(self.s_levels[-1])

    @property
    def h_y(self) -> float:
        return float(self.y[1] - self.y[0])


def build_rescaled_frame(result: RunResult, grid: RadialGrid, exps: Exponents,
                         t0: float, K: float = 5.0, max_s_levels: int = 33,
                         max_y_nodes: int = 401) -> RescaledFrame:
    """Build the rescaled frame anchored at the running sup at time t0.

    The anchor (x_star, t_star) is the recorded space-time point with the
    largest u + |grad u|^theta1 among snapshots at or before t0; it must
    carry at least 45% of M_u(t0) (the nominal requirement is one half; the
    gap is snapshot stride, and acceptance between 45% and 50% is logged).
    """
    series = result.series
    t, m = series.t, series.M_u
    if not t[0] < t0 <= t[-1]:
        raise AnalysisError(f"t0 = {t0:g} outside the recorded range ({t[0]:g}, {t[-1]:g}]")
    m0 = float(np.exp(np.interp(t0, t, np.log(m))))
    if not m0 > 0.0:
        raise AnalysisError("M_u(t0) must be positive")
    gamma = m0 ** (-1.0 / (2.0 * exps.alpha))

    best_val, best_snap, best_node = -math.inf, -1, -1
    for k, snap in enumerate(result.snapshots):
        if snap.t > t0:
            break
        f = snap.u + gradient_magnitude(grid, snap.u) ** exps.theta1
        i = int(np.argmax(f))
        if f[i] > best_val:
            best_val, best_snap, best_node = float(f[i]), k, i
    if best_snap < 0:
        raise AnalysisError("no snapshots at or before t0")
    relaxed = False
    if best_val < CENTER_RELAXED * m0:
        raise AnalysisError(
            f"best recorded functional value {best_val:.6g} is below "
            f"{CENTER_RELAXED:g} * M_u(t0) = {CENTER_RELAXED * m0:.6g}; "
            "snapshot stride too coarse around the peak"
        )
    if best_val < 0.5 * m0:
        relaxed = True
        log.warning(
            "frame center carries %.4g of M_u(t0) (nominal 0.5, accepting >= %.2f)",
            best_val / m0, CENTER_RELAXED,
        )

    t_star = result.snapshots[best_snap].t
    r_star = best_node * grid.h
    if r_star + K * gamma > grid.radius:
        raise AnalysisError(
            f"frame of half-width {K:g}*gamma = {K * gamma:.4g} around x_star = "
            f"{r_star:.4g} exits the domain of radius {grid.radius:g} (t0 too early)"
        )

    g2 = gamma * gamma
    cand = [k for k, s in enumerate(result.snapshots)
            if t_star - g2 <= s.t <= t_star]
    if len(cand) > max_s_levels:
        sel = np.unique(np.round(np.linspace(0, len(cand) - 1, max_s_levels)).astype(int))
        cand = [cand[j] for j in sel]
    if cand[-1] != best_snap:
        cand.append(best_snap)

    n_y = int(round(K * gamma / grid.h))
    n_y = max(41, min(max_y_nodes, n_y))
    if n_y % 2 == 0:
        n_y += 1
    y = np.linspace(-K, K, n_y)
    radii = np.abs(r_star + gamma * y)

    r = grid.r
    su = gamma ** (2.0 * exps.alpha)
    sv = gamma ** (2.0 * exps.beta)
    phi1 = np.empty((len(cand), n_y))
    phi2 = np.empty((len(cand), n_y))
    s_levels = np.empty(len(cand))
    for j, k in enumerate(cand):
        snap = result.snapshots[k]
        s_levels[j] = (snap.t - t_star) / g2
        phi1[j] = su * CubicSpline(r, snap.u)(radii)
        phi2[j] = sv * CubicSpline(r, snap.v)(radii)

    return RescaledFrame(gamma, r_star, t_star, t0, m0, y, s_levels,
                         phi1, phi2, relaxed)


def frame_functional(frame: RescaledFrame, exps: Exponents) -> tuple[float, float]:
    """(sup over the frame, center value) of phi1 + |grad phi1|^theta1.

    The rate estimates pin the sup at 1 and the center at >= 1/2 up to
    discretization; gradients are taken on the frame's own y grid.
    """
    dphi = np.gradient(frame.phi1, frame.y, axis=1)
    f = frame.phi1 + np.abs(dphi) ** exps.theta1
    center = float(f[-1, len(frame.y) // 2])
    return float(f.max()), center


def invert_frame(frame: RescaledFrame, exps: Exponents,
                 r_nodes: np.ndarray) -> np.ndarray:
    """Map the s = 0 slice of phi1 back to u(r, t_star) on the given radii.

    Involution check: up to interpolation error this must reproduce the
    snapshot the frame was built from on the overlap.
    """
    y_of_r = (r_nodes - frame.x_star) / frame.gamma
    inside = (y_of_r >= frame.y[0]) & (y_of_r <= frame.y[-1])
    spline = CubicSpline(frame.y, frame.phi1[-1])
    out = np.full(len(r_nodes), np.nan)
    out[inside] = spline(y_of_r[inside]) * frame.gamma ** (-2.0 * exps.alpha)
    return out


@dataclass(frozen=True)
class RescaledResidual:
    """Max-norm equation residuals of a frame, with the weighted gradient
    terms' magnitudes and their share of the term budget."""

    res1: float
    res2: float
    grad1_max: float
    grad2_max: float
    grad1_share: float
    grad2_share: float


def rescaled_residual(frame: RescaledFrame, params: SystemParams,
                      exps: Exponents) -> RescaledResidual:
    """Finite-difference residual of the rescaled system on the frame.

    phi_s is a three-point nonuniform first difference across s levels,
    the Laplacian a central second difference in y (plus the (n-1)/rho
    drift off one dimension), so the residual is O(h_y^2 + ds) on smooth
    frames and vanishes as the underlying run is refined.
    """
    if len(frame.s_levels) < 3:
        raise AnalysisError(
            f"residual evaluation needs >= 3 time levels (got {len(frame.s_levels)})"
        )
    y, s = frame.y, frame.s_levels
    h_y = frame.h_y
    n = params.n
    rho = y + frame.x_star / frame.gamma

    def one(phi: np.ndarray, other: np.ndarray, q: float, mu: float,
            p: float) -> tuple[float, float, float]:
        phi_y = np.gradient(phi, y, axis=1)[:, 1:-1]
        phi_yy = (phi[:, 2:] - 2.0 * phi[:, 1:-1] + phi[:, :-2]) / h_y**2
        if n == 1:
            lap = phi_yy
        else:
            # the drift phi_y/rho is regular through rho = 0 (phi_y vanishes
            # there); replace it by its limit phi_yy on the node nearest 0
            rho_in = rho[1:-1]
            near0 = np.abs(rho_in) < 0.5 * h_y
            drift = np.where(near0, phi_yy, phi_y / np.where(near0, 1.0, rho_in))
            lap = phi_yy + (n - 1) * drift
        dm = s[1:-1] - s[:-2]
        dp = s[2:] - s[1:-1]
        w_m = (-dp / (dm * (dm + dp)))[:, None]
        w_0 = ((dp - dm) / (dm * dp))[:, None]
        w_p = (dm / (dp * (dm + dp)))[:, None]
        phi_s = w_m * phi[:-2, 1:-1] + w_0 * phi[1:-1, 1:-1] + w_p * phi[2:, 1:-1]

        grad_term = frame.gamma**mu * np.abs(phi_y[1:-1]) ** q
        react = other[1:-1, 1:-1] ** p
        resid = phi_s - lap[1:-1] - grad_term - react
        res = float(np.max(np.abs(resid)))
        g_max = float(grad_term.max())
        budget = (float(np.max(np.abs(phi_s))) + float(np.max(np.abs(lap[1:-1])))
                  + g_max + float(react.max()))
        return res, g_max, g_max / budget if budget > 0.0 else 0.0

    res1, g1, s1 = one(frame.phi1, frame.phi2, params.q1, exps.mu1, params.p1)
    res2, g2, s2 = one(frame.phi2, frame.phi1, params.q2, exps.mu2, params.p2)
    return RescaledResidual(res1, res2, g1, g2, s1, s2)


# ---------------------------------------------------------------------------
# blow-up set width

@dataclass(frozen=True)
class WidthTrace:
    t: np.ndarray
    width: np.ndarray
    max_u: np.ndarray


def half_level_width(r: np.ndarray, f: np.ndarray, theta: float = 0.5) -> float:
    """Outermost radius where f still reaches theta times its max, by linear
    interpolation between the bracketing nodes."""
    peak = float(f.max())
    if not peak > 0.0:
        raise AnalysisError("profile has no positive peak")
    level = theta * peak
    above = np.nonzero(f >= level)[0]
    i = int(above[-1])
    if i == len(r) - 1:
        return float(r[-1])
    # f[i] >= level > f[i+1]
    lam = (f[i] - level) / (f[i] - f[i + 1])
    return float(r[i] + lam * (r[i + 1] - r[i]))


def blowup_set_width(result: RunResult, grid: RadialGrid, theta: float = 0.5,
                     min_late: int = 4) -> WidthTrace:
    """Width of the set {u >= theta * max u} for each late snapshot.

    "Late" means the snapshot's max u is above the geometric midpoint of the
    initial and final maxima, i.e. the second half of the run's growth in
    log scale.
    """
    snaps = result.snapshots
    maxima = np.array([float(s.u.max()) for s in snaps])
    if not np.all(maxima > 0.0):
        raise AnalysisError("width analysis needs positive profiles")
    cut = math.sqrt(maxima[0] * maxima[-1])
    sel = [k for k in range(len(snaps)) if maxima[k] >= cut]
    if len(sel) < min_late:
        raise AnalysisError(f"too few late snapshots ({len(sel)} < {min_late})")
    r = grid.r
    t = np.array([snaps[k].t for k in sel])
    width = np.array([half_level_width(r, snaps[k].u, theta) for k in sel])
    return WidthTrace(t, width, maxima[sel])


def classify_blowup_set(trace: WidthTrace, radius: float) -> str:
    """Coarse trend label: single_point (final width under 0.2 R),
    global (width above 0.5 R throughout), else regional."""
    if trace.width[-1] < 0.2 * radius:
        return "single_point"
    if float(trace.width.min()) > 0.5 * radius:
        return "global"
    return "regional"
