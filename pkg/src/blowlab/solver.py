"""Explicit Euler integration of the coupled system and its reductions.

The step size is the smaller of the diffusive limit safety*h^2/(2n) and an
adaptive reaction limit that caps the relative per-step growth of the tracked
sup functionals at reaction_cap.  The cap is enforced a posteriori: a trial
step whose functional growth exceeds the cap is redone with half the step, so
on any recorded series the per-step growth bound holds by construction (up to
a 1e-12 float slack).

Three drivers share the machinery:

  run_to_blowup    the coupled system itself
  run_scalar       the single-equation reduction p1 = p2, q1 = q2, u0 = v0;
                   its step-size logic mirrors the symmetric system bit for
                   bit, so the two agree to round-off on symmetric data
  transform_oracle the q = 2 cross-check w_t = lap w + (1+w)*log^p(1+w) with
                   w0 = exp(u0) - 1, whose log(1+w) must track the direct run
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .grid import FieldState, RadialGrid, gradient_magnitude, initial_state, radial_laplacian
from .model import (
    BOUNDARY_DIRICHLET,
    BOUNDARY_NEUMANN,
    DOMAIN_TRUNCATED,
    Exponents,
    ParameterError,
    SystemParams,
    compute_exponents,
)

STOP_THRESHOLD = "threshold"
STOP_TMAX = "t_max"
STOP_NONFINITE = "nonfinite"
STOP_CONTAMINATED = "truncation_contaminated"
STOP_OVERFLOW = "overflow_guard"

# negative values beyond -NEG_TOL*sup are a scheme fault, smaller ones are
# round-off and get clamped
NEG_TOL = 1e-13
# boundary-adjacent contamination threshold for truncated-space runs
CONTAMINATION_TOL = 1e-6
# transformed variable w is stopped near exp(700) to stay clear of overflow
OVERFLOW_GUARD = 1e290
# relative slack on the enforced growth cap, absorbs float rounding
CAP_SLACK = 1e-12

MAX_HALVINGS = 60


class IntegrationFault(RuntimeError):
    """The scheme produced a state it never should (CFL/positivity bug)."""


class _NonFinite(Exception):
    """Internal signal: the trial state stopped being finite."""


@dataclass(frozen=True)
class SolverConfig:
    safety: float = 0.4
    reaction_cap: float = 0.05
    m_stop: float = 1e8
    t_max: float = 10.0
    record_every: int = 50

    def __post_init__(self) -> None:
        if not 0.0 < self.safety < 1.0:
            raise ParameterError(f"safety must lie in (0, 1) (got {self.safety})")
        if not 0.0 < self.reaction_cap < 1.0:
            raise ParameterError(f"reaction_cap must lie in (0, 1) (got {self.reaction_cap})")
        if not self.m_stop > 0.0:
            raise ParameterError(f"m_stop must be > 0 (got {self.m_stop})")
        if not self.t_max > 0.0:
            raise ParameterError(f"t_max must be > 0 (got {self.t_max})")
        if not (isinstance(self.record_every, int) and self.record_every >= 1):
            raise ParameterError(f"record_every must be an integer >= 1 (got {self.record_every!r})")


@dataclass
class SupNormSeries:
    """Per-step scalar history.  M_u and M_v are running sups of the
    functionals u + |grad u|^theta1 and v + |grad v|^theta2; the rest are
    instantaneous."""

    t: np.ndarray
    M_u: np.ndarray
    M_v: np.ndarray
    max_u: np.ndarray
    max_v: np.ndarray
    max_grad_u: np.ndarray
    max_grad_v: np.ndarray
    argmax_r_u: np.ndarray

    COLUMNS = ("t", "M_u", "M_v", "max_u", "max_v", "max_grad_u", "max_grad_v", "argmax_r_u")

    def as_matrix(self) -> np.ndarray:
        return np.column_stack([getattr(self, c) for c in self.COLUMNS])

    @classmethod
    def from_matrix(cls, m: np.ndarray) -> "SupNormSeries":
        return cls(*(np.ascontiguousarray(m[:, j]) for j in range(len(cls.COLUMNS))))

    def __len__(self) -> int:
        return len(self.t)


@dataclass
class RunResult:
    series: SupNormSeries
    snapshots: list[FieldState]
    stop_reason: str
    steps_taken: int


class _SeriesBuffer:
    """Growable (n, 8) record buffer, amortized append."""

    def __init__(self, ncols: int = 8, capacity: int = 4096):
        self._data = np.empty((capacity, ncols))
        self._n = 0

    def append(self, row: tuple) -> None:
        if self._n == self._data.shape[0]:
            grown = np.empty((2 * self._data.shape[0], self._data.shape[1]))
            grown[: self._n] = self._data
            self._data = grown
        self._data[self._n] = row
        self._n += 1

    def to_series(self) -> SupNormSeries:
        return SupNormSeries.from_matrix(self._data[: self._n].copy())


class _Recorder:
    """Series rows every step; snapshots at t=0, every record_every steps,
    at every doubling of M_u, and at the final state."""

    def __init__(self, record_every: int, m_u_initial: float):
        self.buf = _SeriesBuffer()
        self.snapshots: list[FieldState] = []
        self.record_every = record_every
        self.next_level = 2.0 * m_u_initial if m_u_initial > 0.0 else math.inf
        self._last_snap_step = -1

    def snap(self, step_idx: int, t: float, u: np.ndarray, v: np.ndarray) -> None:
        if step_idx == self._last_snap_step:
            return
        self.snapshots.append(FieldState(t, u.copy(), v if v is u else v.copy()))
        self._last_snap_step = step_idx

    def on_step(self, step_idx: int, t: float, row: tuple, m_u_run: float,
                u: np.ndarray, v: np.ndarray) -> None:
        self.buf.append(row)
        if m_u_run >= self.next_level:
            self.snap(step_idx, t, u, v)
            while m_u_run >= self.next_level:
                self.next_level *= 2.0
        elif step_idx % self.record_every == 0:
            self.snap(step_idx, t, u, v)


def _pos_max(a: np.ndarray) -> float:
    m = float(a.max())
    return m if m > 0.0 else 0.0


class _System:
    """One-step advancement of the coupled system, holding the current state
    together with its gradients and functionals so nothing is computed twice."""

    def __init__(self, params: SystemParams, exps: Exponents, grid: RadialGrid,
                 state: FieldState, cfg: SolverConfig):
        self.params, self.exps, self.grid, self.cfg = params, exps, grid, cfg
        self.h = grid.h
        self.neumann = params.boundary == BOUNDARY_NEUMANN
        self.dt_cfl = cfg.safety * self.h**2 / (2.0 * params.n)
        self.t = state.t
        self.u = np.array(state.u, dtype=float)
        self.v = np.array(state.v, dtype=float)
        self._refresh_derived()

    def _gradient(self, f: np.ndarray) -> np.ndarray:
        g = gradient_magnitude(self.grid, f)
        if self.neumann:
            g[-1] = 0.0
        return g

    def _laplacian(self, f: np.ndarray) -> np.ndarray:
        lap = radial_laplacian(self.grid, f, self.params.n)
        if self.neumann:
            lap[-1] = 2.0 * (f[-2] - f[-1]) / self.h**2
        return lap

    def _refresh_derived(self) -> None:
        self.gu = self._gradient(self.u)
        self.gv = self._gradient(self.v)
        self.max_u = float(self.u.max())
        self.max_v = float(self.v.max())
        self.m_u = float(np.max(self.u + self.gu**self.exps.theta1))
        self.m_v = float(np.max(self.v + self.gv**self.exps.theta2))

    def advance(self, t_limit: float) -> float:
        """One accepted Euler step; returns the dt used."""
        p, e, cfg = self.params, self.exps, self.cfg
        rhs_u = self._laplacian(self.u)
        rhs_u += self.gu**p.q1
        rhs_u += self.v**p.p1
        rhs_v = self._laplacian(self.v)
        rhs_v += self.gv**p.q2
        rhs_v += self.u**p.p2
        if not self.neumann:
            rhs_u[-1] = 0.0
            rhs_v[-1] = 0.0

        dt = self.dt_cfl
        s = self.max_u + self.max_v
        s_dot = _pos_max(rhs_u) + _pos_max(rhs_v)
        if not math.isfinite(s_dot):
            raise _NonFinite
        if s_dot > 0.0 and s > 0.0:
            dt = min(dt, cfg.reaction_cap * s / s_dot)
        dt = min(dt, t_limit - self.t)

        cap = (1.0 + cfg.reaction_cap) * (1.0 + CAP_SLACK)
        for _ in range(MAX_HALVINGS):
            u_new = self.u + dt * rhs_u
            v_new = self.v + dt * rhs_v
            new_max_u = float(u_new.max())
            new_max_v = float(v_new.max())
            if not (math.isfinite(new_max_u) and math.isfinite(new_max_v)):
                raise _NonFinite
            low = min(float(u_new.min()), float(v_new.min()))
            if low < 0.0:
                if low < -NEG_TOL * max(new_max_u, new_max_v, 1e-300):
                    raise IntegrationFault(
                        f"negativity {low:.3e} beyond round-off at t = {self.t:.6g}"
                    )
                np.maximum(u_new, 0.0, out=u_new)
                np.maximum(v_new, 0.0, out=v_new)
            gu_new = self._gradient(u_new)
            gv_new = self._gradient(v_new)
            m_u_new = float(np.max(u_new + gu_new**e.theta1))
            m_v_new = float(np.max(v_new + gv_new**e.theta2))
            if not (math.isfinite(m_u_new) and math.isfinite(m_v_new)):
                raise _NonFinite
            ok_u = self.m_u <= 0.0 or m_u_new <= cap * self.m_u
            ok_v = self.m_v <= 0.0 or m_v_new <= cap * self.m_v
            if ok_u and ok_v:
                break
            dt *= 0.5
        else:
            raise IntegrationFault(f"growth cap unreachable after {MAX_HALVINGS} halvings")

        self.t += dt
        self.u, self.v = u_new, v_new
        self.gu, self.gv = gu_new, gv_new
        self.max_u, self.max_v = new_max_u, new_max_v
        self.m_u, self.m_v = m_u_new, m_v_new
        return dt

    def row(self, m_u_run: float, m_v_run: float) -> tuple:
        i = int(np.argmax(self.u))
        return (self.t, m_u_run, m_v_run, self.max_u, self.max_v,
                float(self.gu.max()), float(self.gv.max()), i * self.h)


def step(params: SystemParams, grid: RadialGrid, state: FieldState,
         cfg: SolverConfig, exps: Exponents | None = None) -> tuple[FieldState, float]:
    """Advance one explicit Euler step.  Returns (new state, dt used)."""
    if exps is None:
        exps = compute_exponents(params.p1, params.p2, params.q1, params.q2)
    sysl = _System(params, exps, grid, state, cfg)
    dt = sysl.advance(t_limit=math.inf)
    return FieldState(sysl.t, sysl.u, sysl.v), dt


def run_to_blowup(params: SystemParams, grid: RadialGrid, cfg: SolverConfig,
                  exps: Exponents | None = None,
                  state: FieldState | None = None) -> RunResult:
    """Integrate until max(M_u, M_v) reaches m_stop or another stop fires."""
    if exps is None:
        exps = compute_exponents(params.p1, params.p2, params.q1, params.q2)
    if state is None:
        state = initial_state(params, grid)
    sysl = _System(params, exps, grid, state, cfg)
    monitor_contamination = (
        params.domain_kind == DOMAIN_TRUNCATED and params.boundary == BOUNDARY_DIRICHLET
    )

    m_u_run, m_v_run = sysl.m_u, sysl.m_v
    rec = _Recorder(cfg.record_every, m_u_run)
    rec.buf.append(sysl.row(m_u_run, m_v_run))
    rec.snap(0, sysl.t, sysl.u, sysl.v)

    steps = 0
    reason = STOP_TMAX
    while True:
        if max(m_u_run, m_v_run) >= cfg.m_stop:
            reason = STOP_THRESHOLD
            break
        if sysl.t >= cfg.t_max:
            reason = STOP_TMAX
            break
        if monitor_contamination and (
            sysl.u[-2] > CONTAMINATION_TOL * sysl.max_u
            or sysl.v[-2] > CONTAMINATION_TOL * sysl.max_v
        ):
            reason = STOP_CONTAMINATED
            break
        try:
            sysl.advance(t_limit=cfg.t_max)
        except _NonFinite:
            reason = STOP_NONFINITE
            break
        steps += 1
        m_u_run = max(m_u_run, sysl.m_u)
        m_v_run = max(m_v_run, sysl.m_v)
        rec.on_step(steps, sysl.t, sysl.row(m_u_run, m_v_run), m_u_run, sysl.u, sysl.v)

    rec.snap(steps, sysl.t, sysl.u, sysl.v)
    return RunResult(rec.buf.to_series(), rec.snapshots, reason, steps)


class _Scalar:
    """Single-equation twin of _System: u_t = lap u + |grad u|^q + u^p.

    The step-size rule is written as the symmetric system's rule evaluated on
    two identical components, so on symmetric data run_scalar and
    run_to_blowup take bitwise identical steps.
    """

    def __init__(self, p: float, q: float, theta: float, n: int, boundary: str,
                 grid: RadialGrid, u0: np.ndarray, t0: float, cfg: SolverConfig):
        self.p, self.q, self.theta, self.n = p, q, theta, n
        self.grid, self.cfg = grid, cfg
        self.h = grid.h
        self.neumann = boundary == BOUNDARY_NEUMANN
        self.dt_cfl = cfg.safety * self.h**2 / (2.0 * n)
        self.t = t0
        self.u = np.array(u0, dtype=float)
        self.gu = self._gradient(self.u)
        self.max_u = float(self.u.max())
        self.m_u = float(np.max(self.u + self.gu**theta))

    def _gradient(self, f: np.ndarray) -> np.ndarray:
        g = gradient_magnitude(self.grid, f)
        if self.neumann:
            g[-1] = 0.0
        return g

    def advance(self, t_limit: float) -> float:
        cfg = self.cfg
        rhs = radial_laplacian(self.grid, self.u, self.n)
        if self.neumann:
            rhs[-1] = 2.0 * (self.u[-2] - self.u[-1]) / self.h**2
        rhs += self.gu**self.q
        rhs += self.u**self.p
        if not self.neumann:
            rhs[-1] = 0.0

        dt = self.dt_cfl
        s = self.max_u + self.max_u
        s_dot = _pos_max(rhs) + _pos_max(rhs)
        if not math.isfinite(s_dot):
            raise _NonFinite
        if s_dot > 0.0 and s > 0.0:
            dt = min(dt, cfg.reaction_cap * s / s_dot)
        dt = min(dt, t_limit - self.t)

        cap = (1.0 + cfg.reaction_cap) * (1.0 + CAP_SLACK)
        for _ in range(MAX_HALVINGS):
            u_new = self.u + dt * rhs
            new_max = float(u_new.max())
            if not math.isfinite(new_max):
                raise _NonFinite
            low = float(u_new.min())
            if low < 0.0:
                if low < -NEG_TOL * max(new_max, 1e-300):
                    raise IntegrationFault(
                        f"negativity {low:.3e} beyond round-off at t = {self.t:.6g}"
                    )
                np.maximum(u_new, 0.0, out=u_new)
            gu_new = self._gradient(u_new)
            m_new = float(np.max(u_new + gu_new**self.theta))
            if not math.isfinite(m_new):
                raise _NonFinite
            if self.m_u <= 0.0 or m_new <= cap * self.m_u:
                break
            dt *= 0.5
        else:
            raise IntegrationFault(f"growth cap unreachable after {MAX_HALVINGS} halvings")

        self.t += dt
        self.u, self.gu = u_new, gu_new
        self.max_u, self.m_u = new_max, m_new
        return dt

    def row(self, m_run: float) -> tuple:
        i = int(np.argmax(self.u))
        g = float(self.gu.max())
        return (self.t, m_run, m_run, self.max_u, self.max_u, g, g, i * self.h)


def run_scalar(params: SystemParams, grid: RadialGrid, cfg: SolverConfig,
               state: FieldState | None = None) -> RunResult:
    """Integrate the scalar reduction.  Requires a symmetric parameter set;
    the v channels of the result mirror the u channels."""
    if not params.symmetric:
        raise ParameterError("run_scalar needs p1 = p2, q1 = q2 and identical amplitudes")
    exps = compute_exponents(params.p1, params.p2, params.q1, params.q2)
    if state is None:
        state = initial_state(params, grid)
    sc = _Scalar(params.p1, params.q1, exps.theta1, params.n, params.boundary,
                 grid, state.u, state.t, cfg)
    monitor_contamination = (
        params.domain_kind == DOMAIN_TRUNCATED and params.boundary == BOUNDARY_DIRICHLET
    )

    m_run = sc.m_u
    rec = _Recorder(cfg.record_every, m_run)
    rec.buf.append(sc.row(m_run))
    rec.snap(0, sc.t, sc.u, sc.u)

    steps = 0
    reason = STOP_TMAX
    while True:
        if m_run >= cfg.m_stop:
            reason = STOP_THRESHOLD
            break
        if sc.t >= cfg.t_max:
            reason = STOP_TMAX
            break
        if monitor_contamination and sc.u[-2] > CONTAMINATION_TOL * sc.max_u:
            reason = STOP_CONTAMINATED
            break
        try:
            sc.advance(t_limit=cfg.t_max)
        except _NonFinite:
            reason = STOP_NONFINITE
            break
        steps += 1
        m_run = max(m_run, sc.m_u)
        rec.on_step(steps, sc.t, sc.row(m_run), m_run, sc.u, sc.u)

    rec.snap(steps, sc.t, sc.u, sc.u)
    return RunResult(rec.buf.to_series(), rec.snapshots, reason, steps)


def transform_oracle(p: float, grid: RadialGrid, cfg: SolverConfig,
                     u0: np.ndarray, n: int = 1) -> RunResult:
    """Integrate w_t = lap w + (1+w)*log^p(1+w) with w0 = exp(u0) - 1.

    This is the exponential substitution for the scalar q = 2 equation: its
    log(1+w) solves u_t = lap u + |grad u|^2 + u^p with the same data, which
    is what the snapshots expose (u channel log1p(w), v channel w itself).
    The series and m_stop act on the log1p(w) functional with the scalar
    gradient power 2/(p+1); w is stopped near exp(700) regardless.
    """
    if not p > 1.0:
        raise ParameterError(f"p must lie in (1, inf) (got {p})")
    theta = 2.0 / (p + 1.0)
    h = grid.h
    dt_cfl = cfg.safety * h**2 / (2.0 * n)

    w = np.expm1(np.array(u0, dtype=float))
    w[-1] = 0.0
    t = 0.0
    ubar = np.log1p(w)
    g = gradient_magnitude(grid, ubar)
    m_run = float(np.max(ubar + g**theta))
    max_w = float(w.max())

    rec = _Recorder(cfg.record_every, m_run)

    def record_row(m_run: float) -> tuple:
        i = int(np.argmax(ubar))
        gm = float(g.max())
        return (t, m_run, m_run, float(ubar.max()), float(ubar.max()), gm, gm, i * h)

    rec.buf.append(record_row(m_run))
    rec.snap(0, t, ubar, w)

    steps = 0
    reason = STOP_TMAX
    cap = (1.0 + cfg.reaction_cap) * (1.0 + CAP_SLACK)
    while True:
        if m_run >= cfg.m_stop:
            reason = STOP_THRESHOLD
            break
        if max_w >= OVERFLOW_GUARD:
            reason = STOP_OVERFLOW
            break
        if t >= cfg.t_max:
            reason = STOP_TMAX
            break

        rhs = radial_laplacian(grid, w, n)
        lw = np.log1p(w)
        rhs += (1.0 + w) * lw**p
        rhs[-1] = 0.0
        dt = dt_cfl
        s_dot = _pos_max(rhs)
        if not math.isfinite(s_dot):
            reason = STOP_NONFINITE
            break
        if s_dot > 0.0 and max_w > 0.0:
            dt = min(dt, cfg.reaction_cap * max_w / s_dot)
        dt = min(dt, cfg.t_max - t)

        nonfinite = False
        for _ in range(MAX_HALVINGS):
            w_new = w + dt * rhs
            new_max = float(w_new.max())
            if not math.isfinite(new_max):
                nonfinite = True
                break
            low = float(w_new.min())
            if low < 0.0:
                if low < -NEG_TOL * max(new_max, 1e-300):
                    raise IntegrationFault(
                        f"negativity {low:.3e} beyond round-off at t = {t:.6g}"
                    )
                np.maximum(w_new, 0.0, out=w_new)
            if max_w <= 0.0 or new_max <= cap * max_w:
                break
            dt *= 0.5
        else:
            raise IntegrationFault(f"growth cap unreachable after {MAX_HALVINGS} halvings")
        if nonfinite:
            reason = STOP_NONFINITE
            break

        t += dt
        w = w_new
        max_w = new_max
        steps += 1
        ubar = np.log1p(w)
        g = gradient_magnitude(grid, ubar)
        m_run = max(m_run, float(np.max(ubar + g**theta)))
        rec.on_step(steps, t, record_row(m_run), m_run, ubar, w)

    rec.snap(steps, t, ubar, w)
    return RunResult(rec.buf.to_series(), rec.snapshots, reason, steps)


def compare_with_transform(direct: RunResult, transformed: RunResult,
                           u_cap: float = 6.0) -> float:
    """Sup over space and time of |u - log(1+w)| while both stay below u_cap.

    The transformed run's snapshots carry log(1+w) in their u channel; the
    direct run is sampled at those times by linear interpolation between its
    own snapshots.
    """
    dts = [s.t for s in direct.snapshots]
    worst = 0.0
    compared = 0
    for snap in transformed.snapshots:
        if snap.t > dts[-1]:
            break
        if float(snap.u.max()) > u_cap:
            continue
        k = np.searchsorted(dts, snap.t)
        if k == 0:
            u_dir = direct.snapshots[0].u
        else:
            a, b = direct.snapshots[k - 1], direct.snapshots[min(k, len(dts) - 1)]
            if b.t == a.t:
                u_dir = a.u
            else:
                lam = (snap.t - a.t) / (b.t - a.t)
                u_dir = (1.0 - lam) * a.u + lam * b.u
        if float(u_dir.max()) > u_cap:
            continue
        worst = max(worst, float(np.max(np.abs(u_dir - snap.u))))
        compared += 1
    if compared == 0:
        raise ParameterError("no comparable snapshots below the u cap")
    return worst
