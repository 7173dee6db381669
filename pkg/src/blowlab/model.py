"""Parameters and exponent algebra for the coupled system

    u_t = lap u + |grad u|^q1 + v^p1
    v_t = lap v + |grad v|^q2 + u^p2

on a ball with homogeneous Dirichlet data, or on a truncated whole space.
Admissible ranges are p1, p2 in (1, inf) and q1, q2 in (1, 2].  Every scale
exponent used by the rate estimates downstream is derived here and nowhere
else, so the identities they satisfy can be tested in one place.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

DOMAIN_BALL = "ball"
DOMAIN_TRUNCATED = "truncated-space"
BOUNDARY_DIRICHLET = "dirichlet"
BOUNDARY_NEUMANN = "neumann"

INIT_GAUSSIAN = "gaussian"
INIT_COSINE = "cosine_bump"
INIT_CONSTANT = "constant"


class ParameterError(ValueError):
    """A parameter violates one of the admissibility constraints."""


@dataclass(frozen=True)
class InitSpec:
    """Radially nonincreasing initial profile, shared shape for u and v.

    kind is one of "gaussian", "cosine_bump", "constant".  The gaussian is
    amplitude*exp(-(r/width)^2); under a Dirichlet boundary it is shifted and
    renormalized so it vanishes at the boundary exactly while keeping its peak
    amplitude.  The cosine bump is amplitude*cos^2(pi*r/(2*width)) inside
    r < width and zero outside, so it vanishes at the boundary by itself.
    Constant data is only meaningful with a Neumann boundary (it reduces the
    dynamics to the reaction ODE and exists for oracle runs).
    """

    kind: str = INIT_GAUSSIAN
    amplitude_u: float = 20.0
    amplitude_v: float = 20.0
    width: float = 0.3

    def __post_init__(self) -> None:
        if self.kind not in (INIT_GAUSSIAN, INIT_COSINE, INIT_CONSTANT):
            raise ParameterError(
                f"init kind must be one of gaussian, cosine_bump, constant (got {self.kind!r})"
            )
        if not (self.amplitude_u >= 0.0 and math.isfinite(self.amplitude_u)):
            raise ParameterError(f"amplitude_u must be finite and >= 0 (got {self.amplitude_u})")
        if not (self.amplitude_v >= 0.0 and math.isfinite(self.amplitude_v)):
            raise ParameterError(f"amplitude_v must be finite and >= 0 (got {self.amplitude_v})")
        if self.kind != INIT_CONSTANT and not (self.width > 0.0 and math.isfinite(self.width)):
            raise ParameterError(f"width must be finite and > 0 (got {self.width})")

    def sample(self, r: np.ndarray, radius: float, boundary: str) -> tuple[np.ndarray, np.ndarray]:
        """Evaluate the (u0, v0) profiles on the radii ``r``."""
        if self.kind == INIT_CONSTANT:
            shape = np.ones_like(r)
        elif self.kind == INIT_GAUSSIAN:
            shape = np.exp(-((r / self.width) ** 2))
            if boundary == BOUNDARY_DIRICHLET:
                # shift/renormalize so the profile is exactly 0 at r = radius
                # and exactly 1 at r = 0
                edge = math.exp(-((radius / self.width) ** 2))
                shape = (shape - edge) / (1.0 - edge)
                np.maximum(shape, 0.0, out=shape)
        else:  # cosine bump, compactly supported in r < width
            shape = np.where(
                r < self.width,
                np.cos(np.pi * r / (2.0 * self.width)) ** 2,
                0.0,
            )
        return self.amplitude_u * shape, self.amplitude_v * shape


@dataclass(frozen=True)
class SystemParams:
    """Complete problem description: exponents, domain, boundary, data."""

    p1: float
    p2: float
    q1: float
    q2: float
    n: int = 1
    domain_kind: str = DOMAIN_BALL
    radius: float = 1.0
    boundary: str = BOUNDARY_DIRICHLET
    init: InitSpec = field(default_factory=InitSpec)

    def __post_init__(self) -> None:
        if not (self.p1 > 1.0 and math.isfinite(self.p1)):
            raise ParameterError(f"p1 must lie in (1, inf) (got {self.p1})")
        if not (self.p2 > 1.0 and math.isfinite(self.p2)):
            raise ParameterError(f"p2 must lie in (1, inf) (got {self.p2})")
        if not 1.0 < self.q1 <= 2.0:
            raise ParameterError(f"q1 must lie in (1, 2] (got {self.q1})")
        if not 1.0 < self.q2 <= 2.0:
            raise ParameterError(f"q2 must lie in (1, 2] (got {self.q2})")
        if not (isinstance(self.n, int) and self.n >= 1):
            raise ParameterError(f"n must be an integer >= 1 (got {self.n!r})")
        if self.domain_kind not in (DOMAIN_BALL, DOMAIN_TRUNCATED):
            raise ParameterError(
                f"domain kind must be 'ball' or 'truncated-space' (got {self.domain_kind!r})"
            )
        if not (self.radius > 0.0 and math.isfinite(self.radius)):
            raise ParameterError(f"radius must be finite and > 0 (got {self.radius})")
        if self.boundary not in (BOUNDARY_DIRICHLET, BOUNDARY_NEUMANN):
            raise ParameterError(
                f"boundary must be 'dirichlet' or 'neumann' (got {self.boundary!r})"
            )
        if self.boundary == BOUNDARY_NEUMANN and self.domain_kind != DOMAIN_TRUNCATED:
            raise ParameterError("boundary 'neumann' is permitted only with domain 'truncated-space'")
        if self.init.kind == INIT_CONSTANT and self.boundary != BOUNDARY_NEUMANN:
            raise ParameterError("init 'constant' is permitted only with boundary 'neumann'")
        if (
            self.init.kind == INIT_COSINE
            and self.boundary == BOUNDARY_DIRICHLET
            and self.init.width > self.radius
        ):
            raise ParameterError(
                "cosine_bump width must not exceed the domain radius under a dirichlet boundary "
                f"(width {self.init.width} > radius {self.radius})"
            )

    @property
    def symmetric(self) -> bool:
        """True when the two components obey identical equations and data."""
        return (
            self.p1 == self.p2
            and self.q1 == self.q2
            and self.init.amplitude_u == self.init.amplitude_v
        )


@dataclass(frozen=True)
class Exponents:
    """Scale exponents derived from (p1, p2, q1, q2).

    alpha, beta    rate exponents of the u and v sup-functionals
    theta1, theta2 gradient powers entering those functionals
    mu1, mu2       leftover powers of the frame scale multiplying the
                   gradient terms after rescaling; positive iff the
                   gradient-power ceiling holds
    q1_bound,      the ceilings (2*alpha+2)/(2*alpha+1) and
    q2_bound       (2*beta+2)/(2*beta+1) that q1, q2 must stay below
    """

    alpha: float
    beta: float
    theta1: float
    theta2: float
    mu1: float
    mu2: float
    q1_bound: float
    q2_bound: float


def compute_exponents(p1: float, p2: float, q1: float, q2: float) -> Exponents:
    """Derive all scale exponents from the reaction and gradient powers.

    The expression trees are arranged so that swapping (p1, q1) with (p2, q2)
    swaps (alpha, theta1, mu1, q1_bound) with (beta, theta2, mu2, q2_bound)
    bit for bit.
    """
    if not p1 * p2 > 1.0:
        raise ParameterError(f"p1*p2 must exceed 1 (got p1*p2 = {p1 * p2})")
    pp = p1 * p2
    alpha = (p1 + 1.0) / (pp - 1.0)
    beta = (p2 + 1.0) / (pp - 1.0)
    theta1 = 2.0 * (p1 + 1.0) / (pp + 2.0 * p1 + 1.0)
    theta2 = 2.0 * (p2 + 1.0) / (pp + 2.0 * p2 + 1.0)
    mu1 = 2.0 * alpha + 2.0 - (2.0 * alpha + 1.0) * q1
    mu2 = 2.0 * beta + 2.0 - (2.0 * beta + 1.0) * q2
    q1_bound = (2.0 * alpha + 2.0) / (2.0 * alpha + 1.0)
    q2_bound = (2.0 * beta + 2.0) / (2.0 * beta + 1.0)
    return Exponents(alpha, beta, theta1, theta2, mu1, mu2, q1_bound, q2_bound)


@dataclass(frozen=True)
class HypothesisReport:
    """Booleans and signed margins for the blow-up rate hypotheses.

    cond_fujita is the non-strict supercriticality condition
    max(alpha, beta) >= n/2; cond_q are the strict gradient-power ceilings
    q1 < q1_bound and q2 < q2_bound.  Margins are positive exactly when the
    corresponding condition holds with room to spare; equality cases of the
    strict conditions report False with zero margin.
    """

    cond_fujita: bool
    cond_q: bool
    margin_fujita: float
    margin_q1: float
    margin_q2: float

    @property
    def all_hold(self) -> bool:
        return self.cond_fujita and self.cond_q


def check_theorem_hypotheses(
    p1: float, p2: float, q1: float, q2: float, n: int
) -> HypothesisReport:
    """Evaluate the rate-theory hypotheses with exact comparisons."""
    exps = compute_exponents(p1, p2, q1, q2)
    top = max(exps.alpha, exps.beta)
    cond_fujita = top >= n / 2.0
    cond_q = (q1 < exps.q1_bound) and (q2 < exps.q2_bound)
    return HypothesisReport(
        cond_fujita=cond_fujita,
        cond_q=cond_q,
        margin_fujita=top - n / 2.0,
        margin_q1=exps.q1_bound - q1,
        margin_q2=exps.q2_bound - q2,
    )
