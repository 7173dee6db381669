"""Discrete operators: exactness classes, convergence order, functionals."""

import math

import numpy as np
import pytest

from blowlab import (
    FieldState,
    InitSpec,
    ParameterError,
    RadialGrid,
    SystemParams,
    gradient_magnitude,
    initial_state,
    radial_laplacian,
    sup_functional,
)

# 65 nodes make h = 1/64, so r_i and all quadratic differences are exact
# dyadics and the stencils cancel without rounding noise
DYADIC = RadialGrid(65, 1.0)


def test_laplacian_exact_on_quadratics():
    f = 3.0 - 2.0 * DYADIC.r**2
    for n in (1, 2, 3, 5):
        lap = radial_laplacian(DYADIC, f, n)
        assert np.max(np.abs(lap[:-1] - (-4.0 * n))) <= 1e-12
        assert lap[-1] == 0.0  # boundary node is owned by the caller


def test_laplacian_exact_on_constants_and_origin_rule():
    f = np.full(DYADIC.n_nodes, 7.5)
    for n in (1, 3):
        assert np.max(np.abs(radial_laplacian(DYADIC, f, n))) == 0.0
    # origin rule 2n(f1-f0)/h^2 on r^2 gives exactly 2n
    g = DYADIC.r**2
    for n in (1, 2, 3):
        assert radial_laplacian(DYADIC, g, n)[0] == pytest.approx(2.0 * n, abs=1e-12)


def test_laplacian_quartic_reference_value():
    # continuum operator on r^4 in n = 3: 12 r^2 + 8 r^2 = 20 r^2, so 5 at r = 1/2
    errs = []
    for nn in (65, 129, 257):
        grid = RadialGrid(nn, 1.0)
        lap = radial_laplacian(grid, grid.r**4, 3)
        errs.append(abs(lap[(nn - 1) // 2] - 5.0))
    assert errs[2] <= 1e-3
    order = math.log2(errs[0] / errs[2]) / 2.0
    assert order >= 1.9


def test_mms_spatial_order():
    # manufactured profile cos(k r): the operator value is
    # -k^2 cos(k r) - (n-1) k^2 sinc(k r / pi), smooth through the origin
    k = math.pi / 2.0
    for n in (1, 3):
        errs = []
        for nn in (33, 65, 129):
            grid = RadialGrid(nn, 1.0)
            r = grid.r
            f = np.cos(k * r)
            exact = -(k**2) * f - (n - 1) * k**2 * np.sinc(k * r / np.pi)
            lap = radial_laplacian(grid, f, n)
            errs.append(float(np.max(np.abs(lap[:-1] - exact[:-1]))))
        order = math.log2(errs[1] / errs[2])
        assert order >= 1.9, (n, errs)


def test_gradient_exact_on_quadratics():
    f = 0.25 + 1.5 * DYADIC.r**2
    g = gradient_magnitude(DYADIC, f)
    assert g[0] == 0.0
    assert np.max(np.abs(g[1:] - 3.0 * DYADIC.r[1:])) <= 1e-13


def test_gradient_is_a_magnitude():
    g = gradient_magnitude(DYADIC, np.exp(-DYADIC.r))
    assert np.all(g[1:] > 0.0)


def test_sup_functional_closed_form_peak():
    # u = 1 - r^2 with theta = 1/2: the profile u + sqrt(|u'|) is
    # 1 - r^2 + sqrt(2 r), stationary where 2 r = 1, max 7/4 at r = 1/2
    grid = RadialGrid(2001, 1.0)
    u = 1.0 - grid.r**2
    m_u, m_v = sup_functional(grid, u, u, 0.5, 0.5)
    assert m_u == m_v
    assert abs(m_u - 1.75) <= 1e-12
    f = u + gradient_magnitude(grid, u) ** 0.5
    assert abs(grid.r[int(np.argmax(f))] - 0.5) <= grid.h


def test_sup_functional_separates_components():
    grid = RadialGrid(101, 1.0)
    u = 2.0 * np.exp(-(grid.r**2))
    v = np.cos(math.pi * grid.r / 2.0)
    m_u, m_v = sup_functional(grid, u, v, 0.5, 0.7)
    gu = gradient_magnitude(grid, u)
    gv = gradient_magnitude(grid, v)
    assert m_u == float(np.max(u + gu**0.5))
    assert m_v == float(np.max(v + gv**0.7))


def test_grid_validation():
    with pytest.raises(ParameterError, match="integer >= 3"):
        RadialGrid(2, 1.0)
    with pytest.raises(ParameterError, match="radius"):
        RadialGrid(11, 0.0)
    g = RadialGrid(11, 2.0)
    assert g.h == pytest.approx(0.2)
    assert g.r[0] == 0.0 and g.r[-1] == pytest.approx(2.0)


def test_initial_state_pins_dirichlet_endpoint():
    params = SystemParams(p1=2.0, p2=3.0, q1=1.2, q2=1.1)
    state = initial_state(params, RadialGrid(101, 1.0))
    assert state.u[-1] == 0.0 and state.v[-1] == 0.0
    assert state.u[0] == params.init.amplitude_u


def test_initial_state_rejects_grid_mismatch():
    params = SystemParams(p1=2.0, p2=3.0, q1=1.2, q2=1.1)
    with pytest.raises(ParameterError, match="does not match"):
        initial_state(params, RadialGrid(101, 2.0))


def test_truncation_negligibility_guard():
    wide = SystemParams(
        p1=2.0, p2=2.0, q1=1.2, q2=1.2,
        domain_kind="truncated-space", radius=1.0, boundary="dirichlet",
        init=InitSpec(width=0.5),
    )
    with pytest.raises(ParameterError, match="not negligible at the truncation"):
        initial_state(wide, RadialGrid(101, 1.0))
    narrow = SystemParams(
        p1=2.0, p2=2.0, q1=1.2, q2=1.2,
        domain_kind="truncated-space", radius=1.0, boundary="dirichlet",
        init=InitSpec(width=0.15),
    )
    state = initial_state(narrow, RadialGrid(101, 1.0))
    assert state.u[-2] <= 1e-12 * state.u.max()


def test_field_validation():
    bad = FieldState(0.0, np.array([1.0, -2.0, 0.0]), np.zeros(3))
    with pytest.raises(ParameterError, match="negative"):
        bad.validate("dirichlet")
    nonzero_edge = FieldState(0.0, np.array([1.0, 0.5, 0.1]), np.zeros(3))
    with pytest.raises(ParameterError, match="vanish at the boundary"):
        nonzero_edge.validate("dirichlet")
    nonzero_edge.validate("neumann")  # fine without the pin
