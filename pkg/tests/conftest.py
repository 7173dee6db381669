import numpy as np
import pytest

from blowlab import (
    InitSpec,
    RadialGrid,
    SolverConfig,
    SystemParams,
    compute_exponents,
    run_to_blowup,
)
from blowlab.model import INIT_GAUSSIAN


@pytest.fixture(scope="session")
def deep201():
    """A compact coupled run driven deep enough that both blow-up time
    estimators sit in the asymptotic regime.  Shared by the analysis tests."""
    params = SystemParams(p1=2.0, p2=3.0, q1=1.2, q2=1.2, n=1,
                          init=InitSpec(kind=INIT_GAUSSIAN))
    grid = RadialGrid(201, 1.0)
    cfg = SolverConfig(m_stop=1e10, t_max=1.0, record_every=10)
    exps = compute_exponents(2.0, 3.0, 1.2, 1.2)
    result = run_to_blowup(params, grid, cfg, exps)
    assert result.stop_reason == "threshold"
    return params, grid, cfg, exps, result
