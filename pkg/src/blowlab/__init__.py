"""Numerical laboratory for finite-time blow-up in a cross-coupled pair of
reaction-diffusion equations with gradient forcing:

    u_t = lap u + |grad u|^q1 + v^p1
    v_t = lap v + |grad v|^q2 + u^p2

on radial domains.  The package integrates the system to blow-up, estimates
the blow-up time two independent ways, fits the rate exponents of the sup
functionals M_u and M_v, measures doubling times, renormalizes the solution
into the self-similar frame, and classifies the blow-up set.
"""

__version__ = "0.1.0"

from .analysis import (
    FIT_CHANNELS,
    AnalysisError,
    BlowupTimeEstimate,
    DoublingReport,
    RateFit,
    RatioTrace,
    RescaledFrame,
    RescaledResidual,
    WidthTrace,
    blowup_set_width,
    build_rescaled_frame,
    classify_blowup_set,
    doubling_analysis,
    estimate_blowup_time,
    fit_rate,
    frame_functional,
    gradient_channel_spread,
    half_level_width,
    invert_frame,
    ratio_trace,
    rescaled_residual,
)
from .grid import (
    FieldState,
    RadialGrid,
    gradient_magnitude,
    initial_state,
    radial_laplacian,
    sup_functional,
)
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
    Exponents,
    HypothesisReport,
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
    SupNormSeries,
    compare_with_transform,
    run_scalar,
    run_to_blowup,
    step,
    transform_oracle,
)

__all__ = [
    "AnalysisError",
    "FIT_CHANNELS",
    "BlowupTimeEstimate",
    "ConfigError",
    "DoublingReport",
    "Exponents",
    "FieldState",
    "HypothesisReport",
    "InitSpec",
    "IntegrationFault",
    "ParameterError",
    "RadialGrid",
    "RateFit",
    "RatioTrace",
    "RescaledFrame",
    "RescaledResidual",
    "ResolvedConfig",
    "RunResult",
    "SolverConfig",
    "SupNormSeries",
    "SystemParams",
    "WidthTrace",
    "blowup_set_width",
    "build_manifest",
    "build_rescaled_frame",
    "check_theorem_hypotheses",
    "classify_blowup_set",
    "compare_with_transform",
    "compute_exponents",
    "doubling_analysis",
    "emit_doubling_csv",
    "emit_fit_csv",
    "emit_series_csv",
    "emit_snapshots_csv",
    "emit_svg",
    "estimate_blowup_time",
    "fit_rate",
    "frame_functional",
    "gradient_channel_spread",
    "gradient_magnitude",
    "half_level_width",
    "initial_state",
    "invert_frame",
    "parse_config",
    "radial_laplacian",
    "ratio_trace",
    "read_manifest",
    "read_series_csv",
    "read_snapshots_csv",
    "rescaled_residual",
    "resolve_config",
    "run_scalar",
    "run_to_blowup",
    "step",
    "sup_functional",
    "transform_oracle",
    "write_manifest",
]
