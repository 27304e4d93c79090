"""Chronotaxic oscillator toolkit.

Simulation, contraction analysis, steady-state continuation, verification,
and signal analysis for the driven Poincare oscillator — a nonautonomous
system whose time-dependent point attractor sits inside a contraction
region.
"""

from .contraction import (
    ContractionMap,
    contraction_map,
    full_eigs,
    global_contraction_threshold,
    jacobian_analytic,
    linear_system_report,
    sym_eigs,
    sym_eigs_radial,
)
from .errors import (
    BlowUpError,
    ChronotaxError,
    ConfigError,
    InvalidInputError,
    NotChronotaxicError,
    SingularityError,
    TraceFailureError,
)
from .integrate import (
    NoiseSpec,
    Trajectory,
    cocycle_check,
    integrate_det,
    integrate_sde,
    pullback,
    time_grid,
)
from .model import (
    CartesianState,
    DriveSchedule,
    as_schedule,
    FrozenParams,
    OscillatorParams,
    PolarState,
    Schedule,
    field_lab,
    field_rotating,
    load_params,
    params_from_dict,
    params_to_dict,
    save_params,
    to_cartesian,
    to_polar,
)
from .signal import (
    Ridge,
    Scalogram,
    SlipEvent,
    count_slips,
    cwt,
    morlet_fourier,
    morlet_freq_grid,
    ridge,
)
from .steady_state import (
    BifurcationResult,
    ChronotaxicClass,
    FixedPoint,
    GammaCurve,
    PointKind,
    RegionMap,
    attractor_track,
    classify,
    continuation_sweep,
    find_fixed_points,
    frozen_at,
    gamma_exists_structural,
    region_map,
    trace_gamma,
)
from .verify import (
    TrappingCandidate,
    VerificationReport,
    offending_intervals,
    select_trapping_radius,
    verify_attraction,
    verify_invariance,
    verify_schedule,
    verify_trapping,
)

__version__ = "0.1.0"

__all__ = [
    "BifurcationResult",
    "BlowUpError",
    "CartesianState",
    "ChronotaxError",
    "ChronotaxicClass",
    "ConfigError",
    "ContractionMap",
    "DriveSchedule",
    "FixedPoint",
    "FrozenParams",
    "GammaCurve",
    "InvalidInputError",
    "NoiseSpec",
    "NotChronotaxicError",
    "OscillatorParams",
    "PointKind",
    "PolarState",
    "RegionMap",
    "Ridge",
    "Scalogram",
    "Schedule",
    "SingularityError",
    "SlipEvent",
    "TraceFailureError",
    "Trajectory",
    "TrappingCandidate",
    "VerificationReport",
    "as_schedule",
    "attractor_track",
    "classify",
    "cocycle_check",
    "continuation_sweep",
    "contraction_map",
    "count_slips",
    "cwt",
    "field_lab",
    "field_rotating",
    "find_fixed_points",
    "frozen_at",
    "full_eigs",
    "gamma_exists_structural",
    "global_contraction_threshold",
    "integrate_det",
    "integrate_sde",
    "jacobian_analytic",
    "linear_system_report",
    "load_params",
    "morlet_fourier",
    "morlet_freq_grid",
    "offending_intervals",
    "params_from_dict",
    "params_to_dict",
    "pullback",
    "region_map",
    "ridge",
    "save_params",
    "select_trapping_radius",
    "sym_eigs",
    "sym_eigs_radial",
    "time_grid",
    "to_cartesian",
    "to_polar",
    "trace_gamma",
    "verify_attraction",
    "verify_invariance",
    "verify_schedule",
    "verify_trapping",
]
