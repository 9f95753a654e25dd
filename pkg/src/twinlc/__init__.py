"""twinlc: quantum twin-limit-cycle oscillator simulator.

Driven anharmonic oscillators with incoherent first/third-order gain and
second/fourth-order damping host two concentric limit cycles in a single
steady state.  The package builds the corresponding Lindblad generators,
solves steady states and dynamics, unravels quantum-jump trajectories,
evaluates phase-space and phase-distribution synchronization measures, and
carries the matching classical mean-field analysis.
"""

__version__ = "0.1.0"

from .errors import (
    ConfigError,
    EmptySectorError,
    NonConvergenceError,
    StiffnessError,
)
from .fock import (
    FockSpace,
    Operator,
    annihilation,
    creation,
    identity,
    number,
    sector_identity,
    tensor,
    truncated_lowering,
    unweighted_lowering,
    weighted_truncated_annihilation,
)
from .params import CoupledParams, OscillatorParams
from .states import (
    DensityMatrix,
    coherent_dm,
    coherent_ket,
    entropy,
    expect,
    fock_dm,
    fock_ket,
    ket_dm,
    ptrace,
    trace_distance,
)
from .liouvillian import Liouvillian, build_coupled, build_single, unvec, vec
from .evolve import (
    CorrelationSeries,
    SpectrumResult,
    check_cutoff_convergence,
    choose_cutoff,
    converged_steady_state,
    power_spectrum,
    propagate,
    sector_spectrum,
    spectral_gap,
    steady_state,
    two_time_correlation,
)
from .meanfield import (
    EffectivePotential,
    MeanFieldRadii,
    coupled_fixed_point,
    default_sector_boundary,
    perturbative_radii,
    phase_fixed_points,
    potential,
    radii,
    rates_from_radii,
    relative_phase_rhs,
    relative_phase_rhs_diff,
    relative_phase_rhs_same,
    rhs_coupled,
    rhs_single,
    single_fixed_point,
    standard_lc_phase,
    standard_lc_relative_phase,
)
from .measures import (
    PhaseDistribution,
    WignerField,
    joint_sector_weight,
    mutual_information,
    p1,
    p1_sector,
    p2,
    p2_sector,
    sync_strength,
    wigner,
    wigner_points,
    wigner_radial,
)
from .trajectories import (
    ResidenceStats,
    TrajectoryRecord,
    max_jump_rate,
    residence_stats,
    run_ensemble,
    run_trajectory,
    safe_dt,
)
from .sweep import (
    SweepResult,
    SweepRow,
    SweepSpec,
    bistable_window,
    blockade_scan,
    run_sweep,
)

__all__ = [
    "__version__",
    "ConfigError", "EmptySectorError", "NonConvergenceError", "StiffnessError",
    "FockSpace", "Operator", "annihilation", "creation", "identity", "number",
    "sector_identity", "tensor", "truncated_lowering", "unweighted_lowering",
    "weighted_truncated_annihilation",
    "CoupledParams", "OscillatorParams",
    "DensityMatrix", "coherent_dm", "coherent_ket", "entropy", "expect",
    "fock_dm", "fock_ket", "ket_dm", "ptrace", "trace_distance",
    "Liouvillian", "build_coupled", "build_single", "unvec", "vec",
    "CorrelationSeries", "SpectrumResult", "check_cutoff_convergence",
    "choose_cutoff", "converged_steady_state", "power_spectrum", "propagate",
    "sector_spectrum", "spectral_gap", "steady_state", "two_time_correlation",
    "EffectivePotential", "MeanFieldRadii", "coupled_fixed_point",
    "default_sector_boundary", "perturbative_radii", "phase_fixed_points",
    "potential", "radii", "rates_from_radii", "relative_phase_rhs",
    "relative_phase_rhs_diff", "relative_phase_rhs_same", "rhs_coupled",
    "rhs_single", "single_fixed_point", "standard_lc_phase",
    "standard_lc_relative_phase",
    "PhaseDistribution", "WignerField", "joint_sector_weight",
    "mutual_information", "p1", "p1_sector", "p2", "p2_sector",
    "sync_strength", "wigner", "wigner_points", "wigner_radial",
    "ResidenceStats", "TrajectoryRecord", "max_jump_rate", "residence_stats",
    "run_ensemble", "run_trajectory", "safe_dt",
    "SweepResult", "SweepRow", "SweepSpec", "bistable_window",
    "blockade_scan", "run_sweep",
]
