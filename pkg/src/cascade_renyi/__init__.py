"""Gaussian Renyi-2 correlations of a nondegenerate three-level cascade laser."""
from .errors import DriftUnstable, InvalidParams, MalformedCM, NonConvergence
from .gaussian import (
    StandardFormCM,
    SymplecticDiagnostics,
    canonicalize,
    diagnostics,
    is_physical,
    ppt_symplectic_eigenvalue,
    renyi2_entropy,
    symplectic_eigenvalues,
)
from .laser import (
    ETA_EPS,
    AtomicState,
    LaserParams,
    MomentState,
    build_covariance,
    drift_stability,
    gain_coefficient,
    integrate_to_steady_state,
    moment_derivatives,
    steady_state,
    steady_state_closed_form,
    steady_state_linear_solve,
)
from .measures import (
    CorrelationReport,
    classical_correlations,
    correlation_report,
    discord,
    discord_asymmetry,
    entanglement_renyi2,
    measurement_infimum,
    mutual_information,
)
from .sweep import PRESETS, FigurePreset, SweepSpec, compute_point, run_figure, run_sweep

__version__ = "0.1.0"
