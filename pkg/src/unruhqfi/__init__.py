"""Quantum Fisher information of an accelerated qubit-qutrit pair under phase-flip noise."""

from .channels import (
    KrausSet,
    apply_channel,
    build_final_state,
    coherence_factor,
    qubit_phase_kraus,
    qutrit_phase_kraus,
)
from .errors import (
    DegeneracyUnresolved,
    DimensionMismatch,
    DomainError,
    InvalidChannel,
    NoConvergence,
    NotHermitian,
    NotTwoDimensional,
    OutOfRange,
    QfiError,
    SweepDegraded,
)
from .numerics import Spectrum, frobenius_distance, hermitian_eigendecompose, validate_density
from .params import ChannelScenario, EstimationTarget, ModelParams
from .qfi import QfiResult, finite_diff_drho, qfi_for_params, qfi_sld, qfi_three_term
from .states import (
    acceleration_to_rindler,
    analytic_drho,
    build_accelerated_state,
    build_initial_state,
    rho_coefficients,
)
from .sweep import Axis, FrozenRegion, GridSpec, SweepResult, detect_frozen_regions, export_csv, export_heatmap, run_sweep

__version__ = "0.1.0"
