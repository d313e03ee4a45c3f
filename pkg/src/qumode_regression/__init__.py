"""Desk-scale simulator of hybrid qubit-qumode regularized regression.

The package is layered so every quantum claim can be checked against a
cheaper reference:

``ridge``     classical SVD ridge regression — the exact oracle.
``spectral``  singular-basis model of the algorithm (one coefficient
              per singular triple, closed-form branch amplitudes).
``circuit``   dense two-qubit-register × two-qumode grid simulation.
``trotter``   copy-consuming Trotterized coupling with group-commutator
              synthesized rotations, tracked as a branch ensemble.
``analysis``  closed-form fidelity/acceptance figures and fitted
              scaling experiments.
``pipeline``  end-to-end runs of each mode, sharing one readout and
              calibration path.
``cli``       ``qumode-regress`` command-line harness.
"""

from .analysis import (
    FidelityParams,
    PowerLawFit,
    ScalingResult,
    ShrinkageEntry,
    db_to_squeezing,
    fidelity_ceiling,
    fidelity_closed_form,
    fidelity_numeric,
    fit_power_law,
    shrinkage_profile,
    success_scaling_experiment,
)
from .circuit import (
    LEAKAGE_TOL,
    HomodyneResult,
    HybridState,
    apply_ideal_qpe,
    apply_regularization,
    basis_change,
    homodyne_postselect,
    interference_overlap,
    prepare_initial,
    quantum_add,
    swap_test,
)
from .config import MODES, SimConfig, apply_overrides, load_config, parse_config_text
from .data import Dataset, QueryPoint, load_dataset, load_query, pad_to_pow2
from .encoder import EncoderCircuit, amplitude_encoder_4x2
from .errors import ConfigError, DataError, SimulationError
from .grid import QumodeGrid, make_grid
from .pipeline import data_density, encoded_phase_coefficient, run_pipeline
from .results import RunResult, result_to_json, save_result, write_sweep_csv
from .ridge import (
    CalibrationResult,
    RidgeSolution,
    SvdModel,
    calibrate_scale,
    ridge_predict,
    ridge_solve,
    svd_decompose,
)
from .spectral import (
    SpectralState,
    SqueezeParams,
    amplitude_weight_B,
    apply_algorithm_map,
    dominant_window_state,
    encode_schmidt,
    inverse_map_alignment,
    spectral_predict,
    success_probability,
    transform_coefficients,
    window_lattice,
    windowed_map_density,
)
from .trotter import (
    HybridEnsemble,
    TrotterPlan,
    attach_interaction_registers,
    commutator_gate,
    ensemble_homodyne_postselect,
    trotter_exp_swap_step,
)

__version__ = "0.1.0"

__all__ = [
    "CalibrationResult",
    "ConfigError",
    "DataError",
    "Dataset",
    "EncoderCircuit",
    "FidelityParams",
    "HomodyneResult",
    "HybridEnsemble",
    "HybridState",
    "LEAKAGE_TOL",
    "MODES",
    "PowerLawFit",
    "QueryPoint",
    "QumodeGrid",
    "RidgeSolution",
    "RunResult",
    "ScalingResult",
    "ShrinkageEntry",
    "SimConfig",
    "SimulationError",
    "SpectralState",
    "SqueezeParams",
    "SvdModel",
    "TrotterPlan",
    "amplitude_encoder_4x2",
    "amplitude_weight_B",
    "apply_algorithm_map",
    "apply_ideal_qpe",
    "apply_overrides",
    "apply_regularization",
    "attach_interaction_registers",
    "basis_change",
    "calibrate_scale",
    "commutator_gate",
    "data_density",
    "db_to_squeezing",
    "dominant_window_state",
    "encode_schmidt",
    "encoded_phase_coefficient",
    "ensemble_homodyne_postselect",
    "fidelity_ceiling",
    "fidelity_closed_form",
    "fidelity_numeric",
    "fit_power_law",
    "homodyne_postselect",
    "interference_overlap",
    "inverse_map_alignment",
    "load_config",
    "load_dataset",
    "load_query",
    "make_grid",
    "pad_to_pow2",
    "parse_config_text",
    "prepare_initial",
    "quantum_add",
    "result_to_json",
    "ridge_predict",
    "ridge_solve",
    "run_pipeline",
    "save_result",
    "shrinkage_profile",
    "spectral_predict",
    "success_probability",
    "success_scaling_experiment",
    "svd_decompose",
    "swap_test",
    "transform_coefficients",
    "trotter_exp_swap_step",
    "window_lattice",
    "windowed_map_density",
    "write_sweep_csv",
]
