"""Flux-pulse entangling-gate simulator for capacitively coupled fluxoniums."""

__version__ = "0.1.0"

from .coupled import (
    DressedLabels,
    TwoLevelModel,
    TwoQubitSystem,
    assemble,
    dressed_spectrum,
    dressed_sweep,
    find_level_crossing,
    static_zz,
    two_level_model,
)
from .errors import ConfigError, NoCrossingError, NumericalError, PhaseUndefinedError
from .evolution import (
    ChiMatrix,
    IntegratorOptions,
    LindbladChannel,
    PropagatorResult,
    TrajectoryPoint,
    chi_of_unitary,
    instantaneous_trajectory,
    process_tomography,
    propagate_lindblad,
    propagate_unitary,
)
from .fluxonium import (
    CircuitParams,
    OscillatorRep,
    TruncatedQubit,
    build_oscillator_rep,
    diagonalize_and_truncate,
    hamiltonian_at_flux,
    qubit_frequency,
)
from .metrics import (
    CalibratedGate,
    FidelityReport,
    IdealGateSpec,
    calibrate_z,
    coherent_fidelity,
    entangling_power,
    extract_zeta,
    gate_fidelity_from_chi,
    ideal_gate,
)
from .optimize import (
    NoiseLine,
    OptimizationSpec,
    ScanResult,
    noise_sensitivity,
    optimize_pulse,
    scan_2d,
    scan_detuning,
)
from .pipeline import GateReport, evaluate_gate
from .pulse import AdiabaticityReport, PulseParams, flux_at, sample, validate_adiabaticity

__all__ = [
    "AdiabaticityReport",
    "CalibratedGate",
    "ChiMatrix",
    "CircuitParams",
    "ConfigError",
    "DressedLabels",
    "FidelityReport",
    "GateReport",
    "IdealGateSpec",
    "IntegratorOptions",
    "LindbladChannel",
    "NoCrossingError",
    "NoiseLine",
    "NumericalError",
    "OptimizationSpec",
    "OscillatorRep",
    "PhaseUndefinedError",
    "PropagatorResult",
    "PulseParams",
    "ScanResult",
    "TrajectoryPoint",
    "TruncatedQubit",
    "TwoLevelModel",
    "TwoQubitSystem",
    "assemble",
    "build_oscillator_rep",
    "calibrate_z",
    "chi_of_unitary",
    "coherent_fidelity",
    "diagonalize_and_truncate",
    "dressed_spectrum",
    "dressed_sweep",
    "entangling_power",
    "evaluate_gate",
    "extract_zeta",
    "find_level_crossing",
    "flux_at",
    "gate_fidelity_from_chi",
    "hamiltonian_at_flux",
    "ideal_gate",
    "instantaneous_trajectory",
    "noise_sensitivity",
    "optimize_pulse",
    "process_tomography",
    "propagate_lindblad",
    "propagate_unitary",
    "qubit_frequency",
    "sample",
    "scan_2d",
    "scan_detuning",
    "static_zz",
    "two_level_model",
    "validate_adiabaticity",
]
