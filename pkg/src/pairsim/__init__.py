"""Simulation of pairing Hamiltonians on an always-on Ising quantum register."""

__version__ = "0.1.0"

from .adiabatic import (
    PreparationReport,
    RampSchedule,
    adiabatic_condition_check,
    adiabatic_evolve,
    prepare_adiabatic,
    prepare_basis_state,
    prepare_quasi_adiabatic,
)
from .errors import (
    CapExceededError,
    InsufficientPeaksError,
    PairsimError,
    UnreachableTargetError,
    UnsupportedModelError,
    ValidationError,
)
from .model import (
    PairingModel,
    block_dimension,
    block_hamiltonian,
    block_indices,
    build_h0,
    build_hi,
    build_hp,
    load_model,
    reduced_bcs_preset,
)
from .oracle import block_eigensystem, exact_gap, exact_propagator, full_eigensystem
from .pulses import (
    NmrMachine,
    PulseProgram,
    compile_trotter_step,
    default_machine,
    paper_step_count,
    program_unitary,
)
from .spectroscopy import estimate_gap, fid_signal, run_pipeline, spectrum, tilt_state
from .trotter import TrotterPlan, evolve, trotter_error, trotter_step
