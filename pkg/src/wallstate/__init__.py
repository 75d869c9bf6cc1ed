"""Quantum wall states: subsystem search, wall-state selection and stabilization."""

__version__ = "0.1.0"

from .linalg import (
    CoeffTensor,
    Dims,
    DimensionError,
    HermiticityError,
    Terms,
    decompose_hamiltonian,
    extract_terms,
    gellmann_basis,
    logical_purity,
    partial_trace,
    reconstruct,
    thermal_state,
)
from .frame import FrameProblem, FrameSearchConfig, FrameSolution, detect_perfect_wall, find_wall_frame
from .wall import OsdResult, WallContext, WallSearchConfig, find_wall_state, gamma1, gamma2, osd, osd_of
from .dynamics import Dissipation, Driving, Measurement, NoControl, Trajectory, evolve, time_to_threshold
from .decoupling import DdConfig, build_pulse_schedule, dd_cycle_ideal, evolve_dd
from .eternal import (
    BoundReport,
    analyze,
    asymptotic_eigenstates,
    check_eternal_condition,
    corollary_check,
    eternal_lower_bound,
    index_sets,
    purity_decomposition,
)
from .models import MODELS, ModelSpec, get_model
