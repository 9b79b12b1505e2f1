"""Nonreciprocal transmission and photon blockade in flux-threaded Kerr networks."""

from .fockspace import TruncationPolicy, FockBasis, build_basis
from .model import (
    ModeSpec,
    CouplingSpec,
    DriveSpec,
    NetworkModel,
    build_hamiltonian,
    gauge_canonicalize,
    kerr_from_material,
    preset,
    validate_timescales,
    PRESETS,
)
from .dynamics import Liouvillian, SteadyState, build_liouvillian, steady_state, evolve
from .amplitudes import AmplitudeSolution, amplitude_oracle
from .observables import (
    PortPair,
    ObservableSet,
    transmission,
    g2_zero,
    nonreciprocity_summary,
    circulator_summary,
    solve,
    solve_observables,
)
from .effective import EffectiveModel, adiabatic_eliminate, effective_observables
from .sweep import SweepSpec, SweepResult, run_sweep, write_csv, default_sweep
from .config import parse_config, emit_config

__version__ = "0.1.0"
