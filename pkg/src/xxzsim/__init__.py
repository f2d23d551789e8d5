"""Trajectory-ensemble simulator for spin-excitation transport in an XXZ
chain subject to stochastic collision (dephasing) noise with Weibull-renewal
waiting times."""

__version__ = "0.1.0"

from .basis import SectorBasis, build_sector
from .model import ModelParams, SpectralHamiltonian, build_hamiltonian, propagate
from .noise import (
    CollisionSchedule,
    NoiseConfig,
    WeibullParams,
    collision_rate,
    init_schedule,
    params_for_rate,
    pop_next,
    sample_interval,
)
from .dynamics import (
    TrajectoryConfig,
    TrajectoryResult,
    apply_collision,
    boundary_stop_time,
    initial_state,
    run_trajectory,
)
from .observables import (
    ObservableRecord,
    fft_difference_spectrum,
    ier,
    ipr,
    local_magnetization,
    spread_width,
)
from .ensemble import EnsembleConfig, EnsembleSeries, compare_runs, run_ensemble

__all__ = [
    "SectorBasis",
    "build_sector",
    "ModelParams",
    "SpectralHamiltonian",
    "build_hamiltonian",
    "propagate",
    "WeibullParams",
    "NoiseConfig",
    "CollisionSchedule",
    "sample_interval",
    "collision_rate",
    "params_for_rate",
    "init_schedule",
    "pop_next",
    "TrajectoryConfig",
    "TrajectoryResult",
    "initial_state",
    "apply_collision",
    "run_trajectory",
    "boundary_stop_time",
    "ObservableRecord",
    "local_magnetization",
    "ipr",
    "ier",
    "spread_width",
    "fft_difference_spectrum",
    "EnsembleConfig",
    "EnsembleSeries",
    "run_ensemble",
    "compare_runs",
]
