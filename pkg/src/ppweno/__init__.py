"""Bound-preserving finite-difference WENO5 solver.

High-order interface fluxes are blended toward a first-order monotone flux
at the final Runge-Kutta stage, with per-face blending parameters chosen so
scalar solutions respect their initial bounds and gas-dynamics solutions
keep density and pressure above machine-level floors.
"""

from .cases import CaseSetup, build_case, case_descriptions
from .eos import (
    IdealGasEuler,
    PositivityViolationError,
    ReactiveEuler,
    ScalarLaw,
    SingularStateError,
    ThreeSpeciesGas,
    pressure_and_sound,
)
from .grid import BoundarySpec, ConfigError, EdgeBC, FieldGrid, apply_boundaries, corner_domain
from .harness import ConvergenceReport, RunResult, convergence_study, error_norms, run_case
from .integrator import (
    RK3,
    RK4,
    RkScheme,
    SolverContext,
    StageFluxAccumulator,
    StepRecord,
    TimeStepPolicy,
    compute_dt,
    rk_step,
)
from .limiter import (
    LimiterPolicy,
    PositivityFloors,
    PreconditionViolation,
    SolverAbort,
    combine_interface_theta,
    decouple_rectangle_1d,
    decouple_tesseract_2d,
    density_bounds,
    mpp_bounds_max,
    mpp_bounds_min,
    pressure_at_theta,
    scale_to_pressure_floor,
    source_factor,
)
from .weno import WenoConfig, characteristic_interface_flux, lxf_split, monotone_flux, weno5_face

__version__ = "0.1.0"
