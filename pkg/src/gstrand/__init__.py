"""Strand PDE toolkit: SO(3) spin-chain/chiral models, peakon dynamics,
Lax-pair residual monitors, closed-form reference solutions, and a
deterministic method-of-lines simulation harness."""

from .algebra import (
    DiagonalParams,
    ad,
    ad_star_so3,
    build_J,
    embed_so4,
    extract_so4,
    hat,
    pairing,
    unhat,
)
from .analytic_solutions import (
    CollisionSample,
    CollisionSolution,
    PotentialReport,
    WaveProfile,
    collision_F,
    collision_F_inverse,
    collision_exact,
    potentials_resolve,
    profile_from_descriptor,
    single_peakon_exact,
)
from .errors import (
    BlowUpError,
    ConditioningError,
    ConfigError,
    SimulationError,
    SingularConfigurationError,
)
from .integrability import (
    CurvatureResidual,
    DriftReport,
    LaxConnection,
    aniso_lax,
    chiral_lax,
    invariant_drift,
    zero_curvature_residual,
)
from .peakon_dynamics import (
    K0,
    FieldSample,
    PeakonState,
    kernel,
    kernel_deriv,
    kernel_matrix,
    peakon_rhs,
    reconstruct_fields,
    s_constraint_residual,
)
from .sim_harness import (
    RunReport,
    ScenarioConfig,
    convergence_study,
    list_scenarios,
    rk4_step,
    run_scenario,
)
from .so3_dynamics import (
    So3StrandState,
    SpinChainParams,
    XYState,
    aniso_rhs_XY,
    aniso_rhs_uv,
    chiral_rhs,
    compatibility_residual,
    from_XY,
    lie_poisson_rhs_spin_chain,
    spin_chain_rhs,
    to_XY,
)
from .stencil import DerivativeStencil, second_derivative

__version__ = "0.1.0"

__all__ = [
    "BlowUpError",
    "CollisionSample",
    "CollisionSolution",
    "ConditioningError",
    "ConfigError",
    "CurvatureResidual",
    "DerivativeStencil",
    "DiagonalParams",
    "DriftReport",
    "FieldSample",
    "K0",
    "LaxConnection",
    "PeakonState",
    "PotentialReport",
    "RunReport",
    "ScenarioConfig",
    "SimulationError",
    "SingularConfigurationError",
    "So3StrandState",
    "SpinChainParams",
    "WaveProfile",
    "XYState",
    "ad",
    "ad_star_so3",
    "aniso_lax",
    "aniso_rhs_XY",
    "aniso_rhs_uv",
    "build_J",
    "chiral_lax",
    "chiral_rhs",
    "collision_F",
    "collision_F_inverse",
    "collision_exact",
    "compatibility_residual",
    "convergence_study",
    "embed_so4",
    "extract_so4",
    "from_XY",
    "hat",
    "invariant_drift",
    "kernel",
    "kernel_deriv",
    "kernel_matrix",
    "lie_poisson_rhs_spin_chain",
    "list_scenarios",
    "pairing",
    "peakon_rhs",
    "potentials_resolve",
    "profile_from_descriptor",
    "reconstruct_fields",
    "rk4_step",
    "run_scenario",
    "s_constraint_residual",
    "second_derivative",
    "single_peakon_exact",
    "spin_chain_rhs",
    "to_XY",
    "unhat",
    "zero_curvature_residual",
]
