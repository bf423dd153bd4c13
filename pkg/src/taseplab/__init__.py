"""Simulation and numerics lab for TASEP with site disorder.

Subpackages:
  disorder  - disorder laws, r and mu closed forms, seeded environments
  lpp       - last-passage times on the wedge, maximal paths, tau scaling
  coupling  - the Y + U = Z coupling and its distributional/path audits
  shape     - closed-form limit shape, variational flux, plateau checks
  ring      - event-driven ring simulator and flux measurement
  cli       - experiment orchestration, config parsing, artifacts
"""

from .disorder import (
    DisorderLaw,
    Environment,
    Mixture,
    PointMass,
    TwoPoint,
    Uniform,
    essential_infimum,
    mean_inverse_rate,
    mu,
    sample_environment,
    sup_support,
)
from .errors import (
    BracketError,
    DomainError,
    InvariantError,
    ParameterError,
    PathError,
    ResourceError,
    TasepLabError,
)
from .lpp import (
    LatticePath,
    PassageTable,
    TauEstimate,
    WedgePoint,
    backtrack_path,
    column_coverage,
    passage_table,
    passage_table_from_weights,
    passage_time,
    sample_weight,
    tau_estimate,
)
from .coupling import (
    CouplingSample,
    audit_path_bound,
    audit_Z_distribution,
    conditional_mean_U,
    sample_coupling,
    sample_U,
)
from .shape import (
    FluxEstimate,
    PlateauCheck,
    ShapeModel,
    flux_from_k,
    g_profile,
    h_from_tau,
    hom_flux,
    k_from_tau,
    k_hom,
    plateau_check,
    plateau_interval,
    tau_hom,
    tilde_tau,
    variational_flux,
)
from .ring import (
    FluxMeasurement,
    RingEvent,
    RingState,
    flux_curve,
    init_ring,
    measure_flux,
    step,
)
from .streams import SplitMix64, counter_uniform, derive_seed

__all__ = [name for name in dir() if not name.startswith("_")]
