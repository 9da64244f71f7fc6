"""fatiq: probabilistic fatigue life of specimens and structures.

Weibull-Basquin closed forms for S-N curves and Miner damage, a health
simulator for Monte Carlo checks, weakest-link size effects with the
structure survival integral, the analytic I-beam severity field, its
hot-point (Laplace) approximation, and random-load survival estimation.
"""

from .errors import (
    ConfigError,
    DomainError,
    GridTooShort,
    HotPointStructureError,
    SequenceExhausted,
)
from .health import (
    HealthTrajectory,
    SeededRng,
    empirical_survival,
    health_trajectory,
    quantile_nearest_rank,
    random_damage,
    sample_initial_health,
    simulate_ncf_constant,
    simulate_ncf_sequence,
)
from .ibeam import (
    BeamGeometry,
    BeamGrid,
    UnitStress,
    beam_volume,
    bending_moment_u,
    moment_inertia,
    quarter_severity_grid,
    severity_field,
    severity_grid,
    shear_u,
    stress_u,
    unitary_severity,
    von_mises_u,
)
from .laplace import (
    HotPoint,
    LaplaceRow,
    laplace_i1,
    laplace_i2,
    locate_hot_points,
    phi1,
    phi2,
    quadrature_iprime,
    table1,
)
from .loading import (
    ConstantLoad,
    EquivLoad,
    GammaPowerLoad,
    McConfig,
    equiv_load,
    gamma_fit,
    load_pdf,
    mc_survival,
    ncf_quantile_det,
    ncf_quantile_sto,
    sample_load_sums,
)
from .specimen import (
    DetailCategory,
    MinerNcf,
    SeveritySequence,
    ShapeFunction,
    SurvivalCurve,
    WeibullBasquinParams,
    kappa_from_detail,
    load_severity_csv,
    miner_damage,
    miner_damage_prefix,
    miner_ncf,
    scale_n,
    severity_power_prefix,
    shape_u,
    shape_u_inv,
    sn_quantile,
    survival_constant,
    survival_from_damage,
    survival_generic,
    survival_variable,
    weibull_shape,
)
from .structure import (
    CellPartition,
    FailureDensity,
    SizeEffectModel,
    StructureConstant,
    compute_q,
    failure_density,
    g_eval,
    poisson_microscopic_sample,
    survival_elastic,
    survival_from_power_sum,
    survival_structure_general,
)

__version__ = "0.1.0"
