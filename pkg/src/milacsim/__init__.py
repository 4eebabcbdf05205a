"""Lossless reciprocal analog-network beamforming toolkit.

Multiport network algebra, achievable beamforming-set analysis, weighted-MMSE
sum-rate solvers for MU-MISO, and a reproducible Monte-Carlo experiment
harness.
"""

from .beamsets import (
    DigitalBeamformer,
    MilacBeamformer,
    PhaseShifterMatrix,
    decompose_milac,
    hybrid_digital_milac_decompose,
    milac_membership_with_power,
    min_power_envelope,
    phase_shifter_matrix,
    sample_milac_boundary,
)
from .channels import (
    ChannelMatrix,
    GeometricChannelParams,
    array_response,
    clustered_channel,
    rayleigh_channel,
    substream,
)
from .exceptions import (
    ConfigError,
    ConvergenceError,
    InfeasibleResponseError,
    MilacsimError,
    RankDeficientChannelError,
    SingularNetworkError,
)
from .experiments import (
    ScenarioConfig,
    SweepRecord,
    emit_csv,
    load_config,
    parse_config,
    parse_csv,
    run_sweep,
    summarize,
)
from .network import (
    AdmittanceMatrix,
    MilacResponse,
    ScatteringMatrix,
    TunableAdmittances,
    admittance_from_scattering,
    admittances_to_matrix,
    complete_scattering,
    is_lossless_reciprocal,
    matrix_to_admittances,
    response_from_scattering,
    scattering_from_admittance,
)
from .solvers import (
    OracleGrid,
    ReducedChannel,
    SolverConfig,
    SumRateResult,
    WmmseState,
    brute_force_oracle,
    digital_wmmse,
    lift_solution,
    power_allocation,
    reduce_dimension,
    spectral_ball_projection,
    stationarity_residual,
    stationarity_residual_fulldim,
    sum_rate,
    update_omega,
    update_p,
    update_u,
    wmmse_lc,
    wmmse_lc_fulldim,
    y_subproblem_pgd,
)

__version__ = "0.1.0"
