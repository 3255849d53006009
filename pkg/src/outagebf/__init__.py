"""Outage-constrained coordinated beamforming toolkit.

Closed-form rate-outage constraints for Gaussian interference channels,
implicit interference functions, max-min-fair SISO power control, and
executable reductions from Max-Cut and 3-SAT that certify the hardness
boundary of the sum-rate and feasibility problems.
"""

from .model import (
    BeamformerSet,
    CnfFormula,
    MisoInstance,
    ParseError,
    SisoInstance,
    UserMap,
    ValidationReport,
    WeightedGraph,
    beams_from_powers,
    validate,
)
from .outage import instantaneous_rate, mc_outage, outage_lhs, outage_lhs_all, outage_lhs_siso
from .reductions import (
    CertificateError,
    CertificateReport,
    MaxCutGadget,
    SatGadget,
    assignment_from_beamformers,
    beamformers_from_assignment,
    check_feasibility_certificate,
    cut_from_powers,
    gadget_constants,
    powers_from_cut,
    reduce_3sat,
    reduce_maxcut,
    srm_value_identity,
)
from .solvers import (
    FeasibilityResult,
    MmfSolution,
    VertexSliceContext,
    feasibility_fixed_point,
    min_power_response,
    mmf_bisection,
    mmf_modulus_bound,
    mmf_upper_bound,
    outage_balancing_siso,
    single_user_objective_F,
    single_user_objective_f,
    srm_rates_from_powers,
)
from .zeta import ZetaContext, dzeta_e_dp, dzeta_v_dp, psi, solve_zeta, zeta_upper_bound

__version__ = "0.1.0"
