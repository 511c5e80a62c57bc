"""Real-gas thermodynamics from Massieu-Planck potentials and adiabatic
filtration of real gases in porous media."""
from .errors import (BranchAmbiguityError, ConvergenceError, DomainError, ExtrapolationError,
                     NoRootError, ParamError, QuadratureError, RealGasError, SingularError,
                     SingularPointError, SupercriticalError)
from .filtration import (HomogeneousAnisotropic, Isotropic, MediumSpec, QProfile, SourceSpec,
                         anisotropic_to_isotropic, build_q_profile, invert_q,
                         isotropic_to_anisotropic, point_source_field,
                         pr_invertibility_threshold, vdw_invertibility_threshold)
from .gas_models import (ReductionMap, VirialCoefficient, VirialSpec, compatibility_residual,
                         ideal_gas, model_from_string, pr_reduced, vdw_reduced, virial_model)
from .isentrope import (Isentrope, isentrope_from_constant, make_isentrope,
                        pressure_on_isentrope, sound_speed_on_isentrope)
from .laplace import (BoxDomain, HarmonicField, assemble_dirichlet_field, field_value,
                      solve_u0)
from .phase_equilibrium import (CoexistencePoint, SpinodalPoint, binodal_curve, coexistence_at_T,
                                critical_point, spinodal_T, transition_jumps)
from .phase_map import BinodalTable, Phase, PhaseLabel, classify, map_field
from .thermo_core import (Applicability, GasModel, KappaForm, ThermoState, evaluate_state,
                          heat_capacity_p, heat_capacity_v, kappa_form, monge_ampere_residual,
                          sound_speed_sq)

__version__ = "0.1.0"

__all__ = [
    "Applicability",
    "BinodalTable",
    "BoxDomain",
    "BranchAmbiguityError",
    "CoexistencePoint",
    "ConvergenceError",
    "DomainError",
    "ExtrapolationError",
    "GasModel",
    "HarmonicField",
    "HomogeneousAnisotropic",
    "Isentrope",
    "Isotropic",
    "KappaForm",
    "MediumSpec",
    "NoRootError",
    "ParamError",
    "Phase",
    "PhaseLabel",
    "QProfile",
    "QuadratureError",
    "RealGasError",
    "ReductionMap",
    "SingularError",
    "SingularPointError",
    "SourceSpec",
    "SpinodalPoint",
    "SupercriticalError",
    "ThermoState",
    "VirialCoefficient",
    "VirialSpec",
    "anisotropic_to_isotropic",
    "assemble_dirichlet_field",
    "binodal_curve",
    "build_q_profile",
    "classify",
    "coexistence_at_T",
    "compatibility_residual",
    "critical_point",
    "evaluate_state",
    "field_value",
    "heat_capacity_p",
    "heat_capacity_v",
    "ideal_gas",
    "invert_q",
    "isentrope_from_constant",
    "isotropic_to_anisotropic",
    "kappa_form",
    "make_isentrope",
    "map_field",
    "model_from_string",
    "monge_ampere_residual",
    "point_source_field",
    "pr_invertibility_threshold",
    "pr_reduced",
    "pressure_on_isentrope",
    "solve_u0",
    "sound_speed_on_isentrope",
    "sound_speed_sq",
    "spinodal_T",
    "transition_jumps",
    "vdw_invertibility_threshold",
    "vdw_reduced",
    "virial_model",
]
