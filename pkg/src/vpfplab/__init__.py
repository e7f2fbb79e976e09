"""vpfplab: a desk-scale kinetic/drift-diffusion laboratory on an interval.

Solves the scaled Vlasov-Poisson-Fokker-Planck system for several
charged species on a bounded 1d slab with reflecting (diffuse, specular,
or inverse) walls, solves the matching Poisson-Nernst-Planck system with
exponential-fitting fluxes, and measures how the kinetic densities
approach the drift-diffusion ones as the scaling parameter epsilon
shrinks, together with the free-energy, entropy-production, and boundary
-information diagnostics that control that limit.
"""

from .config import ConfigError, RunConfig, load_config
from .fokker_planck import (MaxwellianTable, apply_fp, build_maxwellians,
                            fp_implicit_step, fp_inverse_check)
from .grid import (KineticState, MomentFields, PhaseGrid, PhysicalScales,
                   SpeciesParams, SpeciesPhysical, check_neutrality, current,
                   density, derive_scales, moments)
from .kernels import BACKEND as KERNELS_BACKEND
from .limits import (CurrentReport, OrderFit, ProbeReport, SweepCase,
                     SweepResult, ck_check, diffusivity_probe, estimate_order,
                     limit_current_check, logsobolev_check, relative_entropy,
                     remainder_field, remainder_norms, sweep_epsilon)
from .pnp import (PnpProblem, PnpResult, pnp_energy, pnp_step, run_pnp,
                  sg_flux)
from .poisson import FieldState, electric_field, solve_poisson
from .transport import (apply_diffuse_reflection, apply_specular_reflection,
                        transport_v_step, transport_x_step, wall_flux)
from .vpfp import (DissipationReport, VpfpProblem, VpfpResult, dg_information,
                   entropy_production, free_energy, run_vpfp,
                   verify_dissipation, vpfp_step)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "KERNELS_BACKEND",
    "ConfigError", "RunConfig", "load_config",
    "MaxwellianTable", "apply_fp", "build_maxwellians", "fp_implicit_step",
    "fp_inverse_check",
    "KineticState", "MomentFields", "PhaseGrid", "PhysicalScales",
    "SpeciesParams", "SpeciesPhysical", "check_neutrality", "current",
    "density", "derive_scales", "moments",
    "CurrentReport", "OrderFit", "ProbeReport", "SweepCase", "SweepResult",
    "ck_check", "diffusivity_probe", "estimate_order", "limit_current_check",
    "logsobolev_check", "relative_entropy", "remainder_field",
    "remainder_norms", "sweep_epsilon",
    "PnpProblem", "PnpResult", "pnp_energy", "pnp_step", "run_pnp", "sg_flux",
    "FieldState", "electric_field", "solve_poisson",
    "apply_diffuse_reflection", "apply_specular_reflection",
    "transport_v_step", "transport_x_step", "wall_flux",
    "DissipationReport", "VpfpProblem", "VpfpResult", "dg_information",
    "entropy_production", "free_energy", "run_vpfp", "verify_dissipation",
    "vpfp_step",
]
