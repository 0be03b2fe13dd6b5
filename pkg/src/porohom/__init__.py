"""Finite-element toolkit for reactive transport in periodically perforated
media: pore-scale simulation, periodic cell problems with effective
diffusion tensors, the homogenized model, and quantitative corrector
verification between the two.
"""

from .cell import CellSolution, EffectiveTensor, corrector_at, \
    effective_tensor, solve_cell_problems
from .config import RunConfig, default_config, load_config, parse_config, \
    parse_poly, serialize_config
from .errors import ToolkitError
from .fem import NodalField, assemble_interface_mass, assemble_mass, \
    assemble_stiffness, field_norms, interpolate, solve_spd
from .kinetics import ModelParams, psi_reg, reaction_rate, step_precipitate, \
    w_rhs
from .macro import HomogenizedCoefficients, MacroState, init_macro, \
    run_macro, step_macro
from .mesh import Mesh2D, build_macro_mesh, build_perforated_mesh, \
    build_unit_cell_mesh, locate_point
from .micro import MicroState, Trace, TraceRequest, default_initials, \
    init_micro, run_micro, step_micro, total_mass
from .verify import NormReport, convergence_study, corrector_norms, \
    energy_consistency, initial_compatibility, macro_energy, micro_energy

__version__ = "0.1.0"

__all__ = [
    "CellSolution", "EffectiveTensor", "HomogenizedCoefficients",
    "MacroState", "MicroState", "Mesh2D", "ModelParams", "NodalField",
    "NormReport", "RunConfig", "ToolkitError", "Trace", "TraceRequest",
    "assemble_interface_mass", "assemble_mass", "assemble_stiffness",
    "build_macro_mesh", "build_perforated_mesh", "build_unit_cell_mesh",
    "convergence_study", "corrector_at", "corrector_norms",
    "default_config", "default_initials", "effective_tensor",
    "energy_consistency", "field_norms", "init_macro", "init_micro",
    "initial_compatibility", "interpolate", "load_config", "locate_point",
    "macro_energy", "micro_energy", "parse_config", "parse_poly",
    "psi_reg", "reaction_rate", "run_macro", "run_micro",
    "serialize_config", "solve_cell_problems", "solve_spd",
    "step_macro", "step_micro", "step_precipitate", "total_mass", "w_rhs",
]
