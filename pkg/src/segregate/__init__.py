"""Phase segregation with nonlocal interactions: van der Waals coexistence,
logarithmic double wells, well-balanced kernels, sharp-interface limits."""

from .energy import BVConfig, Field, energy_I, energy_I0, energy_I_star, energy_split
from .errors import (ConfigError, DomainError, NoCoexistence, NoDoubleWell, NoInterface,
                     NotApplicable, ParameterError, SegregateError, ShapeError)
from .exponent import ExponentFit, exponent_fit
from .gamma import continuation, optimize_jump_positions, select_convention
from .kernels import KernelMatrix, ShortRangeKernel, build_balanced, build_short, neumann_green
from .minimize import (JumpCensus, MinimizeOptions, MinimizerResult, criterion_C, detect_jumps,
                       gap_avoidance_check, local_minimize)
from .profile import ProfileProblem, compute_c0
from .thermo import CoexistenceResult, EosParams, critical_point, maxwell_construction
from .wells import EnvelopeTable, WellParams, convex_envelope, envelope_of_G, flat_interval

__version__ = "0.1.0"

__all__ = [
    "BVConfig", "Field", "energy_I", "energy_I0", "energy_I_star", "energy_split",
    "ConfigError", "DomainError", "NoCoexistence", "NoDoubleWell", "NoInterface",
    "NotApplicable", "ParameterError", "SegregateError", "ShapeError",
    "ExponentFit", "exponent_fit", "continuation", "optimize_jump_positions", "select_convention",
    "KernelMatrix", "ShortRangeKernel", "build_balanced", "build_short", "neumann_green",
    "JumpCensus", "MinimizeOptions", "MinimizerResult", "criterion_C", "detect_jumps",
    "gap_avoidance_check", "local_minimize", "ProfileProblem", "compute_c0",
    "CoexistenceResult", "EosParams", "critical_point", "maxwell_construction",
    "EnvelopeTable", "WellParams", "convex_envelope", "envelope_of_G", "flat_interval",
]
