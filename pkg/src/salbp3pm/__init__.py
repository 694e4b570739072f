"""Exact SAT-based solver for assembly line balancing with power peak minimization."""
from .instance import (
    Bounds,
    Instance,
    InstanceError,
    ParseError,
    PowerProfile,
    Solution,
    analytic_bounds,
    generate_powers,
    parse_instance,
    power_profile,
    read_instance,
    validate_solution,
)
from .optimize import DriverConfig, OptimizeResult, optimize
from .oracle import oracle_feasible_set, oracle_solve
from .precedence import closure, transitive_closure

__version__ = "0.1.0"

__all__ = [
    "Bounds",
    "DriverConfig",
    "Instance",
    "InstanceError",
    "OptimizeResult",
    "ParseError",
    "PowerProfile",
    "Solution",
    "analytic_bounds",
    "closure",
    "generate_powers",
    "optimize",
    "oracle_feasible_set",
    "oracle_solve",
    "parse_instance",
    "power_profile",
    "read_instance",
    "transitive_closure",
    "validate_solution",
]
