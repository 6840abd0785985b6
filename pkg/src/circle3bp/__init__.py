"""Regularized three-body dynamics on the circle with cotangent potential.

The package builds the symmetric periodic brake orbit of the two-equal-mass
problem by a topological shooting argument: integrate the regularized flow
out of an isosceles brake configuration, watch which face of a trapping
block the trajectory leaves through, and bisect on the initial distance
until the exit sits on the double-collision face with zero radial velocity.
Supporting modules expose the mass geometry, coordinate charts, potential
fields, the isosceles subproblem, the block's exit analysis, and a suite of
inequality checks behind the construction.
"""

from .claims import ClaimReport, ClaimResult, verify_all
from .coords import (
    TRAJECTORY_COLUMNS,
    AngularConfig,
    JacobiState,
    PolarState,
    RegularizedState,
)
from .dynamics import IntegratorConfig, Trajectory, integrate
from .homothetic import TrichotomyReport, classify_trichotomy
from .model import EnergyLevel, MassContext, build_context
from .potential import ContourPolyline, Singular, zero_velocity_curve
from .shooting import (
    PeriodicOrbit,
    PhysicalOrbit,
    QuarterOrbit,
    ShootConfig,
    assemble_period,
    bracket_and_bisect,
    render_physical,
)
from .wazewski import (
    EquilibriumData,
    ExitRecord,
    exit_map,
    linearize_P,
    membership,
    shooting_point,
    unstable_branch,
)

__version__ = "0.1.0"

__all__ = [
    "AngularConfig",
    "ClaimReport",
    "ClaimResult",
    "ContourPolyline",
    "EnergyLevel",
    "EquilibriumData",
    "ExitRecord",
    "IntegratorConfig",
    "JacobiState",
    "MassContext",
    "PeriodicOrbit",
    "PhysicalOrbit",
    "PolarState",
    "QuarterOrbit",
    "RegularizedState",
    "ShootConfig",
    "Singular",
    "TRAJECTORY_COLUMNS",
    "Trajectory",
    "TrichotomyReport",
    "assemble_period",
    "bracket_and_bisect",
    "build_context",
    "classify_trichotomy",
    "exit_map",
    "integrate",
    "linearize_P",
    "membership",
    "render_physical",
    "shooting_point",
    "unstable_branch",
    "verify_all",
    "zero_velocity_curve",
    "__version__",
]
