"""Minimum-propellant cooperative rendezvous of two spacecraft, solved by
successive convexification over second-order cone programs.

Normalized canonical units are used everywhere: distances in initial-orbit
radii, velocities in the circular speed at the initial radius, masses in
initial spacecraft masses, so mu = r0 = m0 = 1 in the nominal scenarios.
"""

from corvx.dynamics import (
    ControlRTN,
    ConvexControl,
    ConvexState,
    DomainError,
    Scenario,
    SingularStateError,
    SpacecraftState,
    coasting_state,
)
from corvx.transcription import Mesh, TrajectoryPair, build_mesh
from corvx.scvx import ScvxConfig, ScvxReport, run_scvx
from corvx.socp import SocpProblem, SocpSolution, SolverSettings, solve

__version__ = "0.1.0"

__all__ = [
    "ControlRTN",
    "ConvexControl",
    "ConvexState",
    "DomainError",
    "Mesh",
    "Scenario",
    "ScvxConfig",
    "ScvxReport",
    "SingularStateError",
    "SocpProblem",
    "SocpSolution",
    "SolverSettings",
    "SpacecraftState",
    "TrajectoryPair",
    "build_mesh",
    "coasting_state",
    "run_scvx",
    "solve",
]
