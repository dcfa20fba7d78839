"""Successive convexification loop: coast initialization, iterate, filter the
reference over the last three solutions, terminate on the reference delta.

The reference filter is a fixed convex combination of the three most recent
SOCP solutions (state variables only; the linearization never looks at
reference controls).  Termination compares consecutive filtered references
in the state infinity norm; the check is armed from the second iteration,
when two solution-born references exist.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

import numpy as np

from corvx.dynamics import SAT_I, SAT_II, Scenario, coasting_state, to_convex_state
from corvx.socp import SocpProblem, SolverSettings, solve
from corvx.socp import STATUS_OPTIMAL
from corvx.transcription import (
    DiscreteProblemLayout,
    Mesh,
    TrajectoryPair,
    assemble_socp,
    extract_solution,
)

log = logging.getLogger("corvx.scvx")

DEFAULT_FILTER_WEIGHTS = (6.0 / 11.0, 3.0 / 11.0, 2.0 / 11.0)

# a non-converged run is still usable when the nonlinear trapezoid residual
# of its last iterate stays below this bound (normalized units)
USABLE_DEFECT_TOL = 1e-4


class ScvxIterationError(RuntimeError):
    """The SOCP solver failed inside the loop; carries the offending problem."""

    def __init__(self, iteration: int, status: str, problem: SocpProblem) -> None:
        super().__init__(
            f"SOCP solve failed at iteration {iteration} with status {status!r}"
        )
        self.iteration = iteration
        self.status = status
        self.problem = problem


@dataclass
class ScvxConfig:
    eps_tol: float = 1e-6
    max_iters: int = 25
    filter_weights: tuple[float, float, float] = DEFAULT_FILTER_WEIGHTS
    filter_enabled: bool = True
    objective: str = "expanded_mass"
    theta_rendezvous: bool = True
    terminal_sat: int | str = SAT_I

    def __post_init__(self) -> None:
        w = self.filter_weights
        if len(w) != 3 or any(wi < 0 for wi in w) or abs(sum(w) - 1.0) > 1e-12:
            raise ValueError("filter weights must be nonnegative and sum to 1")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")


@dataclass
class ScvxReport:
    converged: bool
    usable: bool
    iterations: int
    objective_history: list[float]
    state_delta_history: list[float]
    final: TrajectoryPair
    per_iteration_solver_status: list[str]
    solver_iterations: list[int] = field(default_factory=list)
    wall_time_s: float = 0.0
    iterates: list[TrajectoryPair] | None = None

    @property
    def final_mass_total(self) -> float:
        return self.objective_history[-1]


def initial_reference(scen: Scenario, mesh: Mesh) -> TrajectoryPair:
    """Both spacecraft coasting on their initial circular orbits, zero controls."""
    states = np.empty((2, mesh.m, 7))
    for s in (SAT_I, SAT_II):
        for j, t in enumerate(mesh.node_times):
            states[s, j] = to_convex_state(coasting_state(scen, s, float(t))).as_array()
    controls = np.zeros((2, mesh.m, 4))
    return TrajectoryPair(states, controls, mesh)


def filter_reference(
    s_k: TrajectoryPair,
    s_km1: TrajectoryPair | None,
    s_km2: TrajectoryPair | None,
    weights: tuple[float, float, float] = DEFAULT_FILTER_WEIGHTS,
) -> TrajectoryPair:
    """Weighted state combination of the last three solutions.

    Controls are taken from the newest solution unfiltered (the linearized
    coefficients depend on reference states only).  With fewer than three
    available solutions the newest one is returned unchanged.
    """
    if s_km1 is None or s_km2 is None:
        return s_k.copy()
    for other in (s_km1, s_km2):
        if not np.array_equal(other.mesh.node_times, s_k.mesh.node_times):
            raise ValueError("filtered solutions must share one mesh")
    k0, k1, k2 = weights
    states = k0 * s_k.states + k1 * s_km1.states + k2 * s_km2.states
    return TrajectoryPair(states, s_k.controls.copy(), s_k.mesh)


def time_scaled_reference(
    donor: TrajectoryPair, scen: Scenario, new_mesh: Mesh
) -> TrajectoryPair:
    """Map a converged solution onto a mesh with a different duration.

    Donor states/controls are evaluated at proportionally scaled times via
    the continuous reconstruction; node 0 keeps the donor's exact initial
    state (the initial conditions do not depend on the duration).  Used as a
    warm start when continuing a solution family across mission durations.
    """
    from corvx.mesh import spline_reconstruct

    cont = spline_reconstruct(donor, scen)
    donor_tf = donor.mesh.tf
    times = np.clip(new_mesh.node_times * (donor_tf / new_mesh.tf), 0.0, donor_tf)
    states = np.empty((2, new_mesh.m, 7))
    controls = np.empty((2, new_mesh.m, 4))
    for s in (SAT_I, SAT_II):
        states[s] = cont.state(s, times)
        controls[s] = cont.control(s, times)
        states[s, 0] = donor.states[s, 0]
    return TrajectoryPair(states, controls, new_mesh)


def check_termination(
    x_k: TrajectoryPair, x_km1: TrajectoryPair, eps: float
) -> bool:
    """True iff the state infinity norm of the difference is strictly below eps."""
    if not np.array_equal(x_k.mesh.node_times, x_km1.mesh.node_times):
        raise ValueError("trajectories live on different meshes")
    return float(np.max(np.abs(x_k.states - x_km1.states))) < eps


def state_delta(x_k: TrajectoryPair, x_km1: TrajectoryPair) -> float:
    return float(np.max(np.abs(x_k.states - x_km1.states)))


def _nonlinear_defect(traj: TrajectoryPair, scen: Scenario) -> float:
    from corvx.dynamics import affine_rhs_array

    f = affine_rhs_array(traj.states, traj.controls, scen.mu, scen.c)
    h = traj.mesh.steps[None, :, None]
    defect = traj.states[:, 1:] - traj.states[:, :-1] - 0.5 * h * (f[:, 1:] + f[:, :-1])
    return float(np.max(np.abs(defect)))


def run_scvx(
    scen: Scenario,
    mesh: Mesh,
    cfg: ScvxConfig | None = None,
    solver: SolverSettings | None = None,
    initial_ref: TrajectoryPair | None = None,
    keep_iterates: bool = False,
) -> ScvxReport:
    """Run the successive convexification loop to convergence or max_iters.

    Raises ScvxIterationError when any subproblem comes back infeasible,
    unbounded or numerically failed; the exception carries the problem so it
    can be dumped for replay.
    """
    cfg = cfg or ScvxConfig()
    solver = solver or SolverSettings()
    layout = DiscreteProblemLayout(mesh)
    ref = initial_ref.copy() if initial_ref is not None else initial_reference(scen, mesh)

    solutions: list[TrajectoryPair] = []
    objective_history: list[float] = []
    delta_history: list[float] = []
    status_history: list[str] = []
    solver_iters: list[int] = []
    iterates: list[TrajectoryPair] | None = [] if keep_iterates else None

    converged = False
    t0 = time.perf_counter()
    for k in range(1, cfg.max_iters + 1):
        prob = assemble_socp(
            scen,
            ref,
            layout,
            theta_rendezvous=cfg.theta_rendezvous,
            objective=cfg.objective,
            terminal_sat=cfg.terminal_sat,
        )
        t_solve = time.perf_counter()
        sol = solve(prob, solver)
        status_history.append(sol.status)
        solver_iters.append(sol.iterations)
        if sol.status != STATUS_OPTIMAL:
            raise ScvxIterationError(k, sol.status, prob)
        traj = extract_solution(sol, layout)
        solutions.append(traj)
        if iterates is not None:
            iterates.append(traj.copy())

        if cfg.filter_enabled:
            new_ref = filter_reference(
                solutions[-1],
                solutions[-2] if len(solutions) >= 2 else None,
                solutions[-3] if len(solutions) >= 3 else None,
                cfg.filter_weights,
            )
        else:
            new_ref = traj.copy()

        delta = state_delta(new_ref, ref)
        delta_history.append(delta)
        objective = traj.final_mass(SAT_I) + traj.final_mass(SAT_II)
        objective_history.append(objective)
        log.info(
            "iter=%d objective=%.9f state_delta=%.3e solver_status=%s "
            "solver_iters=%d wall_s=%.3f",
            k,
            objective,
            delta,
            sol.status,
            sol.iterations,
            time.perf_counter() - t_solve,
        )
        ref = new_ref
        if k >= 2 and delta < cfg.eps_tol:
            converged = True
            break

    final = solutions[-1]
    usable = converged or _nonlinear_defect(final, scen) <= USABLE_DEFECT_TOL
    return ScvxReport(
        converged=converged,
        usable=usable,
        iterations=len(solutions),
        objective_history=objective_history,
        state_delta_history=delta_history,
        final=final,
        per_iteration_solver_status=status_history,
        solver_iterations=solver_iters,
        wall_time_s=time.perf_counter() - t0,
        iterates=iterates,
    )
