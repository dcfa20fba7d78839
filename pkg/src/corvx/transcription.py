"""Direct transcription of one convexification iteration onto a time mesh.

Builds the finite-dimensional SOCP: trapezoidal defect equalities from the
linearized dynamics, thrust-direction cone memberships, linearized magnitude
caps, boundary and rendezvous conditions, and the linearized final-mass
objective.  Decision variables are ordered spacecraft-major, node-major:
7 state + 4 control slots per node.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from corvx.dynamics import (
    MZ,
    N_U,
    N_X,
    PH,
    R,
    SAT_I,
    SAT_II,
    TH,
    UNORM,
    UR,
    VN,
    VR,
    VT,
    Scenario,
    coasting_state,
    sat_index,
    to_convex_state,
)
from corvx.linearization import linearize_trajectory, un_cap_terms
from corvx.socp import AffineBound, SocpProblem, SocpSolution, STATUS_OPTIMAL

VARS_PER_NODE = N_X + N_U


class UnavailableSolutionError(RuntimeError):
    """Tried to extract a trajectory from a non-optimal solver outcome."""


@dataclass
class Mesh:
    node_times: np.ndarray

    def __post_init__(self) -> None:
        self.node_times = np.asarray(self.node_times, dtype=float)
        if self.node_times.size < 2:
            raise ValueError("a mesh needs at least two nodes")
        if self.node_times[0] != 0.0:
            raise ValueError("mesh must start at t = 0")
        if np.any(np.diff(self.node_times) <= 0.0):
            raise ValueError("node times must be strictly increasing")

    @property
    def m(self) -> int:
        return self.node_times.size

    @property
    def tf(self) -> float:
        return float(self.node_times[-1])

    @property
    def steps(self) -> np.ndarray:
        return np.diff(self.node_times)


def build_mesh(tf: float, m_nodes: int) -> Mesh:
    """Equally spaced mesh of m_nodes points spanning [0, tf]."""
    if m_nodes < 2:
        raise ValueError("m_nodes must be at least 2")
    times = np.linspace(0.0, tf, m_nodes)
    times[-1] = tf
    return Mesh(times)


@dataclass
class TrajectoryPair:
    """Discrete states/controls of both spacecraft on a shared mesh.

    states: (2, M, 7) convex states (log-mass in the last slot);
    controls: (2, M, 4).
    """

    states: np.ndarray
    controls: np.ndarray
    mesh: Mesh

    def __post_init__(self) -> None:
        self.states = np.asarray(self.states, dtype=float)
        self.controls = np.asarray(self.controls, dtype=float)
        m = self.mesh.m
        if self.states.shape != (2, m, N_X):
            raise ValueError(f"states must have shape (2, {m}, {N_X})")
        if self.controls.shape != (2, m, N_U):
            raise ValueError(f"controls must have shape (2, {m}, {N_U})")

    def copy(self) -> "TrajectoryPair":
        return TrajectoryPair(self.states.copy(), self.controls.copy(), self.mesh)

    def final_mass(self, sat: int | str) -> float:
        return float(np.exp(self.states[sat_index(sat), -1, MZ]))

    def propellant(self, sat: int | str) -> float:
        s = sat_index(sat)
        return float(np.exp(self.states[s, 0, MZ]) - np.exp(self.states[s, -1, MZ]))

    def theta_span(self, sat: int | str) -> float:
        s = sat_index(sat)
        return float(self.states[s, -1, TH] - self.states[s, 0, TH])


def trapezoid_defect(
    x_j: np.ndarray,
    x_j1: np.ndarray,
    f_j: np.ndarray,
    f_j1: np.ndarray,
    h_j: float,
) -> np.ndarray:
    """x_{j+1} - x_j - (h/2)(f_j + f_{j+1}); zero when the step is consistent."""
    if not h_j > 0.0:
        raise ValueError("step must be positive")
    return np.asarray(x_j1) - np.asarray(x_j) - 0.5 * h_j * (np.asarray(f_j) + np.asarray(f_j1))


@dataclass
class DiscreteProblemLayout:
    """Bijection between (spacecraft, node, component) and problem columns,
    plus the row registry filled in during assembly."""

    mesh: Mesh
    row_map: dict[str, list[int]] = field(default_factory=dict)

    @property
    def n_vars(self) -> int:
        return 2 * self.mesh.m * VARS_PER_NODE

    def x_index(self, sat: int | str, node: int, comp: int) -> int:
        s = sat_index(sat)
        return (s * self.mesh.m + node) * VARS_PER_NODE + comp

    def u_index(self, sat: int | str, node: int, comp: int) -> int:
        return self.x_index(sat, node, N_X + comp)

    def pack(self, traj: TrajectoryPair) -> np.ndarray:
        vec = np.empty(self.n_vars)
        m = self.mesh.m
        for s in (SAT_I, SAT_II):
            block = np.concatenate([traj.states[s], traj.controls[s]], axis=1)
            vec[s * m * VARS_PER_NODE : (s + 1) * m * VARS_PER_NODE] = block.ravel()
        return vec

    def unpack(self, vec: np.ndarray) -> TrajectoryPair:
        m = self.mesh.m
        states = np.empty((2, m, N_X))
        controls = np.empty((2, m, N_U))
        for s in (SAT_I, SAT_II):
            block = vec[s * m * VARS_PER_NODE : (s + 1) * m * VARS_PER_NODE].reshape(
                m, VARS_PER_NODE
            )
            states[s] = block[:, :N_X]
            controls[s] = block[:, N_X:]
        return TrajectoryPair(states, controls, self.mesh)


class _RowBuilder:
    def __init__(self, layout: DiscreteProblemLayout) -> None:
        self.rows: list[int] = []
        self.cols: list[int] = []
        self.vals: list[float] = []
        self.rhs: list[float] = []
        self.layout = layout

    def add(self, label: str, entries: list[tuple[int, float]], rhs: float) -> int:
        r = len(self.rhs)
        for col, val in entries:
            if val != 0.0:
                self.rows.append(r)
                self.cols.append(col)
                self.vals.append(val)
        self.rhs.append(rhs)
        self.layout.row_map.setdefault(label, []).append(r)
        return r

    def add_block(self, label: str, rows, cols, vals, rhs) -> None:
        base = len(self.rhs)
        keep = vals != 0.0
        self.rows.extend((rows[keep] + base).tolist())
        self.cols.extend(cols[keep].tolist())
        self.vals.extend(vals[keep].tolist())
        self.rhs.extend(rhs.tolist())
        self.layout.row_map.setdefault(label, []).extend(
            range(base, base + rhs.size)
        )


def assemble_socp(
    scen: Scenario,
    ref: TrajectoryPair,
    layout: DiscreteProblemLayout,
    *,
    theta_rendezvous: bool = True,
    objective: str = "expanded_mass",
    terminal_sat: int | str = SAT_I,
) -> SocpProblem:
    """Build the SOCP of one convexification iteration about a reference.

    objective "expanded_mass" minimizes the negated first-order expansion of
    exp(z) at the reference final log-masses; "log_mass" maximizes the plain
    final log-mass sum.  theta_rendezvous=False drops the right-ascension
    matching row (transfer-cost runs) while keeping everything else.
    """
    if ref.mesh is not layout.mesh and not np.array_equal(
        ref.mesh.node_times, layout.mesh.node_times
    ):
        raise ValueError("reference and layout meshes differ")
    if objective not in ("expanded_mass", "log_mass"):
        raise ValueError(f"unknown objective form {objective!r}")
    term = sat_index(terminal_sat)
    mesh = layout.mesh
    m = mesh.m
    h = mesh.steps
    layout.row_map.clear()

    builder = _RowBuilder(layout)
    lins = [
        linearize_trajectory(ref.states[s], mesh.node_times, scen)
        for s in (SAT_I, SAT_II)
    ]

    # defect equalities: (I - h/2 A_{j+1}) x_{j+1} - (I + h/2 A_j) x_j
    #                    - h/2 B (u_j + u_{j+1}) = h/2 (c_j + c_{j+1})
    ii, kk = np.meshgrid(np.arange(N_X), np.arange(N_X), indexing="ij")
    iu, ku = np.meshgrid(np.arange(N_X), np.arange(N_U), indexing="ij")
    eye = np.eye(N_X)
    for s in (SAT_I, SAT_II):
        lin = lins[s]
        a, b_mat, c_vec = lin.a_mat, lin.b_mat[0], lin.c_vec
        for j in range(m - 1):
            hj = h[j]
            blk_next = eye - 0.5 * hj * a[j + 1]
            blk_prev = -(eye + 0.5 * hj * a[j])
            blk_u = -0.5 * hj * b_mat
            rows = np.concatenate([ii.ravel(), ii.ravel(), iu.ravel(), iu.ravel()])
            cols = np.concatenate(
                [
                    layout.x_index(s, j + 1, 0) + kk.ravel(),
                    layout.x_index(s, j, 0) + kk.ravel(),
                    layout.u_index(s, j, 0) + ku.ravel(),
                    layout.u_index(s, j + 1, 0) + ku.ravel(),
                ]
            )
            vals = np.concatenate(
                [blk_next.ravel(), blk_prev.ravel(), blk_u.ravel(), blk_u.ravel()]
            )
            rhs = 0.5 * hj * (c_vec[j] + c_vec[j + 1])
            builder.add_block(f"defect/{s}", rows, cols, vals, rhs)

    # fixed initial states
    for s in (SAT_I, SAT_II):
        x0 = to_convex_state(coasting_state(scen, s, 0.0)).as_array()
        for comp in range(N_X):
            builder.add(f"init/{s}", [(layout.x_index(s, 0, comp), 1.0)], float(x0[comp]))

    # coplanar scenarios keep the 7-state formulation with the out-of-plane
    # components pinned to zero at every node (node 0 is covered by init)
    if scen.coplanar:
        for s in (SAT_I, SAT_II):
            for j in range(1, m):
                builder.add("pin_phi", [(layout.x_index(s, j, PH), 1.0)], 0.0)
                builder.add("pin_vn", [(layout.x_index(s, j, VN), 1.0)], 0.0)

    # rendezvous at the final node
    last = m - 1
    if theta_rendezvous:
        builder.add(
            "rendezvous_theta",
            [
                (layout.x_index(SAT_I, last, TH), 1.0),
                (layout.x_index(SAT_II, last, TH), -1.0),
            ],
            2.0 * np.pi * scen.k_rev,
        )
    for comp in (R, PH, VR, VT, VN):
        builder.add(
            "rendezvous_match",
            [
                (layout.x_index(SAT_I, last, comp), 1.0),
                (layout.x_index(SAT_II, last, comp), -1.0),
            ],
            0.0,
        )

    # terminal circular-orbit conditions on one spacecraft only
    builder.add("terminal_r", [(layout.x_index(term, last, R), 1.0)], scen.rf)
    builder.add("terminal_vr", [(layout.x_index(term, last, VR), 1.0)], 0.0)
    if scen.coplanar:
        builder.add(
            "terminal_speed",
            [(layout.x_index(term, last, VT), 1.0)],
            np.sqrt(scen.mu / scen.rf),
        )
    else:
        vt_ref = float(ref.states[term, last, VT])
        vn_ref = float(ref.states[term, last, VN])
        builder.add(
            "terminal_speed",
            [
                (layout.x_index(term, last, VT), 2.0 * vt_ref),
                (layout.x_index(term, last, VN), 2.0 * vn_ref),
            ],
            scen.mu / scen.rf + vt_ref**2 + vn_ref**2,
        )

    # cones and thrust-acceleration bounds at every node
    cones: list[tuple[int, ...]] = []
    bounds: list[AffineBound] = []
    for s in (SAT_I, SAT_II):
        for j in range(m):
            un = layout.u_index(s, j, UNORM)
            cones.append(
                (un, layout.u_index(s, j, UR), layout.u_index(s, j, UR + 1),
                 layout.u_index(s, j, UR + 2))
            )
            bounds.append(AffineBound(un, "lower", 0.0))
            kappa, rho = un_cap_terms(float(ref.states[s, j, MZ]), scen.t_max)
            bounds.append(
                AffineBound(un, "upper", rho, ((layout.x_index(s, j, MZ), -kappa),))
            )

    cost = np.zeros(layout.n_vars)
    for s in (SAT_I, SAT_II):
        zf = layout.x_index(s, last, MZ)
        if objective == "expanded_mass":
            cost[zf] = -np.exp(float(ref.states[s, last, MZ]))
        else:
            cost[zf] = -1.0

    a_eq = sp.csr_matrix(
        (builder.vals, (builder.rows, builder.cols)),
        shape=(len(builder.rhs), layout.n_vars),
    )
    return SocpProblem(
        n_vars=layout.n_vars,
        cost=cost,
        a_eq=a_eq,
        b_eq=np.array(builder.rhs),
        cones=cones,
        bounds=bounds,
    )


def extract_solution(sol: SocpSolution, layout: DiscreteProblemLayout) -> TrajectoryPair:
    """Inverse of the layout packing; requires an optimal solver status."""
    if sol.status != STATUS_OPTIMAL or sol.primal is None:
        raise UnavailableSolutionError(
            f"no usable primal point (solver status {sol.status!r})"
        )
    return layout.unpack(sol.primal)
