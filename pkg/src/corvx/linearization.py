"""First-order expansion of the control-affine dynamics and of the nonconvex
constraints about a reference trajectory.

The dynamics Jacobian is closed-form (finite differences are used only in
tests).  Because the equations of motion are control-affine after the change
of variables, the control coefficient matrix B is exact, and none of the
coefficients depend on the reference controls.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from corvx.dynamics import (
    MZ,
    N_U,
    N_X,
    PH,
    PHI_MAX,
    R,
    TH,
    UN,
    UNORM,
    UR,
    UT,
    VN,
    VR,
    VT,
    ConvexState,
    Scenario,
    SingularStateError,
    coast_rhs_array,
)


@dataclass
class AffineScalarConstraint:
    """A single affine constraint  sum(coeffs[name] * value[name])  sense  offset.

    sense is "<=" or "==".  Variable names are symbolic ("u_N", "z", "v_t",
    "v_n"); the transcription maps them onto problem columns.
    """

    coeffs: dict[str, float]
    offset: float
    sense: str

    def __post_init__(self) -> None:
        if self.sense not in ("<=", "=="):
            raise ValueError(f"unknown sense {self.sense!r}")
        values = list(self.coeffs.values()) + [self.offset]
        if not np.all(np.isfinite(values)):
            raise ValueError("constraint coefficients must be finite")

    def lhs(self, values: dict[str, float]) -> float:
        return sum(c * values[name] for name, c in self.coeffs.items())

    def residual(self, values: dict[str, float]) -> float:
        """lhs - offset; feasible iff <= 0 (inequality) or == 0 (equality)."""
        return self.lhs(values) - self.offset


@dataclass
class LinearizedDynamics:
    """Time-varying (A, B, c) data of the linearized dynamics on a mesh.

    a_mat: (M, 7, 7), b_mat: (M, 7, 4), c_vec: (M, 7).  B is constant in
    time but stored per node to keep the per-node contract uniform.
    """

    a_mat: np.ndarray
    b_mat: np.ndarray
    c_vec: np.ndarray
    node_times: np.ndarray


def control_matrix(c: float) -> np.ndarray:
    """Exact control coefficient matrix of the control-affine dynamics."""
    b = np.zeros((N_X, N_U))
    b[VR, UR] = 1.0
    b[VT, UT] = 1.0
    b[VN, UN] = 1.0
    b[MZ, UNORM] = -1.0 / c
    return b


def jacobian_array(states: np.ndarray, mu: float) -> np.ndarray:
    """Closed-form Jacobian of the uncontrolled dynamics, batched (..., 7, 7)."""
    states = np.asarray(states, dtype=float)
    r = states[..., R]
    ph = states[..., PH]
    vr = states[..., VR]
    vt = states[..., VT]
    vn = states[..., VN]
    if np.any(r <= 0.0):
        raise SingularStateError("radius must be positive")
    if np.any(np.abs(ph) >= PHI_MAX):
        raise SingularStateError("latitude too close to +/-90 deg")

    cph = np.cos(ph)
    tph = np.tan(ph)
    sec2 = 1.0 / cph**2

    a = np.zeros(states.shape[:-1] + (N_X, N_X))
    a[..., R, VR] = 1.0

    a[..., TH, R] = -vt / (r**2 * cph)
    a[..., TH, PH] = vt * tph / (r * cph)
    a[..., TH, VT] = 1.0 / (r * cph)

    a[..., PH, R] = -vn / r**2
    a[..., PH, VN] = 1.0 / r

    a[..., VR, R] = -(vt**2 + vn**2) / r**2 + 2.0 * mu / r**3
    a[..., VR, VT] = 2.0 * vt / r
    a[..., VR, VN] = 2.0 * vn / r

    a[..., VT, R] = (vr * vt - vt * vn * tph) / r**2
    a[..., VT, PH] = vt * vn * sec2 / r
    a[..., VT, VR] = -vt / r
    a[..., VT, VT] = (-vr + vn * tph) / r
    a[..., VT, VN] = vt * tph / r

    a[..., VN, R] = (vr * vn + vt**2 * tph) / r**2
    a[..., VN, PH] = -(vt**2) * sec2 / r
    a[..., VN, VR] = -vn / r
    a[..., VN, VT] = -2.0 * vt * tph / r
    a[..., VN, VN] = -vr / r
    return a


def linearize_dynamics(
    x_ref: ConvexState | np.ndarray, scen: Scenario
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(A, B, c) of the linearized dynamics at one reference state.

    A is the analytic Jacobian of the uncontrolled right-hand side, B is the
    exact control matrix, and c = f(x_ref) - A x_ref, so A x + B u + c
    reproduces the control-affine dynamics exactly at the expansion point.
    """
    x = x_ref.as_array() if isinstance(x_ref, ConvexState) else np.asarray(x_ref, float)
    a = jacobian_array(x, scen.mu)
    b = control_matrix(scen.c)
    c = coast_rhs_array(x, scen.mu) - a @ x
    return a, b, c


def linearize_trajectory(
    states: np.ndarray, node_times: np.ndarray, scen: Scenario
) -> LinearizedDynamics:
    """Per-node (A, B, c) for a whole reference state history (M, 7)."""
    states = np.asarray(states, dtype=float)
    a = jacobian_array(states, scen.mu)
    b = np.broadcast_to(control_matrix(scen.c), (states.shape[0], N_X, N_U)).copy()
    c = coast_rhs_array(states, scen.mu) - np.einsum("jab,jb->ja", a, states)
    return LinearizedDynamics(a, b, c, np.asarray(node_times, dtype=float))


def un_cap_terms(z_ref: float, t_max: float) -> tuple[float, float]:
    """(kappa, rho) of the linearized magnitude cap  u_N + kappa*z <= rho."""
    kappa = t_max * math.exp(-z_ref)
    rho = kappa * (1.0 + z_ref)
    return kappa, rho


def linearize_un_bound(z_ref: float, t_max: float) -> list[AffineScalarConstraint]:
    """Linearized thrust-acceleration bounds at a reference log-mass.

    Returns the cap  u_N <= t_max * exp(-z_ref) * (1 - (z - z_ref))  written
    as  u_N + kappa*z <= rho, plus the plain nonnegativity  -u_N <= 0.
    """
    kappa, rho = un_cap_terms(z_ref, t_max)
    cap = AffineScalarConstraint({"u_N": 1.0, "z": kappa}, rho, "<=")
    nonneg = AffineScalarConstraint({"u_N": -1.0}, 0.0, "<=")
    return [cap, nonneg]


def linearize_final_velocity(
    vt_ref: float, vn_ref: float, scen: Scenario
) -> AffineScalarConstraint:
    """First-order expansion of the terminal circular-speed condition.

    v_t^2 + v_n^2 = mu/rf expanded about (vt_ref, vn_ref) gives
    2 vt_ref v_t + 2 vn_ref v_n = mu/rf + vt_ref^2 + vn_ref^2.
    """
    if not (math.isfinite(vt_ref) and math.isfinite(vn_ref)):
        raise ValueError("reference velocities must be finite")
    offset = scen.mu / scen.rf + vt_ref**2 + vn_ref**2
    return AffineScalarConstraint({"v_t": 2.0 * vt_ref, "v_n": 2.0 * vn_ref}, offset, "==")
