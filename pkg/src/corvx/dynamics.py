"""Two-body point-mass dynamics in polar inertial position / local-horizontal
velocity coordinates, plus the lossless change of variables used by the
convex solver.

State of one spacecraft: geocentric distance r, right ascension theta
(unwrapped, unbounded above), latitude phi, radial / eastward / northward
velocity components (v_r, v_t, v_n), and mass m.  The convexified twin keeps
the same six kinematic components and replaces m by its logarithm z = ln m,
which turns the thrust-to-mass ratio into an affine control channel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

# State component indices, shared by every array-facing module.  The last
# slot holds m for physical states and z for convex states.
R, TH, PH, VR, VT, VN, MZ = range(7)
N_X = 7

# Control component indices.
UR, UT, UN, UNORM = range(4)
N_U = 4

SAT_I, SAT_II = 0, 1
SAT_NAMES = ("I", "II")

# Latitude cutoff: the polar-coordinate equations blow up at |phi| = pi/2;
# states are rejected well before that.  The studied scenarios stay < 10 deg.
PHI_MAX = math.radians(89.9)


class DomainError(ValueError):
    """Input outside the physical domain (e.g. non-positive mass or radius)."""


class SingularStateError(DomainError):
    """State too close to the polar coordinate singularity at |phi| = pi/2."""


def sat_index(sat: int | str) -> int:
    """Normalize a spacecraft identifier ('I'/'II' or 0/1) to an array index."""
    if isinstance(sat, str):
        try:
            return SAT_NAMES.index(sat)
        except ValueError:
            raise ValueError(f"unknown spacecraft id {sat!r}") from None
    if sat in (SAT_I, SAT_II):
        return sat
    raise ValueError(f"unknown spacecraft id {sat!r}")


@dataclass(frozen=True)
class Scenario:
    """Mission definition in canonical units.

    mu, r0 and m0 are 1 in the nominal scenarios; they are kept as fields so
    invariance under unit changes can be tested.  Inclinations are radians;
    k_rev is the integer relative-revolution offset of the rendezvous
    condition and is fixed (never optimized over).
    """

    mu: float = 1.0
    r0: float = 1.0
    rf: float = 1.2
    tf: float = 10.5
    t_max: float = 0.1
    c: float = 1.0
    m0: float = 1.0
    theta0_I: float = math.pi
    theta0_II: float = 0.0
    inc_I: float = 0.0
    inc_II: float = 0.0
    k_rev: int = 0

    def __post_init__(self) -> None:
        for name in ("mu", "r0", "rf", "tf", "t_max", "c", "m0"):
            if not getattr(self, name) > 0.0:
                raise DomainError(f"Scenario.{name} must be positive")
        if self.k_rev != int(self.k_rev):
            raise DomainError("Scenario.k_rev must be an integer")

    @property
    def coplanar(self) -> bool:
        return self.inc_I == 0.0 and self.inc_II == 0.0

    @property
    def mean_motion(self) -> float:
        """Angular rate of the initial circular orbit, sqrt(mu/r0^3)."""
        return math.sqrt(self.mu / self.r0**3)

    def circular_speed(self, r: float) -> float:
        return math.sqrt(self.mu / r)

    def theta0(self, sat: int | str) -> float:
        return (self.theta0_I, self.theta0_II)[sat_index(sat)]

    def inc(self, sat: int | str) -> float:
        return (self.inc_I, self.inc_II)[sat_index(sat)]

    def initial_state(self, sat: int | str) -> "SpacecraftState":
        return coasting_state(self, sat, 0.0)

    def with_tf(self, tf: float) -> "Scenario":
        return replace(self, tf=tf)


@dataclass(frozen=True)
class SpacecraftState:
    """Physical state (r, theta, phi, v_r, v_t, v_n, m)."""

    r: float
    theta: float
    phi: float
    v_r: float
    v_t: float
    v_n: float
    m: float

    def __post_init__(self) -> None:
        if not self.r > 0.0:
            raise DomainError("radius must be positive")
        if not self.m > 0.0:
            raise DomainError("mass must be positive")
        if abs(self.phi) >= PHI_MAX:
            raise SingularStateError("latitude too close to +/-90 deg")

    def as_array(self) -> np.ndarray:
        return np.array(
            [self.r, self.theta, self.phi, self.v_r, self.v_t, self.v_n, self.m]
        )

    @classmethod
    def from_array(cls, x: np.ndarray) -> "SpacecraftState":
        return cls(*(float(v) for v in x))


@dataclass(frozen=True)
class ConvexState:
    """Convexified state: kinematics as SpacecraftState, z = ln m."""

    r: float
    theta: float
    phi: float
    v_r: float
    v_t: float
    v_n: float
    z: float

    def __post_init__(self) -> None:
        if not self.r > 0.0:
            raise DomainError("radius must be positive")
        if abs(self.phi) >= PHI_MAX:
            raise SingularStateError("latitude too close to +/-90 deg")

    def as_array(self) -> np.ndarray:
        return np.array(
            [self.r, self.theta, self.phi, self.v_r, self.v_t, self.v_n, self.z]
        )

    @classmethod
    def from_array(cls, x: np.ndarray) -> "ConvexState":
        return cls(*(float(v) for v in x))


@dataclass(frozen=True)
class ControlRTN:
    """Thrust vector in the radial/eastward/northward frame (force units)."""

    t_r: float = 0.0
    t_t: float = 0.0
    t_n: float = 0.0

    @property
    def magnitude(self) -> float:
        return math.sqrt(self.t_r**2 + self.t_t**2 + self.t_n**2)

    def as_array(self) -> np.ndarray:
        return np.array([self.t_r, self.t_t, self.t_n])


@dataclass(frozen=True)
class ConvexControl:
    """Acceleration controls (u_r, u_t, u_n) and the magnitude slack u_N."""

    u_r: float = 0.0
    u_t: float = 0.0
    u_n: float = 0.0
    u_N: float = 0.0

    def __post_init__(self) -> None:
        if self.u_N < -1e-9:
            raise DomainError("u_N must be nonnegative")

    def as_array(self) -> np.ndarray:
        return np.array([self.u_r, self.u_t, self.u_n, self.u_N])


# ---------------------------------------------------------------------------
# Right-hand sides
# ---------------------------------------------------------------------------


def gravity_accel(r_vec: np.ndarray, mu: float) -> np.ndarray:
    """Inverse-square gravitational acceleration -mu/|r|^3 * r."""
    r_vec = np.asarray(r_vec, dtype=float)
    rn = float(np.linalg.norm(r_vec))
    if rn <= 0.0:
        raise DomainError("gravity undefined at zero radius")
    return -mu / rn**3 * r_vec


def coast_rhs_array(states: np.ndarray, mu: float) -> np.ndarray:
    """Uncontrolled state derivative for an array of (..., 7) states.

    The mass/log-mass slot derivative is zero; thrust enters additively via
    the control terms (see :func:`affine_rhs_array`), so this kernel serves
    both the physical and the convex formulation.
    """
    states = np.asarray(states, dtype=float)
    r = states[..., R]
    ph = states[..., PH]
    vr = states[..., VR]
    vt = states[..., VT]
    vn = states[..., VN]
    if np.any(r <= 0.0):
        raise DomainError("radius must be positive")
    if np.any(np.abs(ph) >= PHI_MAX):
        raise SingularStateError("latitude too close to +/-90 deg")
    tanph = np.tan(ph)
    out = np.zeros_like(states)
    out[..., R] = vr
    out[..., TH] = vt / (r * np.cos(ph))
    out[..., PH] = vn / r
    out[..., VR] = (vt**2 + vn**2) / r - mu / r**2
    out[..., VT] = (-vr * vt + vt * vn * tanph) / r
    out[..., VN] = (-vr * vn - vt**2 * tanph) / r
    return out


def affine_rhs_array(
    states: np.ndarray, controls: np.ndarray, mu: float, c: float
) -> np.ndarray:
    """Control-affine derivative of (..., 7) convex states with (..., 4) controls."""
    f = coast_rhs_array(states, mu)
    controls = np.asarray(controls, dtype=float)
    f[..., VR] += controls[..., UR]
    f[..., VT] += controls[..., UT]
    f[..., VN] += controls[..., UN]
    f[..., MZ] = -controls[..., UNORM] / c
    return f


def eom_rhs(x: SpacecraftState, u: ControlRTN, scen: Scenario) -> np.ndarray:
    """Full nonlinear state derivative (rdot, ..., mdot) with thrust u."""
    f = coast_rhs_array(x.as_array(), scen.mu)
    f[VR] += u.t_r / x.m
    f[VT] += u.t_t / x.m
    f[VN] += u.t_n / x.m
    f[MZ] = -u.magnitude / scen.c
    return f


def affine_rhs(x: ConvexState, u: ConvexControl, scen: Scenario) -> np.ndarray:
    """Control-affine derivative of the convex state (zdot = -u_N/c)."""
    return affine_rhs_array(x.as_array(), u.as_array(), scen.mu, scen.c)


# ---------------------------------------------------------------------------
# Lossless variable changes
# ---------------------------------------------------------------------------


def to_convex_state(x: SpacecraftState) -> ConvexState:
    return ConvexState(x.r, x.theta, x.phi, x.v_r, x.v_t, x.v_n, math.log(x.m))


def from_convex_state(x: ConvexState) -> SpacecraftState:
    return SpacecraftState(x.r, x.theta, x.phi, x.v_r, x.v_t, x.v_n, math.exp(x.z))


def to_convex_control(u: ControlRTN, m: float) -> ConvexControl:
    """Map thrust to acceleration controls: u_i = T_i/m, u_N = |T|/m."""
    if not m > 0.0:
        raise DomainError("mass must be positive")
    return ConvexControl(u.t_r / m, u.t_t / m, u.t_n / m, u.magnitude / m)


def from_convex_control(u: ConvexControl, m: float) -> ControlRTN:
    if not m > 0.0:
        raise DomainError("mass must be positive")
    return ControlRTN(u.u_r * m, u.u_t * m, u.u_n * m)


# ---------------------------------------------------------------------------
# Frame conversions and the coasting first guess
# ---------------------------------------------------------------------------


def wrap_to_pi(angle: float | np.ndarray) -> float | np.ndarray:
    """Wrap an angle (difference) into (-pi, pi]."""
    return -((-np.asarray(angle) + math.pi) % (2.0 * math.pi) - math.pi)


def state_to_cartesian(state: SpacecraftState | ConvexState) -> tuple[np.ndarray, np.ndarray]:
    """Inertial position and velocity vectors of a state."""
    ct, st = math.cos(state.theta), math.sin(state.theta)
    cp, sp = math.cos(state.phi), math.sin(state.phi)
    rhat = np.array([ct * cp, st * cp, sp])
    east = np.array([-st, ct, 0.0])
    north = np.cross(rhat, east)
    r_vec = state.r * rhat
    v_vec = state.v_r * rhat + state.v_t * east + state.v_n * north
    return r_vec, v_vec


def cartesian_to_state(
    r_vec: np.ndarray,
    v_vec: np.ndarray,
    m: float,
    theta_hint: float | None = None,
) -> SpacecraftState:
    """Inverse of :func:`state_to_cartesian`.

    theta is wrapped by atan2 unless a hint is given, in which case the
    returned right ascension is the unwrapped value closest to the hint.
    """
    r_vec = np.asarray(r_vec, dtype=float)
    v_vec = np.asarray(v_vec, dtype=float)
    r = float(np.linalg.norm(r_vec))
    if r <= 0.0:
        raise DomainError("radius must be positive")
    phi = math.asin(r_vec[2] / r)
    theta = math.atan2(r_vec[1], r_vec[0])
    if theta_hint is not None:
        theta = theta_hint + float(wrap_to_pi(theta - theta_hint))
    rhat = r_vec / r
    east = np.array([-math.sin(theta), math.cos(theta), 0.0])
    north = np.cross(rhat, east)
    return SpacecraftState(
        r=r,
        theta=theta,
        phi=phi,
        v_r=float(v_vec @ rhat),
        v_t=float(v_vec @ east),
        v_n=float(v_vec @ north),
        m=m,
    )


def coasting_state(scen: Scenario, sat: int | str, t: float) -> SpacecraftState:
    """State on the unperturbed initial circular orbit at time t.

    The orbit has radius r0 and the satellite's initial phase and
    inclination; the argument from the (ascending-node) start point advances
    at the circular rate sqrt(mu/r0^3).  Mass stays at m0.
    """
    idx = sat_index(sat)
    theta0 = scen.theta0(idx)
    inc = scen.inc(idx)
    n = scen.mean_motion
    u = n * t

    p_hat = np.array([math.cos(theta0), math.sin(theta0), 0.0])
    t_hat = np.array([-math.sin(theta0), math.cos(theta0), 0.0])
    q_hat = math.cos(inc) * t_hat + math.sin(inc) * np.array([0.0, 0.0, 1.0])

    r_vec = scen.r0 * (math.cos(u) * p_hat + math.sin(u) * q_hat)
    v_c = scen.circular_speed(scen.r0)
    v_vec = v_c * (-math.sin(u) * p_hat + math.cos(u) * q_hat)
    return cartesian_to_state(r_vec, v_vec, scen.m0, theta_hint=theta0 + u)


def specific_energy(state: SpacecraftState, mu: float) -> float:
    v2 = state.v_r**2 + state.v_t**2 + state.v_n**2
    return 0.5 * v2 - mu / state.r
