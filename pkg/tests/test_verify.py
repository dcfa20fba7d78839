import math

import numpy as np
import pytest

from corvx.dynamics import (
    SAT_I,
    SAT_II,
    Scenario,
    SpacecraftState,
    coasting_state,
)
from corvx.scvx import initial_reference
from corvx.transcription import TrajectoryPair, build_mesh
from corvx.verify import (
    DataInconsistencyError,
    ThrustProfile,
    constraint_residuals,
    final_inclination_deg,
    hohmann_oracle,
    phasing_split,
    plane_change_deg,
    propagate_nonlinear,
    relaxation_exactness,
    thrust_profile,
)

SCEN = Scenario(tf=10.5)


def zero_thrust(tf: float) -> ThrustProfile:
    return ThrustProfile(np.array([0.0, tf]), np.zeros((2, 3)))


class TestPropagation:
    def test_circular_coast_closes(self):
        x0 = coasting_state(SCEN, "II", 0.0)
        hist = propagate_nonlinear(
            x0, zero_thrust(2 * math.pi), SCEN, (0.0, 2 * math.pi),
            t_eval=np.array([2 * math.pi]),
        )
        expected = x0.as_array()
        expected[1] += 2 * math.pi  # theta advances one revolution, unwrapped
        np.testing.assert_allclose(hist.terminal, expected, atol=1e-8)

    def test_mass_constant_without_thrust(self):
        x0 = coasting_state(SCEN, "I", 0.0)
        hist = propagate_nonlinear(
            x0, zero_thrust(5.0), SCEN, (0.0, 5.0), t_eval=np.array([5.0])
        )
        assert hist.terminal[6] == pytest.approx(1.0, abs=1e-14)

    def test_linear_mass_depletion_under_constant_thrust(self):
        x0 = coasting_state(SCEN, "II", 0.0)
        profile = ThrustProfile(np.array([0.0, 0.5]), np.array([[0, 0.1, 0], [0, 0.1, 0.0]]))
        hist = propagate_nonlinear(x0, profile, SCEN, (0.0, 0.5), t_eval=np.array([0.5]))
        assert hist.terminal[6] == pytest.approx(0.95, abs=1e-12)

    def test_terminal_mass_matches_thrust_quadrature(self):
        """m(tf) = m0 - (1/c) * integral |T| dt for any interpolated profile."""
        rng = np.random.default_rng(8)
        times = np.linspace(0.0, 4.0, 17)
        thrust = rng.uniform(-0.05, 0.05, (17, 3))
        profile = ThrustProfile(times, thrust)
        x0 = coasting_state(SCEN, "II", 0.0)
        hist = propagate_nonlinear(x0, profile, SCEN, (0.0, 4.0), t_eval=np.array([4.0]))
        from scipy.integrate import quad

        integral, _err = quad(
            lambda t: float(np.linalg.norm(profile.at(t))),
            0.0, 4.0, points=times[1:-1], limit=400, epsabs=1e-13, epsrel=1e-13,
        )
        assert hist.terminal[6] == pytest.approx(1.0 - integral / SCEN.c, abs=1e-9)


class TestRelaxationExactness:
    def _traj(self, controls) -> TrajectoryPair:
        mesh = build_mesh(1.0, controls.shape[1])
        states = initial_reference(Scenario(tf=1.0), mesh).states
        return TrajectoryPair(states, controls, mesh)

    def test_tight_cone_zero_gap(self):
        u = np.zeros((2, 4, 4))
        u[..., 0] = 0.1
        u[..., 3] = 0.1
        assert relaxation_exactness(self._traj(u)) == 0.0

    def test_three_four_five(self):
        u = np.zeros((2, 3, 4))
        u[..., 0] = 0.06
        u[..., 1] = 0.08
        u[..., 3] = 0.1
        assert relaxation_exactness(self._traj(u)) == pytest.approx(0.0, abs=1e-15)

    def test_coast_slack_ignored_below_threshold(self):
        u = np.zeros((2, 3, 4))
        u[..., 3] = 1e-9  # interior-point residue on a coast node
        assert relaxation_exactness(self._traj(u), t_max=0.1) == 0.0

    def test_gap_detected_on_burn_nodes(self):
        u = np.zeros((2, 3, 4))
        u[..., 0] = 0.05
        u[..., 3] = 0.08
        assert relaxation_exactness(self._traj(u), t_max=0.1) == pytest.approx(0.03)


class TestConstraintResiduals:
    def test_constructed_terminal_states_zero_residuals(self):
        scen = Scenario(rf=1.0, tf=2 * math.pi, theta0_I=0.0, theta0_II=0.0)
        traj = initial_reference(scen, build_mesh(scen.tf, 41))
        rep = constraint_residuals(traj, scen)
        assert rep.max_terminal_residual <= 1e-7
        assert rep.propellant_total == pytest.approx(0.0, abs=1e-12)
        assert rep.max_defect_vs_propagation <= 2e-5

    def test_coast_to_wrong_radius_detected(self):
        traj = initial_reference(SCEN, build_mesh(SCEN.tf, 21))
        rep = constraint_residuals(traj, SCEN)
        assert rep.terminal_residuals["radius"] == pytest.approx(0.2, abs=1e-12)


class TestHohmannOracle:
    def test_nominal_numbers(self):
        dv, dm = hohmann_oracle(1.0, 1.2, 1.0)
        assert dv == pytest.approx(0.08694, abs=2e-5)
        assert dm == pytest.approx(0.0833, abs=2e-4)

    def test_matches_published_transfer_cost(self):
        _, dm = hohmann_oracle(1.0, 1.2, 1.0)
        assert dm == pytest.approx(0.083, abs=0.001)

    def test_degenerate_transfer(self):
        dv, dm = hohmann_oracle(1.0, 1.0 + 1e-12, 1.0)
        assert dv == pytest.approx(0.0, abs=1e-11)
        assert dm == pytest.approx(0.0, abs=1e-11)

    def test_rejects_inward(self):
        with pytest.raises(ValueError):
            hohmann_oracle(1.2, 1.0, 1.0)


class TestPhasingSplit:
    def test_null_phasing(self):
        rep = phasing_split((0.083, 0.083), 0.083)
        assert rep.family_label == "none"
        assert rep.dm_phasing == pytest.approx((0.0, 0.0))

    def test_plain_subtraction(self):
        rep = phasing_split((0.09, 0.10), 0.083, theta_span_ii=3 * math.pi)
        assert rep.dm_phasing == pytest.approx((0.007, 0.017))
        assert rep.family_label == "A"

    def test_family_b_by_revolutions(self):
        rep = phasing_split((0.084, 0.16), 0.083, theta_span_ii=3.9 * math.pi)
        assert rep.family_label == "B"

    def test_negative_phasing_rejected(self):
        with pytest.raises(DataInconsistencyError):
            phasing_split((0.02, 0.05), 0.083)


class TestGeometry:
    def test_equatorial_inclination_zero(self):
        traj = initial_reference(SCEN, build_mesh(SCEN.tf, 11))
        assert final_inclination_deg(traj) == pytest.approx(0.0, abs=1e-9)

    def test_inclined_coast_keeps_inclination(self):
        scen = Scenario(tf=10.5, inc_II=math.radians(10.0))
        traj = initial_reference(scen, build_mesh(scen.tf, 11))
        assert final_inclination_deg(traj, "II") == pytest.approx(10.0, abs=1e-9)
        assert plane_change_deg(traj, scen, "II") == pytest.approx(0.0, abs=1e-9)

    def test_thrust_profile_scales_by_mass(self):
        traj = initial_reference(SCEN, build_mesh(SCEN.tf, 5))
        traj.states[0, :, 6] = math.log(0.5)
        traj.controls[0, :, 0] = 0.2
        prof = thrust_profile(traj, SAT_I)
        np.testing.assert_allclose(prof.thrust[:, 0], 0.1)


@pytest.mark.slow
class TestOnConvergedRun:
    @pytest.fixture(scope="class")
    def converged(self):
        from corvx.scvx import run_scvx

        rep = run_scvx(SCEN, build_mesh(SCEN.tf, 101))
        assert rep.converged
        return rep.final

    def test_relaxation_exactness_within_tolerance(self, converged):
        gap = relaxation_exactness(converged, t_max=SCEN.t_max)
        assert gap <= 1e-6 * SCEN.t_max

    def test_terminal_rows_hold(self, converged):
        rep = constraint_residuals(converged, SCEN)
        assert rep.max_terminal_residual <= 1e-7

    def test_hohmann_lower_bounds_total(self, converged):
        _, dm_bound = hohmann_oracle(SCEN.r0, SCEN.rf, SCEN.c, SCEN.mu, SCEN.m0)
        rep = constraint_residuals(converged, SCEN)
        assert min(rep.propellant) >= dm_bound - 1e-4

    def test_labels_symmetric_under_exchange(self, converged):
        swapped = TrajectoryPair(
            converged.states[::-1].copy(), converged.controls[::-1].copy(),
            converged.mesh,
        )
        assert relaxation_exactness(swapped, t_max=SCEN.t_max) == pytest.approx(
            relaxation_exactness(converged, t_max=SCEN.t_max), abs=1e-15
        )

    def test_defect_gap_shrinks_across_refinement_rounds(self, converged):
        """The transcription-vs-propagation terminal gap decreases across
        refinement rounds toward a fixed tolerance.  The trend must be
        strictly downward overall; per-round wobble is bounded (signed local
        errors re-cancel differently as the burn structure sharpens)."""
        from corvx.mesh import estimate_errors, interpolate_onto, refine, spline_reconstruct
        from corvx.scvx import run_scvx

        traj = converged
        rep0 = estimate_errors(spline_reconstruct(traj, SCEN), traj.mesh, SCEN)
        tol = rep0.max_eta / 60.0
        gaps = [constraint_residuals(traj, SCEN).max_defect_vs_propagation]
        for _ in range(2):
            rep = estimate_errors(spline_reconstruct(traj, SCEN), traj.mesh, SCEN)
            new_mesh = refine(traj.mesh, rep, tol=tol)
            if new_mesh.m == traj.mesh.m:
                break
            warm = interpolate_onto(traj, new_mesh, SCEN)
            traj = run_scvx(SCEN, new_mesh, initial_ref=warm).final
            gaps.append(constraint_residuals(traj, SCEN).max_defect_vs_propagation)
        assert gaps[-1] < gaps[0], gaps
        for a, b in zip(gaps, gaps[1:]):
            assert b <= 1.25 * a, gaps
