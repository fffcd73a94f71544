import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from barrier_la import (
    GameSpec,
    JointState,
    LearnerConfig,
    Model,
    NoConvergenceWarning,
    PayoffMatrix,
    Stability,
    StepTooLarge,
    Trajectory,
    TrajectoryKind,
    WrongModel,
    drives,
    expected_increment_oracle,
    fixed_points,
    integrate,
    jacobian,
    mixed_equilibrium,
    vector_field,
)

from conftest import random_game


def fd_jacobian(spec, x, p_max, h=1e-6):
    """Central finite differences of the drift field."""
    out = np.empty((2, 2))
    for j, (dp, dq) in enumerate(((h, 0.0), (0.0, h))):
        wp = vector_field(spec, JointState(x.p1 + dp, x.q1 + dq), p_max)
        wm = vector_field(spec, JointState(x.p1 - dp, x.q1 - dq), p_max)
        out[0, j] = (wp.w1 - wm.w1) / (2 * h)
        out[1, j] = (wp.w2 - wm.w2) / (2 * h)
    return out


def stable_points(spec, p_max):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NoConvergenceWarning)
        pts = fixed_points(spec, p_max)
    return [fp for fp in pts if fp.stability is Stability.STABLE]


def all_points(spec, p_max):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NoConvergenceWarning)
        return fixed_points(spec, p_max)


class TestDrives:
    def test_case1_at_center(self, case1):
        d = drives(case1, JointState(0.5, 0.5))
        assert d.d1a == pytest.approx(0.4, abs=1e-15)
        assert d.d2a == pytest.approx(0.45, abs=1e-15)

    def test_endpoints_pick_matrix_columns(self, case3):
        d = drives(case3, JointState(0.3, 1.0))
        assert (d.d1a, d.d2a) == (case3.R.r11, case3.R.r21)
        d = drives(case3, JointState(0.0, 0.2))
        assert (d.d1b, d.d2b) == (case3.C.r21, case3.C.r22)


class TestVectorField:
    def test_zero_at_mixed_equilibrium_without_barrier(self, case1):
        x = JointState(*mixed_equilibrium(case1))
        w = vector_field(case1, x, p_max=1.0)
        assert w.norm() < 1e-9

    def test_case2_reported_attractor_is_nearly_stationary(self, case2):
        w = vector_field(case2, JointState(0.917, 0.040), p_max=0.99)
        assert w.norm() < 1e-3

    def test_case1_center_value(self, case1):
        w = vector_field(case1, JointState(0.5, 0.5), p_max=0.99)
        assert w.w1 == pytest.approx(-0.01225, abs=1e-12)
        assert w.w2 == pytest.approx(-0.018375, abs=1e-12)

    def test_p_max_validated(self, case1):
        with pytest.raises(ValueError):
            vector_field(case1, JointState(0.5, 0.5), p_max=0.3)


class TestExpectedIncrementOracle:
    def test_requires_p_model(self, case1):
        cfg = LearnerConfig(theta=0.1, p_max=0.99)
        with pytest.raises(WrongModel):
            expected_increment_oracle(case1.with_model(Model.S), JointState(0.5, 0.5), cfg)

    @pytest.mark.parametrize("preset_name", ["case1", "case2", "case3"])
    @pytest.mark.parametrize("p_max", [0.99, 0.999, 1.0])
    def test_matches_vector_field_on_grid(self, preset_name, p_max, request):
        spec = request.getfixturevalue(preset_name)
        cfg = LearnerConfig(theta=0.1, p_max=p_max)
        worst = 0.0
        for p1 in np.linspace(0.0, 1.0, 11):
            for q1 in np.linspace(0.0, 1.0, 11):
                x = JointState(p1, q1)
                w = vector_field(spec, x, p_max)
                o = expected_increment_oracle(spec, x, cfg)
                worst = max(worst, abs(w.w1 - o.w1), abs(w.w2 - o.w2))
        assert worst < 1e-12

    def test_theta_cancels(self, case1):
        x = JointState(0.37, 0.81)
        a = expected_increment_oracle(case1, x, LearnerConfig(theta=0.5, p_max=0.99))
        b = expected_increment_oracle(case1, x, LearnerConfig(theta=0.001, p_max=0.99))
        assert a.w1 == pytest.approx(b.w1, abs=1e-13)
        assert a.w2 == pytest.approx(b.w2, abs=1e-13)


class TestJacobian:
    @pytest.mark.parametrize("preset_name", ["case1", "case2", "case3"])
    def test_matches_finite_differences(self, preset_name, request):
        spec = request.getfixturevalue(preset_name)
        rng = np.random.default_rng(77)
        for _ in range(100):
            x = JointState(rng.random(), rng.random())
            jac = jacobian(spec, x, 0.99)
            ref = fd_jacobian(spec, x, 0.99)
            rel = np.linalg.norm(ref - jac) / max(np.linalg.norm(jac), 1e-12)
            assert rel < 1e-6

    def test_case1_mixed_point_is_negative_definite(self, case1):
        x = JointState(*mixed_equilibrium(case1))
        jac = jacobian(case1, x, p_max=0.999)
        det = np.linalg.det(jac)
        tr = np.trace(jac)
        assert det > 0 and tr < 0

    def test_case3_mixed_point_is_a_saddle(self, case3):
        x = JointState(*mixed_equilibrium(case3))
        jac = jacobian(case3, x, p_max=0.99)
        assert np.linalg.det(jac) < 0

    def test_random_games_match_finite_differences(self):
        rng = np.random.default_rng(123)
        for _ in range(50):
            spec = random_game(rng)
            x = JointState(rng.random(), rng.random())
            jac = jacobian(spec, x, 0.995)
            ref = fd_jacobian(spec, x, 0.995)
            rel = np.linalg.norm(ref - jac) / max(np.linalg.norm(jac), 1e-12)
            assert rel < 1e-6


class TestIntegrate:
    def test_fixed_point_start_is_constant(self, case1):
        fp = stable_points(case1, 0.99)[0]
        traj = integrate(case1, fp.x, 0.99)
        assert traj.kind is TrajectoryKind.ODE
        assert len(traj) == 1
        assert traj.x[0] == pytest.approx([fp.x.p1, fp.x.q1])

    def test_case1_flow_reaches_the_stable_point(self, case1):
        fp = stable_points(case1, 0.99)[0]
        traj = integrate(case1, JointState(0.5, 0.5), 0.99, step=0.01, t_max=1e4)
        assert traj.terminal().p1 == pytest.approx(fp.x.p1, abs=1e-6)
        assert traj.terminal().q1 == pytest.approx(fp.x.q1, abs=1e-6)

    def test_case3_upper_start_reaches_upper_equilibrium(self, case3):
        upper = max(stable_points(case3, 0.99), key=lambda fp: fp.x.p1)
        traj = integrate(case3, JointState(0.9, 0.9), 0.99, step=0.01, t_max=1e4)
        assert traj.terminal().p1 == pytest.approx(upper.x.p1, abs=1e-6)
        assert traj.terminal().q1 == pytest.approx(upper.x.q1, abs=1e-6)

    def test_huge_step_raises(self, case1):
        with pytest.raises(StepTooLarge):
            integrate(case1, JointState(0.5, 0.5), 0.99, step=1e4, t_max=1e5)

    def test_times_strictly_increase_and_states_stay_in_box(self, case2):
        traj = integrate(case2, JointState(0.3, 0.8), 0.99, step=0.05, t_max=200)
        assert np.all(np.diff(traj.t) > 0)
        assert traj.x.min() >= 0.0 and traj.x.max() <= 1.0


class TestFixedPoints:
    def test_case1_single_stable_interior_point(self, case1):
        pts = all_points(case1, 0.99)
        assert len(pts) == 1
        fp = pts[0]
        assert fp.stability is Stability.STABLE
        assert fp.drift_norm < 1e-12
        assert fp.x.p1 == pytest.approx(0.65195774, abs=1e-7)
        assert fp.x.q1 == pytest.approx(0.31178326, abs=1e-7)

    def test_case1_point_approaches_mixed_equilibrium_monotonically(self, case1):
        x_opt = np.array(mixed_equilibrium(case1))
        dists = []
        for p_min in (0.01, 0.005, 0.002, 0.001):
            pts = stable_points(case1, 1.0 - p_min)
            assert len(pts) == 1
            dists.append(np.linalg.norm([pts[0].x.p1, pts[0].x.q1] - x_opt))
        assert all(a > b for a, b in zip(dists, dists[1:]))

    def test_case2_single_stable_point_near_corner(self, case2):
        pts = all_points(case2, 0.99)
        assert len(pts) == 1
        assert pts[0].stability is Stability.STABLE
        assert pts[0].x.p1 == pytest.approx(0.917, abs=2e-3)
        assert pts[0].x.q1 == pytest.approx(0.040, abs=2e-3)

    def test_case3_structure_and_frozen_locations(self, case3):
        """Two stable roots plus a saddle; locations are regression anchors
        verified independently by the drift norm and the integrator tests."""
        pts = all_points(case3, 0.999)
        labels = [fp.stability for fp in pts]
        assert labels == [Stability.STABLE, Stability.SADDLE, Stability.STABLE]
        low, saddle, high = pts
        assert (low.x.p1, low.x.q1) == pytest.approx(
            (0.0015027598, 0.0020040090), abs=1e-8
        )
        assert (high.x.p1, high.x.q1) == pytest.approx(
            (0.9969848787, 0.9969939332), abs=1e-8
        )
        assert (saddle.x.p1, saddle.x.q1) == pytest.approx(
            (0.5015046195, 0.6666760476), abs=1e-8
        )
        assert saddle.det < 0
        for fp in pts:
            assert fp.drift_norm < 1e-12

    def test_roots_sorted_by_p1(self, case3):
        pts = all_points(case3, 0.99)
        assert [fp.x.p1 for fp in pts] == sorted(fp.x.p1 for fp in pts)

    def test_stability_labels_consistent_with_det_trace(self, case3):
        for fp in all_points(case3, 0.995):
            if fp.stability is Stability.STABLE:
                assert fp.det > 0 and fp.trace < 0
            elif fp.stability is Stability.SADDLE:
                assert fp.det < 0

    def test_p_max_one_rejected(self, case1):
        with pytest.raises(ValueError):
            fixed_points(case1, 1.0)

    def test_failed_seeds_surface_as_warning(self, case3):
        with pytest.warns(NoConvergenceWarning):
            fixed_points(case3, 0.999)


class TestBarrierContainment:
    @settings(max_examples=150, deadline=None)
    @given(
        r=st.lists(st.floats(0.05, 1.0), min_size=4, max_size=4),
        c=st.lists(st.floats(0.05, 1.0), min_size=4, max_size=4),
        q1=st.floats(0.0, 1.0),
        p_max=st.floats(0.9, 0.999),
    )
    def test_flow_points_inward_at_the_barriers(self, r, c, q1, p_max):
        spec = GameSpec(Model.P, PayoffMatrix(*r), PayoffMatrix(*c))
        p_min = 1.0 - p_max
        w_lo = vector_field(spec, JointState(p_min, q1), p_max)
        w_hi = vector_field(spec, JointState(p_max, q1), p_max)
        assert w_lo.w1 > 0.0
        assert w_hi.w1 < 0.0

    def test_unit_square_corner_value(self, case1):
        # At p1 = 0 the drift reduces to p_min * d2a.
        p_max = 0.99
        d = drives(case1, JointState(0.0, 0.0))
        w = vector_field(case1, JointState(0.0, 0.0), p_max)
        assert w.w1 == pytest.approx((1.0 - p_max) * d.d2a, abs=1e-15)


class TestTrajectoryType:
    def test_rejects_decreasing_times(self):
        with pytest.raises(ValueError):
            Trajectory(
                TrajectoryKind.ODE,
                np.array([0.0, 1.0, 0.5]),
                np.full((3, 2), 0.5),
            )

    def test_rejects_states_outside_unit_square(self):
        with pytest.raises(ValueError):
            Trajectory(
                TrajectoryKind.ODE, np.array([0.0, 1.0]), np.array([[0.5, 0.5], [1.2, 0.5]])
            )
