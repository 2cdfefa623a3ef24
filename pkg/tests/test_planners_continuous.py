import math

import pytest

from helpers import open_fleet
from mrplan.abstraction import to_continuous
from mrplan.corpus import random_fleet_scenario
from mrplan.plans import PlanRequest
from mrplan.planners import plan
from mrplan.planners.continuous import DELTA_PRIM, axis_time_to_rest, integrate_axis
from mrplan.scenario import DynamicsModel
from mrplan.validation import validate_continuous


class TestAxisOracle:
    def test_trapezoid_closed_form(self):
        # d >= v^2/a: t* = d/v + v/a
        assert abs(axis_time_to_rest(1.0, 0.0, 0.5, 2.0) - 2.25) < 1e-12

    def test_triangle_profile(self):
        # short hop that never reaches v_max: t = 2*sqrt(d/a)
        d, a = 0.04, 2.0
        assert abs(axis_time_to_rest(d, 0.0, 10.0, a) - 2 * math.sqrt(d / a)) < 1e-12

    def test_overshoot_brakes_first(self):
        t = axis_time_to_rest(0.0, 0.5, 0.5, 2.0)
        assert t > 0  # must brake, back up, and re-stop

    def test_integrate_clamps_velocity(self):
        p, v = integrate_axis(0.0, 0.4, 2.0, 0.25, -0.5, 0.5)
        assert v == 0.5
        # position: accelerate 0.05 s to the bound, cruise the rest
        t_hit = (0.5 - 0.4) / 2.0
        expected = 0.4 * t_hit + 0.5 * 2 * t_hit ** 2 + 0.5 * (0.25 - t_hit)
        assert abs(p - expected) < 1e-15


class TestKinodynamicPlanner:
    def test_agent_already_at_goal(self):
        inst = open_fleet([((1.0, 2.5), (1.0, 2.5))])
        out = plan(PlanRequest(instance=to_continuous(inst), budget_s=10), "cont_lattice")
        assert out.status == "solved"
        tr = out.plans.trajectories[0]
        assert tr.end_time == 0.0
        assert len(tr.times) == 1

    def test_straight_run_arrival_window(self):
        inst = open_fleet([((1.0, 2.5), (2.0, 2.5))])
        out = plan(PlanRequest(instance=to_continuous(inst), budget_s=30), "cont_lattice")
        assert out.status == "solved"
        T = out.plans.trajectories[0].end_time
        assert 2.25 - 1e-9 <= T <= 2.25 + 2 * DELTA_PRIM + 1e-9

    def test_right_angle_crossing_validator_clean(self):
        inst = open_fleet([((1.0, 2.5), (4.0, 2.5)), ((2.5, 1.0), (2.5, 4.0))],
                          r=[0.08, 0.06])
        ci = to_continuous(inst)
        out = plan(PlanRequest(instance=ci, budget_s=60), "cont_lattice")
        assert out.status == "solved"
        rep = validate_continuous(out.plans, inst)
        assert rep.feasible, rep.violations[:4]
        # strictly positive pairwise footprint distance at all samples
        trajs = out.plans.trajectories
        horizon = max(tr.end_time for tr in trajs)
        t = 0.0
        while t <= horizon:
            p0 = trajs[0].pose_at(t)
            p1 = trajs[1].pose_at(t)
            assert math.hypot(p0.x - p1.x, p0.y - p1.y) > 0.08 + 0.06
            t += 1.0 / 60.0

    def test_obstacle_detour(self):
        obstacles = [[(2.2, 2.0), (2.8, 2.0), (2.8, 3.0), (2.2, 3.0)]]
        inst = open_fleet([((1.0, 2.5), (4.0, 2.5))], obstacles=obstacles)
        ci = to_continuous(inst)
        out = plan(PlanRequest(instance=ci, budget_s=60), "cont_lattice")
        assert out.status == "solved"
        assert validate_continuous(out.plans, inst).feasible
        # the path must be longer than the straight line through the box
        assert out.cost.soc_m > 3.0 + 0.05

    def test_dynamics_bounds_in_output(self):
        inst = random_fleet_scenario(seed=11, n_agents=2, preset="empty", dynamics="double")
        ci = to_continuous(inst)
        out = plan(PlanRequest(instance=ci, budget_s=60), "cont_lattice")
        assert out.status == "solved"
        eps = 1e-6
        for tr in out.plans.trajectories:
            for k in range(1, len(tr.times)):
                dt = tr.times[k] - tr.times[k - 1]
                ax = (tr.vels[k][0] - tr.vels[k - 1][0]) / dt
                ay = (tr.vels[k][1] - tr.vels[k - 1][1]) / dt
                assert -2.0 - eps <= ax <= 2.0 + eps
                assert -2.0 - eps <= ay <= 2.0 + eps
                assert abs(tr.vels[k][0]) <= 0.5 + eps
                assert abs(tr.vels[k][1]) <= 0.5 + eps

    def test_single_integrator_supported(self):
        inst = open_fleet([((1.0, 1.0), (3.0, 1.0))], dynamics=DynamicsModel.single(0.5))
        ci = to_continuous(inst)
        out = plan(PlanRequest(instance=ci, budget_s=30), "cont_lattice")
        assert out.status == "solved"
        assert abs(out.plans.trajectories[0].end_time - 4.0) < 0.5 + 1e-9

    def test_determinism(self):
        inst = random_fleet_scenario(seed=13, n_agents=2, preset="scatter", dynamics="double")
        ci = to_continuous(inst)
        a = plan(PlanRequest(instance=ci, budget_s=60), "cont_lattice")
        b = plan(PlanRequest(instance=ci, budget_s=60), "cont_lattice")
        assert a.canonical_bytes() == b.canonical_bytes()
