import math

import pytest

from helpers import cell_scenario, open_fleet
from mrplan.abstraction import RoadmapParams, grid_to_continuous, to_grid, to_roadmap
from mrplan.corpus import random_fleet_scenario
from mrplan.geometry import Point2
from mrplan.plans import (
    ContinuousPlan,
    GridPlan,
    MalformedPlan,
    PlanRequest,
    RoadmapPlan,
    RoadmapVisit,
    Trajectory,
)
from mrplan.scenario import DynamicsModel
from mrplan.validation import (
    AGENT_OVERLAP,
    CAPACITY_EXCEEDED,
    CO_OCCUPANCY,
    CORNER_MEET,
    DYNAMICS_BOUND,
    EDGE_SWAP,
    HEADWAY_VIOLATION,
    HEAD_ON_SWAP,
    OBSTACLE_OVERLAP,
    StateSpaceTooLarge,
    UnknownEdge,
    grid_moves_conflict,
    joint_state_bfs,
    validate_continuous,
    validate_grid,
    validate_roadmap,
)
import mrplan.planners as planners


def gplan(paths, cell_side=1.0, dt=1.0):
    return GridPlan(agent_ids=tuple(range(len(paths))),
                    paths=tuple(tuple(p) for p in paths),
                    cell_side=cell_side, origin=(0.0, 0.0), dt=dt)


class TestGridMoveConflicts:
    def test_co_occupancy(self):
        assert grid_moves_conflict((0, 0), (1, 0), (2, 0), (1, 0), 4) == CO_OCCUPANCY

    def test_edge_swap(self):
        assert grid_moves_conflict((0, 0), (1, 0), (1, 0), (0, 0), 4) == EDGE_SWAP

    def test_orthogonal_vacate_is_corner_meet(self):
        # B leaves the cell A enters, at right angles: discs pass within
        # sqrt(2)*r_com < 2*r_com
        assert grid_moves_conflict((0, 0), (1, 0), (1, 0), (1, 1), 4) == CORNER_MEET

    def test_follow_same_direction_ok(self):
        assert grid_moves_conflict((0, 0), (1, 0), (1, 0), (2, 0), 4) is None

    def test_antiparallel_adjacent_rows_touch_ok(self):
        # passing in adjacent rows: minimum distance exactly 2*r_com (feasible)
        assert grid_moves_conflict((0, 0), (1, 0), (1, 1), (0, 1), 4) is None

    def test_diagonal_cross_m8(self):
        from mrplan.validation import DIAGONAL_CROSS
        assert grid_moves_conflict((0, 0), (1, 1), (1, 0), (0, 1), 8) == DIAGONAL_CROSS

    def test_matches_dense_sampling_oracle(self):
        # the closed-form interval minimum agrees with dense time sampling
        import itertools
        moves = [(0, 0), (1, 0), (-1, 0), (0, 1), (0, -1)]
        cells = [(x, y) for x in range(-1, 2) for y in range(-1, 2)]
        for ua in [(0, 0)]:
            for ub in cells:
                if ua == ub:
                    continue
                for da, db in itertools.product(moves, moves):
                    va = (ua[0] + da[0], ua[1] + da[1])
                    vb = (ub[0] + db[0], ub[1] + db[1])
                    got = grid_moves_conflict(ua, va, ub, vb, 4) is not None
                    dense = min(
                        math.hypot((ub[0] + t / 1000 * db[0]) - (ua[0] + t / 1000 * da[0]),
                                   (ub[1] + t / 1000 * db[1]) - (ua[1] + t / 1000 * da[1]))
                        for t in range(1001))
                    assert got == (dense < 1.0 - 1e-7), (ua, va, ub, vb, dense)


class TestValidateGrid:
    def _env(self, w=4, h=4, blocked=()):
        inst = cell_scenario(w, h, blocked, [((0, 0), (w - 1, h - 1))])
        return to_grid(inst).env

    def test_co_located_agents(self):
        env = self._env()
        plan = gplan([[(0, 0), (1, 0), (1, 1), (1, 2)],
                      [(2, 2), (1, 2), (1, 2), (1, 2)]])
        rep = validate_grid(plan, env)
        assert not rep.feasible
        assert any(v.kind == CO_OCCUPANCY and v.time == 3.0 for v in rep.violations)

    def test_edge_swap_flagged(self):
        env = self._env()
        plan = gplan([[(0, 0), (1, 0)], [(1, 0), (0, 0)]])
        rep = validate_grid(plan, env)
        assert any(v.kind == EDGE_SWAP for v in rep.violations)

    def test_obstacle_overlap(self):
        env = self._env(blocked=[(1, 1)])
        plan = gplan([[(0, 1), (1, 1)]])
        rep = validate_grid(plan, env)
        assert any(v.kind == OBSTACLE_OVERLAP for v in rep.violations)

    def test_malformed_jump(self):
        env = self._env()
        with pytest.raises(MalformedPlan):
            validate_grid(gplan([[(0, 0), (2, 0)]]), env)

    def test_cbs_output_clean(self):
        inst = cell_scenario(4, 4, [], [((0, 0), (3, 3)), ((3, 0), (0, 3))])
        gi = to_grid(inst)
        out = planners.plan(PlanRequest(instance=gi, budget_s=10), "grid_cbs")
        assert out.status == "solved"
        assert validate_grid(out.plans, gi.env).feasible

    def test_parked_agents_stay_relevant(self):
        env = self._env()
        # agent 1 drives into agent 0's parked goal cell
        plan = gplan([[(1, 1)], [(3, 1), (2, 1), (1, 1)]])
        rep = validate_grid(plan, env)
        assert any(v.kind == CO_OCCUPANCY for v in rep.violations)


def make_roadmap(positions, speed=0.5, n_samples=40, radius=1.2, seed=2, r=0.08):
    inst = open_fleet(positions, r=r, dynamics=DynamicsModel.single(speed))
    return inst, to_roadmap(inst, RoadmapParams(n_samples=n_samples,
                                                connection_radius=radius, seed=seed))


class TestValidateRoadmap:
    def test_vertex_capacity(self):
        inst, ri = make_roadmap([((1.0, 1.0), (4.0, 4.0)), ((4.0, 1.0), (1.0, 4.0))])
        env = ri.env
        s0 = ri.starts[0]
        p0 = env.vertices[s0]
        visits = (
            (RoadmapVisit(s0, 0.0, 5.0, p0),),
            (RoadmapVisit(s0, 3.0, 8.0, p0),),
        )
        plan = RoadmapPlan(agent_ids=(0, 1), visits=visits, speed=env.speed)
        rep = validate_roadmap(plan, env)
        assert any(v.kind == CAPACITY_EXCEEDED for v in rep.violations)

    def _edge_between(self, env, u, v):
        for e in env.edges:
            if e.source == u and e.target == v:
                return e
        return None

    def test_head_on_swap(self):
        inst, ri = make_roadmap([((1.0, 2.5), (4.0, 2.5)), ((4.0, 2.5), (1.0, 2.5))],
                                n_samples=1, radius=4.0)
        env = ri.env
        u, v = ri.starts[0], ri.goals[0]
        e = self._edge_between(env, u, v)
        eb = self._edge_between(env, v, u)
        assert e is not None and eb is not None
        pu, pv = env.vertices[u], env.vertices[v]
        visits = (
            (RoadmapVisit(u, 0.0, 0.0, pu), RoadmapVisit(v, e.tau, e.tau, pv)),
            (RoadmapVisit(v, 0.0, 0.0, pv), RoadmapVisit(u, eb.tau, eb.tau, pu)),
        )
        plan = RoadmapPlan(agent_ids=(0, 1), visits=visits, speed=env.speed)
        rep = validate_roadmap(plan, env)
        assert any(v.kind == HEAD_ON_SWAP for v in rep.violations)

    def test_headway_30_vs_32(self):
        # r_com = 0.08, v = 0.5: threshold 2r/v = 0.32 s; a 0.30 s gap violates
        inst, ri = make_roadmap([((1.0, 2.5), (4.0, 2.5)), ((1.0, 1.0), (4.0, 1.0))],
                                n_samples=1, radius=4.0)
        env = ri.env
        u, v = ri.starts[0], ri.goals[0]
        e = self._edge_between(env, u, v)
        pu, pv = env.vertices[u], env.vertices[v]
        gap = 0.30
        visits = (
            (RoadmapVisit(u, 0.0, 0.0, pu), RoadmapVisit(v, e.tau, e.tau, pv)),
            (RoadmapVisit(u, 0.0, gap, pu), RoadmapVisit(v, gap + e.tau, gap + e.tau, pv)),
        )
        plan = RoadmapPlan(agent_ids=(0, 1), visits=visits, speed=env.speed)
        rep = validate_roadmap(plan, env)
        assert any(x.kind == HEADWAY_VIOLATION for x in rep.violations)
        # 0.33 s gap is legal on the headway rule
        visits_ok = (
            visits[0],
            (RoadmapVisit(u, 0.0, 0.33, pu), RoadmapVisit(v, 0.33 + e.tau, 0.33 + e.tau, pv)),
        )
        rep2 = validate_roadmap(RoadmapPlan(agent_ids=(0, 1), visits=visits_ok,
                                            speed=env.speed), env)
        assert not any(x.kind == HEADWAY_VIOLATION for x in rep2.violations)

    def test_unknown_edge(self):
        inst, ri = make_roadmap([((1.0, 2.5), (4.0, 2.5))], n_samples=30, radius=1.2)
        env = ri.env
        far = (ri.starts[0], ri.goals[0])
        # 3 m apart with connection radius 1.2: no direct edge exists
        assert self._edge_between(env, *far) is None
        pu, pv = env.vertices[far[0]], env.vertices[far[1]]
        visits = ((RoadmapVisit(far[0], 0.0, 0.0, pu),
                   RoadmapVisit(far[1], 6.0, 6.0, pv)),)
        with pytest.raises(UnknownEdge):
            validate_roadmap(RoadmapPlan(agent_ids=(0,), visits=visits,
                                         speed=env.speed), env)

    def test_interval_logic_agrees_with_dense_sampling(self):
        # planner outputs, dense-sample the re-embedded trajectories and
        # compare the feasible/infeasible verdict
        from mrplan.abstraction import roadmap_to_continuous
        ok = 0
        for seed in range(30):
            inst = random_fleet_scenario(seed=300 + seed, n_agents=3, preset="empty",
                                         dynamics="single", heterogeneous=False,
                                         r_eff_range=(0.08, 0.08))
            try:
                ri = to_roadmap(inst, RoadmapParams(n_samples=30, connection_radius=1.4,
                                                    seed=seed))
            except Exception:
                continue
            out = planners.plan(PlanRequest(instance=ri, budget_s=20), "roadmap_sipp")
            if out.status != "solved":
                continue
            ok += 1
            rep = validate_roadmap(out.plans, ri.env)
            trajs = roadmap_to_continuous(out.plans)
            horizon = max(tr.end_time for tr in trajs) + 0.5
            dense_ok = True
            steps = int(horizon / 1e-3)
            for k in range(0, steps, 1):
                t = k * 1e-3
                ps = [tr.pose_at(t) for tr in trajs]
                for i in range(len(ps)):
                    for j in range(i + 1, len(ps)):
                        if math.hypot(ps[i].x - ps[j].x, ps[i].y - ps[j].y) \
                                < 2 * ri.env.radius - 1e-6:
                            dense_ok = False
            assert rep.feasible == dense_ok, f"seed {seed}"
        assert ok >= 15


class TestValidateContinuous:
    def _plan(self, trajs, period=1.0 / 60.0):
        return ContinuousPlan(agent_ids=tuple(range(len(trajs))),
                              trajectories=tuple(trajs), sample_period=period)

    def _stationary(self, p, n=30, period=1.0 / 60.0):
        return Trajectory(times=tuple(k * period for k in range(n)),
                          points=tuple(Point2(*p) for _ in range(n)),
                          vels=tuple((0.0, 0.0) for _ in range(n)))

    def test_stationary_fleet_feasible(self):
        inst = open_fleet([((1, 1), (1, 1)), ((3, 3), (3, 3))])
        plan = self._plan([self._stationary((1, 1)), self._stationary((3, 3))])
        assert validate_continuous(plan, inst).feasible

    def test_obstacle_clip_flagged(self):
        obstacles = [[(2.0, 2.0), (3.0, 2.0), (3.0, 3.0), (2.0, 3.0)]]
        inst = open_fleet([((1, 1), (1, 1))], obstacles=obstacles)
        plan = self._plan([self._stationary((2.0 - 0.05, 2.5))])  # r_eff = 0.08 > 0.05
        rep = validate_continuous(plan, inst)
        assert any(v.kind == OBSTACLE_OVERLAP for v in rep.violations)

    def test_velocity_jump_flagged(self):
        inst = open_fleet([((1, 1), (2, 1))])
        period = 1.0 / 60.0
        n = 30
        times = tuple(k * period for k in range(n))
        pts = tuple(Point2(1 + 0.001 * k, 1.0) for k in range(n))
        vels = list((0.06, 0.0) for _ in range(n))
        vels[15] = (0.5, 0.0)  # dv = 0.44 over 1/60 s: |a| = 26.4 > 2
        tr = Trajectory(times=times, points=pts, vels=tuple(vels))
        rep = validate_continuous(self._plan([tr]), inst)
        assert any(v.kind == DYNAMICS_BOUND for v in rep.violations)

    def test_agent_overlap_flagged(self):
        inst = open_fleet([((1, 1), (1, 1)), ((3, 3), (3, 3))])
        plan = self._plan([self._stationary((1, 1)), self._stationary((1.1, 1.0))])
        rep = validate_continuous(plan, inst)
        assert any(v.kind == AGENT_OVERLAP for v in rep.violations)


class TestJointStateBfs:
    def test_single_agent_diagonal(self):
        inst = cell_scenario(3, 3, [], [((0, 0), (2, 2))])
        gi = to_grid(inst)
        soc, plan = joint_state_bfs(gi)
        assert soc == 4
        assert validate_grid(plan, gi.env).feasible

    def test_corridor_with_pocket_matches_cbs(self):
        # 3-cell corridor with a pocket above the middle cell
        inst = cell_scenario(3, 2, [(0, 1), (2, 1)],
                             [((0, 0), (2, 0)), ((2, 0), (0, 0))])
        gi = to_grid(inst)
        soc, witness = joint_state_bfs(gi)
        assert soc is not None
        out = planners.plan(PlanRequest(instance=gi, budget_s=30), "grid_cbs")
        assert out.status == "solved"
        assert out.plans.soc_steps() == soc
        assert validate_grid(witness, gi.env).feasible
        assert validate_grid(out.plans, gi.env).feasible

    def test_unsolvable_two_cell_swap(self):
        inst = cell_scenario(2, 1, [], [((0, 0), (1, 0)), ((1, 0), (0, 0))])
        gi = to_grid(inst)
        soc, plan = joint_state_bfs(gi)
        assert soc is None and plan is None

    def test_state_space_guard(self):
        inst = cell_scenario(60, 60, [], [((0, 0), (59, 59)), ((59, 0), (0, 59)),
                                          ((0, 59), (59, 0))])
        gi = to_grid(inst)
        with pytest.raises(StateSpaceTooLarge):
            joint_state_bfs(gi)

    def test_pre_parked_fleet_costs_zero(self):
        inst = cell_scenario(3, 3, [], [((0, 0), (0, 0)), ((2, 2), (2, 2))])
        gi = to_grid(inst)
        soc, plan = joint_state_bfs(gi)
        assert soc == 0
