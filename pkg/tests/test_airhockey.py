import math

import numpy as np
import pytest

from latentqd.core import Genotype, RngStreams
from latentqd.tasks.airhockey import (
    ARENA_HALF,
    BASE,
    DAMPING,
    DT,
    GENOTYPE_LENGTH,
    LINK_LENGTH,
    N_SAMPLES,
    PHASE_STEPS,
    PUCK_RADIUS,
    PUCK_START,
    RESTITUTION,
    SAMPLE_EVERY,
    PuckState,
    evaluate_airhockey,
    forward_kinematics,
    puck_step,
)


def genotype(values):
    return Genotype(np.asarray(values, dtype=np.float64), -math.pi, math.pi)


def fk_complex_oracle(angles):
    """Independent forward kinematics via complex rotations."""
    pts = [complex(*BASE)]
    theta = 0.0
    for a in angles:
        theta += a
        pts.append(pts[-1] + LINK_LENGTH * complex(math.cos(theta), math.sin(theta)))
    return np.array([[p.real, p.imag] for p in pts])


class TestForwardKinematics:
    def test_zero_config_points_along_x(self):
        pts = forward_kinematics(np.zeros(4))
        assert pts[0] == pytest.approx(BASE)
        assert pts[-1] == pytest.approx([BASE[0] + 4 * LINK_LENGTH, BASE[1]])

    def test_quarter_turn(self):
        pts = forward_kinematics(np.array([math.pi / 2, 0.0, 0.0, 0.0]))
        assert pts[-1] == pytest.approx([BASE[0], BASE[1] + 4 * LINK_LENGTH], abs=1e-12)

    def test_matches_complex_rotation_oracle(self):
        rng = RngStreams(3).stream("mutate")
        for _ in range(20):
            angles = rng.uniform(-math.pi, math.pi, size=4)
            assert forward_kinematics(angles) == pytest.approx(
                fk_complex_oracle(angles), abs=1e-12
            )

    def test_wrong_length(self):
        with pytest.raises(ValueError):
            forward_kinematics(np.zeros(3))


class TestPuckStep:
    def far_arm(self):
        return forward_kinematics(np.zeros(4))  # lies along y = -1, far from centre

    def test_no_contact_damping_only(self):
        arm = self.far_arm()
        p0 = PuckState(0.0, 0.5, 0.5, 0.3)
        p1 = puck_step(p0, arm)
        assert p1.x == pytest.approx(0.0 + 0.5 * DT, abs=1e-12)
        assert p1.y == pytest.approx(0.5 + 0.3 * DT, abs=1e-12)
        assert p1.vx == pytest.approx(0.5 * DAMPING, abs=1e-15)
        assert p1.vy == pytest.approx(0.3 * DAMPING, abs=1e-15)

    def test_stationary_puck_stays(self):
        p1 = puck_step(PuckState(0.0, 0.5), self.far_arm())
        assert (p1.x, p1.y, p1.vx, p1.vy) == (0.0, 0.5, 0.0, 0.0)

    def test_perpendicular_wall_bounce(self):
        lim = ARENA_HALF - PUCK_RADIUS
        p0 = PuckState(0.9, 0.0, 20.0, 0.0)
        p1 = puck_step(p0, self.far_arm())
        crossed = 0.9 + 20.0 * DT  # 1.1, beyond the wall
        assert p1.x == pytest.approx(2 * lim - crossed, abs=1e-12)
        # reflected with restitution, then damped
        assert p1.vx == pytest.approx(-20.0 * RESTITUTION * DAMPING, abs=1e-12)
        assert p1.vy == 0.0

    def test_oblique_bounce_mirrors_normal_component(self):
        p0 = PuckState(0.9, 0.1, 20.0, 20.0)
        p1 = puck_step(p0, self.far_arm())
        # x (normal) component reflected and scaled, y (tangential) preserved
        assert p1.vx == pytest.approx(-20.0 * RESTITUTION * DAMPING, abs=1e-12)
        assert p1.vy == pytest.approx(20.0 * DAMPING, abs=1e-12)
        lim = ARENA_HALF - PUCK_RADIUS
        assert p1.x == pytest.approx(2 * lim - (0.9 + 0.2), abs=1e-12)
        assert p1.y == pytest.approx(0.1 + 0.2, abs=1e-12)

    def test_kinetic_energy_non_increasing_without_arm(self):
        p = PuckState(0.5, 0.5, 15.0, -9.0)
        arm = self.far_arm()
        speed = math.hypot(p.vx, p.vy)
        for _ in range(200):
            p = puck_step(p, arm)
            new_speed = math.hypot(p.vx, p.vy)
            assert new_speed <= speed + 1e-12
            speed = new_speed

    def test_moving_arm_pushes_puck(self):
        # arm sweeping toward vertical from the right, close enough to
        # penetrate the puck at the origin: push is along the approach normal
        up = np.array([math.pi / 2, 0.0, 0.0, 0.0])
        before = forward_kinematics(up - np.array([0.05, 0, 0, 0]))
        after = forward_kinematics(up - np.array([0.005, 0, 0, 0]))
        p1 = puck_step(PuckState(0.0, 0.0), after, prev_arm_points=before)
        assert p1.vx < 0.0  # pushed leftward, away from the incoming arm
        assert math.hypot(p1.vx, p1.vy) > 0.0

    def test_receding_arm_does_not_pull(self):
        # arm moving away along the contact normal: velocity floors at zero
        up = np.array([math.pi / 2, 0.0, 0.0, 0.0])
        before = forward_kinematics(up - np.array([0.05, 0, 0, 0]))
        after = forward_kinematics(up + np.array([0.005, 0, 0, 0]))
        p1 = puck_step(PuckState(0.0, 0.0), after, prev_arm_points=before)
        assert (p1.vx, p1.vy) == (0.0, 0.0)

    def test_rejects_bad_dt(self):
        with pytest.raises(ValueError):
            puck_step(PuckState(0, 0), self.far_arm(), dt=0.0)


class TestEvaluate:
    def test_zero_genotype_no_contact(self):
        fitness, sensory, bd = evaluate_airhockey(genotype(np.zeros(8)))
        assert fitness == 0.0
        assert sensory.shape == (2 * N_SAMPLES,)
        assert np.all(sensory.reshape(-1, 2) == np.array(PUCK_START))
        assert np.array_equal(bd, np.array(PUCK_START))

    def test_fitness_formula_no_phase2_motion(self):
        a = 1.2
        g = genotype([a, 0, 0, 0, a, 0, 0, 0])
        fitness, _, _ = evaluate_airhockey(g)
        duration = PHASE_STEPS * DT
        expected = -PHASE_STEPS * (a / duration) ** 2
        assert fitness == pytest.approx(expected, rel=1e-12)

    def test_fitness_nonpositive_and_samples_bounded(self):
        rng = RngStreams(4).stream("mutate")
        for _ in range(20):
            g = genotype(rng.uniform(-math.pi, math.pi, size=8))
            fitness, sensory, bd = evaluate_airhockey(g)
            assert fitness <= 0.0
            pts = sensory.reshape(-1, 2)
            assert np.all(np.abs(pts) <= 1.0)
            assert np.all(np.abs(bd) <= 1.0)

    def test_last_sample_is_hand_coded_bd_bitwise(self):
        rng = RngStreams(5).stream("mutate")
        for _ in range(50):
            g = genotype(rng.uniform(-math.pi, math.pi, size=8))
            _, sensory, bd = evaluate_airhockey(g)
            assert sensory[-2] == bd[0] and sensory[-1] == bd[1]

    def test_deterministic_bit_exact(self):
        g = genotype(RngStreams(6).stream("mutate").uniform(-math.pi, math.pi, 8))
        r1 = evaluate_airhockey(g)
        r2 = evaluate_airhockey(g)
        assert r1[0] == r2[0]
        assert np.array_equal(r1[1], r2[1])
        assert np.array_equal(r1[2], r2[2])

    def test_sweep_through_spawn_moves_puck(self):
        g = genotype([math.pi / 2 - 0.3, 0, 0, 0, math.pi / 2 + 0.3, 0, 0, 0])
        _, sensory, bd = evaluate_airhockey(g)
        assert not np.array_equal(bd, np.array(PUCK_START))

    def test_matches_scripted_resimulation(self):
        """Trace-replay oracle: re-simulate phase 2 step by step in python."""
        g = np.array([math.pi / 2 - 0.3, 0, 0, 0, math.pi / 2 + 0.3, 0, 0, 0])
        _, sensory, bd = evaluate_airhockey(genotype(g))

        a, b = g[:4], g[4:]
        puck = PuckState(*PUCK_START)
        prev = forward_kinematics(a)
        samples = []
        for i in range(1, PHASE_STEPS + 1):
            theta = a + (b - a) * (i / PHASE_STEPS)
            cur = forward_kinematics(theta)
            puck = puck_step(puck, cur, prev_arm_points=prev)
            prev = cur
            if i % SAMPLE_EVERY == 0:
                samples.append([puck.x, puck.y])
        replay = np.array(samples).ravel()
        assert sensory == pytest.approx(replay, abs=1e-9)
        assert bd == pytest.approx(replay[-2:], abs=1e-9)

    def test_wrong_genotype_length(self):
        with pytest.raises(ValueError):
            evaluate_airhockey(Genotype(np.zeros(4), -math.pi, math.pi))
