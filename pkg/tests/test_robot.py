import math

import numpy as np
import pytest

from artopen.geometry import quat_rotate, wrap_angle
from artopen.robot import (Gripper, KinematicModel, RobotConfig,
                           chassis_shape, clamp_to_limits, fingertip_heading,
                           fingertip_position, fk, jacobian, link_shapes,
                           neutral_config, within_limits)

from oracles import finite_difference_jacobian

MODEL = KinematicModel()


def random_config(rng, model=MODEL, pitch=False):
    lims = model.limits
    return RobotConfig(
        base_x=rng.uniform(-1, 1), base_y=rng.uniform(-1, 1),
        base_yaw=rng.uniform(-math.pi, math.pi),
        lift=rng.uniform(*lims.lift), arm_ext=rng.uniform(*lims.arm_ext),
        wrist_yaw=rng.uniform(*lims.wrist_yaw),
        wrist_pitch=rng.uniform(*lims.wrist_pitch) if pitch else 0.0)


def test_home_fingertip_frozen():
    cfg = neutral_config(MODEL)
    assert cfg.lift == pytest.approx(0.6)
    p = fingertip_position(cfg, MODEL)
    np.testing.assert_allclose(p, [-0.07, -0.32, 0.67], atol=1e-12)
    assert fingertip_heading(cfg, MODEL) == pytest.approx(-math.pi / 2)


def test_lift_moves_tip_straight_up():
    rng = np.random.default_rng(3)
    for _ in range(20):
        cfg = random_config(rng)
        p0 = fingertip_position(cfg, MODEL)
        from dataclasses import replace
        hi = replace(cfg, lift=cfg.lift + 0.01)
        p1 = fingertip_position(hi, MODEL)
        np.testing.assert_allclose(p1 - p0, [0, 0, 0.01], atol=1e-12)


def test_arm_extends_along_base_lateral_axis():
    from dataclasses import replace
    cfg = RobotConfig(base_yaw=0.3, lift=0.5, arm_ext=0.1)
    p0 = fingertip_position(cfg, MODEL)
    p1 = fingertip_position(replace(cfg, arm_ext=0.2), MODEL)
    step = p1 - p0
    # arm_side = -1: extension pushes the tip toward the base's right (-y local)
    expect = 0.1 * np.array([math.sin(0.3), -math.cos(0.3), 0.0])
    np.testing.assert_allclose(step, expect, atol=1e-12)


def test_closing_gripper_shrinks_tip_along_approach():
    from dataclasses import replace
    rng = np.random.default_rng(11)
    for _ in range(20):
        cfg = random_config(rng, pitch=True)
        model = MODEL.unlocked_pitch()
        p_open = fingertip_position(cfg, model)
        p_closed = fingertip_position(replace(cfg, gripper=Gripper.CLOSED), model)
        gap = p_open - p_closed
        assert np.linalg.norm(gap) == pytest.approx(MODEL.tip_shrink_closed)
        if cfg.wrist_pitch < 1e-9:
            h = fingertip_heading(cfg, model)
            np.testing.assert_allclose(
                gap, [0.02 * math.cos(h), 0.02 * math.sin(h), 0.0], atol=1e-12)


def test_heading_formula():
    rng = np.random.default_rng(5)
    for _ in range(50):
        cfg = random_config(rng, pitch=True)
        h = fingertip_heading(cfg, MODEL.unlocked_pitch())
        assert wrap_angle(h - (cfg.base_yaw + cfg.wrist_yaw - math.pi / 2)) \
            == pytest.approx(0.0, abs=1e-12)


def test_base_yaw_equivariance():
    # rotating the base about its own origin rotates the fingertip likewise
    from dataclasses import replace
    rng = np.random.default_rng(7)
    for _ in range(20):
        cfg = random_config(rng)
        cfg = replace(cfg, base_x=0.4, base_y=-0.2)
        dth = rng.uniform(-2, 2)
        p0 = fingertip_position(cfg, MODEL)
        p1 = fingertip_position(replace(cfg, base_yaw=cfg.base_yaw + dth), MODEL)
        c, s = math.cos(dth), math.sin(dth)
        rel = p0 - [0.4, -0.2, 0]
        expect = np.array([0.4 + c * rel[0] - s * rel[1],
                           -0.2 + s * rel[0] + c * rel[1], p0[2]])
        np.testing.assert_allclose(p1, expect, atol=1e-9)


def test_fingertip_ceiling():
    # exhaustive corners + random sampling: the tip never tops 1.17 m
    rng = np.random.default_rng(13)
    zmax = 0.0
    for _ in range(2000):
        cfg = random_config(rng, pitch=True)
        zmax = max(zmax, fingertip_position(cfg, MODEL.unlocked_pitch())[2])
    assert zmax <= MODEL.max_fingertip_z() + 1e-12
    assert MODEL.max_fingertip_z() == pytest.approx(1.17)
    assert MODEL.max_fingertip_z() < 1.20


def test_jacobian_matches_finite_differences():
    for pitch_locked in (True, False):
        model = MODEL if pitch_locked else MODEL.unlocked_pitch()
        rng = np.random.default_rng(17)
        from dataclasses import replace

        def wrap(cfg):
            def f(qvec):
                kw = dict(zip(model.active_joints(), qvec))
                return fingertip_position(replace(cfg, **kw), model)
            return f

        for _ in range(50):
            cfg = random_config(rng, pitch=not pitch_locked)
            q0 = np.array([cfg.joints()[j] for j in model.active_joints()])
            J = jacobian(cfg, model)
            J_fd = finite_difference_jacobian(wrap(cfg), q0)
            np.testing.assert_allclose(J[:3], J_fd, atol=1e-6)


def test_heading_jacobian_row():
    J = jacobian(random_config(np.random.default_rng(1)), MODEL)
    np.testing.assert_allclose(J[3], [1.0, 0.0, 0.0, 1.0], atol=0)


def test_fk_pose_orientation():
    cfg = RobotConfig(base_yaw=0.4, lift=0.7, arm_ext=0.2, wrist_yaw=1.1)
    pose = fk(cfg, MODEL)
    h = fingertip_heading(cfg, MODEL)
    x = quat_rotate(pose.q, np.array([1.0, 0.0, 0.0]))
    np.testing.assert_allclose(x, [math.cos(h), math.sin(h), 0.0], atol=1e-12)
    z = quat_rotate(pose.q, np.array([0.0, 0.0, 1.0]))
    np.testing.assert_allclose(z, [0, 0, 1], atol=1e-12)
    np.testing.assert_allclose(pose.t, fingertip_position(cfg, MODEL))


def test_limits_helpers():
    from dataclasses import replace
    cfg = neutral_config(MODEL)
    assert within_limits(cfg, MODEL)
    bad = replace(cfg, lift=1.4, wrist_yaw=5.0)
    assert not within_limits(bad, MODEL)
    fixed = clamp_to_limits(bad, MODEL)
    assert within_limits(fixed, MODEL)
    assert fixed.lift == pytest.approx(1.10)
    assert fixed.wrist_yaw == pytest.approx(4.00)


def test_link_shapes_layout():
    cfg = RobotConfig(lift=0.8, arm_ext=0.3)
    shapes = link_shapes(cfg, MODEL)
    assert set(shapes) == {"chassis", "mast", "arm", "gripper"}
    # chassis sits on the ground under the base origin
    np.testing.assert_allclose(shapes["chassis"].pose.t, [0, 0, 0.07],
                               atol=1e-12)
    # arm box spans mast to wrist at lift height
    arm = shapes["arm"]
    assert arm.pose.t[2] == pytest.approx(0.8)
    assert arm.half_extents[1] == pytest.approx((0.25 + 0.3) / 2)
    # gripper box midpoint is halfway from wrist to fingertip
    tip = fingertip_position(cfg, MODEL)
    wrist_y = 0.13 - (0.25 + 0.3)
    np.testing.assert_allclose(
        shapes["gripper"].pose.t,
        (np.array([-0.07, wrist_y, 0.8]) + tip) / 2, atol=1e-12)
    # every box contains its own center and the gripper contains the tip
    for box in shapes.values():
        assert box.contains(box.pose.t)
    assert shapes["gripper"].contains(tip - 1e-6 * np.array([0, 0, 1]))


def test_mirrored_model_reflects_fk():
    from dataclasses import replace
    mirror = MODEL.mirrored()
    rng = np.random.default_rng(23)
    for _ in range(30):
        cfg = random_config(rng)
        mcfg = replace(cfg, base_y=-cfg.base_y, base_yaw=-cfg.base_yaw,
                       wrist_yaw=-cfg.wrist_yaw)
        assert within_limits(mcfg, mirror)
        p = fingertip_position(cfg, MODEL)
        q = fingertip_position(mcfg, mirror)
        np.testing.assert_allclose(q, [p[0], -p[1], p[2]], atol=1e-12)


def test_chassis_shape_matches_link_chassis():
    cfg = RobotConfig(base_x=0.5, base_y=-0.3, base_yaw=0.9)
    a = link_shapes(cfg, MODEL)["chassis"]
    b = chassis_shape(0.5, -0.3, 0.9, MODEL)
    np.testing.assert_allclose(a.pose.t, b.pose.t, atol=1e-12)
    np.testing.assert_allclose(a.corners(), b.corners(), atol=1e-12)


def test_reach_envelope_numbers():
    assert MODEL.min_fingertip_z() == pytest.approx(0.17)
    assert MODEL.unlocked_pitch().min_fingertip_z() == pytest.approx(-0.10)
    # retracted-arm wrist lateral 0.12, extended 0.54; mast x -0.07
    expect = math.hypot(0.07, 0.54) + math.hypot(0.20, 0.07)
    assert MODEL.max_horizontal_reach() == pytest.approx(expect)
