"""Kinematics and collision geometry of a Stretch-like mobile manipulator.

Joint layout: planar base (x, y, yaw; xy is never moved by planning,
yaw is), a prismatic vertical lift on a mast, a prismatic arm that
telescopes along the base's lateral axis (to the robot's right by
default), a wrist yaw about vertical, an optional wrist pitch (locked
at 0 unless a task needs to point the gripper downward), and a
two-state gripper whose fingertip retracts toward the wrist when it
closes.

The fingertip is the planning frame: fk() reports its pose, jacobian()
its partials.  All link collision volumes are oriented boxes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from .geometry import (OrientedBox, Pose, Vec3, quat_from_matrix,
                       quat_from_axis_angle)


class Gripper(Enum):
    OPEN = "open"
    CLOSED = "closed"


@dataclass(frozen=True)
class JointLimits:
    lift: tuple[float, float] = (0.10, 1.10)
    arm_ext: tuple[float, float] = (0.00, 0.42)
    wrist_yaw: tuple[float, float] = (-1.75, 4.00)
    wrist_pitch: tuple[float, float] = (0.0, math.pi / 2)
    # base yaw is a drive rotation, not a limited joint
    base_yaw: tuple[float, float] = (-math.inf, math.inf)

    def of(self, joint: str) -> tuple[float, float]:
        return getattr(self, joint)


@dataclass(frozen=True)
class RobotConfig:
    base_x: float = 0.0
    base_y: float = 0.0
    base_yaw: float = 0.0
    lift: float = 0.6
    arm_ext: float = 0.0
    wrist_yaw: float = 0.0
    wrist_pitch: float = 0.0
    gripper: Gripper = Gripper.OPEN

    def joints(self) -> dict[str, float]:
        return {"base_yaw": self.base_yaw, "lift": self.lift,
                "arm_ext": self.arm_ext, "wrist_yaw": self.wrist_yaw,
                "wrist_pitch": self.wrist_pitch}


@dataclass(frozen=True)
class KinematicModel:
    """Model constants.  Lengths in meters.

    arm_side is -1 when the arm telescopes to the robot's right (the
    stock layout) and +1 for the mirrored build used in symmetry tests.
    tip_rise lifts the fingertip above the lift carriage so the fully
    raised fingertip tops out at lift_max + tip_rise = 1.17 m.
    """

    mast_offset: tuple[float, float] = (-0.07, 0.13)
    arm_retracted: float = 0.25
    arm_side: float = -1.0
    tip_len_open: float = 0.20
    tip_shrink_closed: float = 0.02
    tip_rise: float = 0.07
    limits: JointLimits = field(default_factory=JointLimits)
    pitch_locked: bool = True
    chassis_half: tuple[float, float, float] = (0.17, 0.17, 0.07)
    mast_half_xy: float = 0.04
    mast_top: float = 1.30
    arm_half_thickness: float = 0.03
    grip_half_thickness: float = 0.035

    def tip_length(self, gripper: Gripper) -> float:
        if gripper is Gripper.CLOSED:
            return self.tip_len_open - self.tip_shrink_closed
        return self.tip_len_open

    def active_joints(self) -> tuple[str, ...]:
        if self.pitch_locked:
            return ("base_yaw", "lift", "arm_ext", "wrist_yaw")
        return ("base_yaw", "lift", "arm_ext", "wrist_yaw", "wrist_pitch")

    def unlocked_pitch(self) -> "KinematicModel":
        return replace(self, pitch_locked=False)

    def mirrored(self) -> "KinematicModel":
        lo, hi = self.limits.wrist_yaw
        lims = replace(self.limits, wrist_yaw=(-hi, -lo))
        return replace(self, arm_side=-self.arm_side,
                       mast_offset=(self.mast_offset[0], -self.mast_offset[1]),
                       limits=lims)

    def max_fingertip_z(self) -> float:
        return self.limits.lift[1] + self.tip_rise

    def min_fingertip_z(self) -> float:
        if self.pitch_locked:
            return self.limits.lift[0] + self.tip_rise
        return self.limits.lift[0] - self.tip_len_open

    def max_horizontal_reach(self) -> float:
        mx, my = self.mast_offset
        a0, a1 = self.arm_retracted, self.arm_retracted + self.limits.arm_ext[1]
        lateral = max(abs(my + self.arm_side * a0), abs(my + self.arm_side * a1))
        tip = math.hypot(self.tip_len_open, self.tip_rise)
        return math.hypot(mx, lateral) + tip


def neutral_config(model: KinematicModel, base_x=0.0, base_y=0.0,
                   base_yaw=0.0) -> RobotConfig:
    """Mid-range lift, retracted arm, zero wrist: the mining seed pose."""
    lo, hi = model.limits.lift
    return RobotConfig(base_x, base_y, base_yaw, lift=0.5 * (lo + hi),
                       arm_ext=0.0, wrist_yaw=0.0, wrist_pitch=0.0)


def within_limits(config: RobotConfig, model: KinematicModel,
                  tol: float = 1e-9) -> bool:
    for joint, value in config.joints().items():
        lo, hi = model.limits.of(joint)
        if value < lo - tol or value > hi + tol:
            return False
    return True


def clamp_to_limits(config: RobotConfig, model: KinematicModel) -> RobotConfig:
    kw = {}
    for joint, value in config.joints().items():
        lo, hi = model.limits.of(joint)
        kw[joint] = min(max(value, lo), hi)
    return replace(config, **kw)


# ---------------------------------------------------------------------------
# forward kinematics (scalar math: this is the IK/mining hot path)

def _tip_state(config: RobotConfig, model: KinematicModel):
    """Returns (px, py, pz, heading, wrist_world_x, wrist_world_y, ty, tz, alpha).

    ty/tz are the fingertip offset from the wrist in the post-wrist-yaw
    frame (x component is always 0); alpha = base_yaw + wrist_yaw.
    """
    u = model.arm_side
    mx, my = model.mast_offset
    ct, st = math.cos(config.base_yaw), math.sin(config.base_yaw)
    wy_local = my + u * (model.arm_retracted + config.arm_ext)
    wx = config.base_x + ct * mx - st * wy_local
    wy = config.base_y + st * mx + ct * wy_local

    L = model.tip_length(config.gripper)
    dz = model.tip_rise
    psi = -u * config.wrist_pitch
    cp, sp = math.cos(psi), math.sin(psi)
    ty = u * L * cp - dz * sp
    tz = u * L * sp + dz * cp

    alpha = config.base_yaw + config.wrist_yaw
    ca, sa = math.cos(alpha), math.sin(alpha)
    px = wx - ty * sa
    py = wy + ty * ca
    pz = config.lift + tz
    heading = alpha + u * math.pi / 2
    return px, py, pz, heading, wx, wy, ty, tz, alpha


def fingertip_position(config: RobotConfig, model: KinematicModel) -> Vec3:
    px, py, pz = _tip_state(config, model)[:3]
    return np.array([px, py, pz])


def fingertip_heading(config: RobotConfig, model: KinematicModel) -> float:
    """Heading (world yaw) of the gripper's pointing direction.

    Equal to base_yaw + wrist_yaw + arm_side*pi/2 regardless of pitch and
    prismatic joints.
    """
    return _tip_state(config, model)[3]


def approach_vector(config: RobotConfig, model: KinematicModel) -> Vec3:
    """Unit vector the gripper points along.  Horizontal at zero pitch
    (heading fingertip_heading); positive pitch tips it downward."""
    u = model.arm_side
    psi = -u * config.wrist_pitch
    cp, sp = math.cos(psi), math.sin(psi)
    alpha = config.base_yaw + config.wrist_yaw
    ca, sa = math.cos(alpha), math.sin(alpha)
    return np.array([-u * cp * sa, u * cp * ca, u * sp])


def fk(config: RobotConfig, model: KinematicModel) -> Pose:
    """Fingertip pose.  Orientation follows the grasp-frame convention:
    local x = pointing direction, local z = vertical projected
    perpendicular to it (the closing axis at zero pitch)."""
    px, py, pz, heading, wx, wy, ty, tz, alpha = _tip_state(config, model)
    pos = np.array([px, py, pz])
    x = approach_vector(config, model)
    up = np.array([0.0, 0.0, 1.0])
    z = up - float(np.dot(up, x)) * x
    zn = np.linalg.norm(z)
    if zn < 1e-9:  # pointing straight up/down: use the heading direction
        z = np.array([math.cos(heading), math.sin(heading), 0.0])
    else:
        z = z / zn
    y = np.cross(z, x)
    return Pose(quat_from_matrix(np.column_stack([x, y, z])), pos)


def jacobian(config: RobotConfig, model: KinematicModel,
             include_heading: bool = True) -> np.ndarray:
    """Partials of the fingertip (position, and optionally heading) with
    respect to the model's active joints, ordered as active_joints().

    Rows: x, y, z[, heading]; columns: joints.
    """
    px, py, pz, _, wx, wy, ty, tz, alpha = _tip_state(config, model)
    u = model.arm_side
    ct, st = math.cos(config.base_yaw), math.sin(config.base_yaw)
    ca, sa = math.cos(alpha), math.sin(alpha)

    cols = {
        "base_yaw": (-(py - config.base_y), px - config.base_x, 0.0),
        "lift": (0.0, 0.0, 1.0),
        "arm_ext": (-u * st, u * ct, 0.0),
        "wrist_yaw": (-(py - wy), px - wx, 0.0),
        "wrist_pitch": (-u * tz * sa, u * tz * ca, -u * ty),
    }
    heading_row = {"base_yaw": 1.0, "wrist_yaw": 1.0}

    joints = model.active_joints()
    rows = 4 if include_heading else 3
    J = np.zeros((rows, len(joints)))
    for j, name in enumerate(joints):
        J[0, j], J[1, j], J[2, j] = cols[name]
        if include_heading:
            J[3, j] = heading_row.get(name, 0.0)
    return J


# ---------------------------------------------------------------------------
# collision volumes

def link_shapes(config: RobotConfig, model: KinematicModel) -> dict[str, OrientedBox]:
    """World-frame oriented boxes for chassis, mast, arm, and gripper."""
    px, py, pz, heading, wx, wy, ty, tz, alpha = _tip_state(config, model)
    u = model.arm_side
    mx, my = model.mast_offset
    theta = config.base_yaw
    base_q = quat_from_axis_angle(np.array([0.0, 0.0, 1.0]), theta)
    ct, st = math.cos(theta), math.sin(theta)

    def local_to_world(lx, ly, lz):
        return np.array([config.base_x + ct * lx - st * ly,
                         config.base_y + st * lx + ct * ly, lz])

    ch = model.chassis_half
    chassis = OrientedBox(Pose(base_q, local_to_world(0.0, 0.0, ch[2])),
                          np.array(ch))
    mast = OrientedBox(
        Pose(base_q, local_to_world(mx, my, model.mast_top / 2)),
        np.array([model.mast_half_xy, model.mast_half_xy, model.mast_top / 2]))

    arm_len = model.arm_retracted + config.arm_ext
    arm = OrientedBox(
        Pose(base_q, local_to_world(mx, my + u * arm_len / 2, config.lift)),
        np.array([model.arm_half_thickness, arm_len / 2,
                  model.arm_half_thickness]))

    tip = np.array([px, py, pz])
    wrist = np.array([wx, wy, config.lift])
    axis = tip - wrist
    half_len = float(np.linalg.norm(axis)) / 2
    yb = axis / (2 * half_len)
    xh = np.array([math.cos(heading), math.sin(heading), 0.0])
    zb = np.cross(xh, yb)
    zn = float(np.linalg.norm(zb))
    if zn < 1e-9:
        zb = np.array([0.0, 0.0, 1.0])
        xh = np.cross(yb, zb)
    else:
        zb = zb / zn
        xh = np.cross(yb, zb)
    grip_q = quat_from_matrix(np.column_stack([xh, yb, zb]))
    gripper = OrientedBox(Pose(grip_q, (wrist + tip) / 2),
                          np.array([model.grip_half_thickness, half_len,
                                    model.grip_half_thickness]))
    return {"chassis": chassis, "mast": mast, "arm": arm, "gripper": gripper}


def chassis_shape(base_x: float, base_y: float, base_yaw: float,
                  model: KinematicModel) -> OrientedBox:
    ch = model.chassis_half
    q = quat_from_axis_angle(np.array([0.0, 0.0, 1.0]), base_yaw)
    return OrientedBox(Pose(q, np.array([base_x, base_y, ch[2]])), np.array(ch))
