"""Articulation models for one-DOF openable objects.

An object opens along a single scalar state: drawer travel in meters, or
hinge angle in radians for cabinets (vertical axis) and bottom-hinged
doors (horizontal axis, swings downward).  The face normal always points
out of the object toward the side the robot stands on; hinge rotation
sign is chosen so the handle's first-order motion has a positive
component along that normal (the object opens toward the robot).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import BadCount, LimitViolation, MissingAxis
from .geometry import (Pose, Vec3, normalize, quat_from_axis_angle, quat_mul,
                       quat_from_matrix, rotate_about_line, vec3)

UP = np.array([0.0, 0.0, 1.0])

DRAWER_FULL_TRAVEL = 0.35        # m
HINGE_FULL_TRAVEL = math.pi / 2  # rad

DEFAULT_WAYPOINT_COUNT = 10


class ArticulationType(Enum):
    DRAWER = "drawer"
    CABINET_LEFT_HINGE = "cabinet_left_hinge"
    CABINET_RIGHT_HINGE = "cabinet_right_hinge"
    BOTTOM_HINGE = "bottom_hinge"

    @property
    def hinged(self) -> bool:
        return self is not ArticulationType.DRAWER


class HandleOrientation(Enum):
    HORIZONTAL = "horizontal"
    VERTICAL = "vertical"


ObjectState = float  # opening: drawer travel in m, hinge angle in rad; >= 0


def full_travel(atype: ArticulationType) -> float:
    return DRAWER_FULL_TRAVEL if atype is ArticulationType.DRAWER \
        else HINGE_FULL_TRAVEL


@dataclass(frozen=True)
class ArticulationParams:
    """Estimated or ground-truth articulation of one object.

    handle: grasp point at the closed state, base frame.
    normal: unit face normal pointing toward the robot side.
    axis_point/axis_dir: hinge line (hinged types only).
    radius: handle-to-axis distance; derived from the geometry when not
        given explicitly.
    """

    atype: ArticulationType
    handle: Vec3
    normal: Vec3
    handle_orientation: HandleOrientation = HandleOrientation.HORIZONTAL
    axis_point: Vec3 | None = None
    axis_dir: Vec3 | None = None
    radius: float = field(default=0.0)

    def __post_init__(self):
        object.__setattr__(self, "handle", vec3(self.handle))
        object.__setattr__(self, "normal", normalize(vec3(self.normal)))
        if self.atype.hinged:
            if self.axis_point is None or self.axis_dir is None:
                raise MissingAxis(f"{self.atype.value} requires a hinge axis")
            object.__setattr__(self, "axis_point", vec3(self.axis_point))
            object.__setattr__(self, "axis_dir", normalize(vec3(self.axis_dir)))
            if self.radius == 0.0:
                object.__setattr__(self, "radius", self._axis_distance())
        elif self.axis_point is not None or self.axis_dir is not None:
            raise MissingAxis("drawer must not carry a hinge axis")

    def _axis_distance(self) -> float:
        rel = self.handle - self.axis_point
        along = float(np.dot(rel, self.axis_dir)) * self.axis_dir
        return float(np.linalg.norm(rel - along))

    def hinge_sign(self) -> float:
        """+1/-1 so that rotating by +sign*opening moves the handle outward
        (positive first-order displacement along the face normal)."""
        tangent = np.cross(self.axis_dir, self.handle - self.axis_point)
        s = float(np.dot(tangent, self.normal))
        return 1.0 if s >= 0.0 else -1.0

    def with_radius(self, radius: float) -> "ArticulationParams":
        """Same handle and axis direction, axis point moved along the
        handle->axis ray so the handle-to-axis distance becomes radius.
        This is how a mis-estimated radius enters a plan: the arc still
        starts at the handle but bends differently."""
        if not self.atype.hinged:
            raise MissingAxis("drawer has no radius")
        if radius <= 0.0:
            raise LimitViolation(f"radius {radius} must be positive")
        rel = self.axis_point - self.handle
        along = float(np.dot(rel, self.axis_dir)) * self.axis_dir
        radial = rel - along
        foot_dir = radial / np.linalg.norm(radial)
        new_point = self.handle + foot_dir * radius + along
        return ArticulationParams(self.atype, self.handle, self.normal,
                                  self.handle_orientation, new_point,
                                  self.axis_dir, radius)

    def shifted(self, offset: Vec3) -> "ArticulationParams":
        """Rigid translation of handle and axis (normal unchanged)."""
        off = vec3(offset)
        axis_point = None if self.axis_point is None else self.axis_point + off
        return ArticulationParams(self.atype, self.handle + off, self.normal,
                                  self.handle_orientation, axis_point,
                                  self.axis_dir, self.radius)


def handle_at(params: ArticulationParams, opening: float) -> Vec3:
    """Handle position at a given opening."""
    if opening < 0.0:
        raise LimitViolation(f"opening {opening} must be non-negative")
    if params.atype is ArticulationType.DRAWER:
        return params.handle + opening * params.normal
    return rotate_about_line(params.handle, params.axis_point, params.axis_dir,
                             params.hinge_sign() * opening)


def grasp_pose(params: ArticulationParams) -> Pose:
    """Gripper pose for grasping the closed handle.

    Frame convention: local x = approach (into the face, i.e. -normal),
    local z = grip closing axis (vertical for horizontal handles,
    in-face horizontal for vertical handles), y completes right-handed.
    """
    approach = -params.normal
    if params.handle_orientation is HandleOrientation.HORIZONTAL:
        grip = UP - float(np.dot(UP, approach)) * approach
        grip = normalize(grip)
    else:
        grip = normalize(np.cross(UP, approach))
    y = np.cross(grip, approach)
    rot = np.column_stack([approach, y, grip])
    return Pose(quat_from_matrix(rot), params.handle)


def approach_direction(pose: Pose) -> Vec3:
    """World direction of the grasp frame's approach axis (local +x)."""
    return pose.rotate_vector(np.array([1.0, 0.0, 0.0]))


def approach_heading(pose: Pose) -> float:
    a = approach_direction(pose)
    return math.atan2(a[1], a[0])


@dataclass(frozen=True)
class WaypointTrajectory:
    """Evenly spaced grasp poses along an opening motion."""

    atype: ArticulationType
    poses: tuple[Pose, ...]
    openings: np.ndarray  # monotone, openings[0] == 0
    target: float

    def __post_init__(self):
        object.__setattr__(self, "openings",
                           np.asarray(self.openings, dtype=np.float64))

    def __len__(self) -> int:
        return len(self.poses)


def generate_waypoints(params: ArticulationParams, target: float | None = None,
                       count: int = DEFAULT_WAYPOINT_COUNT) -> WaypointTrajectory:
    """Grasp-frame waypoints from closed (opening 0) to the target opening.

    Positions follow handle_at; orientations start at the closed grasp
    pose and, for hinged types, rotate rigidly with the door.
    """
    if count < 2:
        raise BadCount(f"waypoint count {count} < 2")
    if target is None:
        target = full_travel(params.atype)
    if target <= 0.0:
        raise LimitViolation(f"target opening {target} must be positive")

    openings = np.linspace(0.0, target, count)
    base = grasp_pose(params)
    poses = []
    if params.atype is ArticulationType.DRAWER:
        for phi in openings:
            poses.append(Pose(base.q, params.handle + phi * params.normal))
    else:
        sign = params.hinge_sign()
        # Vertical hinges: the hand turns rigidly with the door.  Bottom
        # hinge: the grip rolls about the handle bar instead, so the
        # approach pitches downward while the door drops (a rigidly
        # attached hand would end up pointing at the sky).
        orient_sign = -sign if params.atype is ArticulationType.BOTTOM_HINGE \
            else sign
        for phi in openings:
            q = quat_from_axis_angle(params.axis_dir, orient_sign * phi)
            poses.append(Pose(quat_mul(q, base.q),
                              rotate_about_line(params.handle, params.axis_point,
                                                params.axis_dir, sign * phi)))
    return WaypointTrajectory(params.atype, tuple(poses), openings, float(target))
