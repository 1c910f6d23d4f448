"""Whole-body IK and sequential trajectory decoding.

A single damped-least-squares solver tracks a fingertip position (plus,
for most tasks, an approach heading) using base rotation and the arm
joints; the base never translates during a plan.  seq_ik() chains one
solve per waypoint, warm-starting each call from the previous solution,
and accepts a waypoint only when the solve converged and the resulting
pose is collision-free at that opening.  Decoding stops at the first
rejected waypoint, so a plan is always an unbroken prefix.

Bottom-hinged doors (oven style) drop the heading constraint and unlock
the wrist pitch joint instead: the handle arc dives below the horizontal
workspace, and four active joints cannot satisfy a full pose anyway.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from .articulation import (ArticulationParams, ArticulationType, ObjectState,
                           WaypointTrajectory, handle_at)
from .errors import LimitViolation
from .geometry import (OrientedBox, Pose, Vec3, obb_intersect,
                       quat_from_axis_angle, quat_from_matrix, quat_rotate,
                       vec3, wrap_angle)
from .robot import (Gripper, JointLimits, KinematicModel, RobotConfig,
                    clamp_to_limits, fingertip_heading, fingertip_position,
                    jacobian, link_shapes, within_limits)

DAMPING = 0.05
POS_TOL = 0.005
YAW_TOL = math.radians(2.0)
MAX_ITERATIONS = 100
STEP_MAX = {"base_yaw": 0.2, "lift": 0.1, "arm_ext": 0.1,
            "wrist_yaw": 0.2, "wrist_pitch": 0.2}
GRASP_EXEMPT_RADIUS = 0.05


@dataclass(frozen=True)
class IKTarget:
    """Fingertip goal: a position, optionally with an approach heading."""
    position: Vec3
    yaw: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "position", vec3(self.position))


@dataclass(frozen=True)
class IKResult:
    config: RobotConfig
    residual_pos: float
    residual_yaw: float
    iterations: int
    converged: bool


@dataclass(frozen=True)
class MotionPlan:
    """Accepted prefix of a decoded trajectory."""
    configs: tuple[RobotConfig, ...]
    achieved: int
    trajectory_ref: WaypointTrajectory
    total_iterations: int

    @property
    def feasible(self) -> bool:
        return self.achieved == len(self.trajectory_ref.poses)


# ---------------------------------------------------------------------------
# scene

@dataclass(frozen=True)
class Scene:
    """Collision world: a static body carcass, a moving door/drawer panel,
    and any extra static obstacles.  The panel's front surface lies in the
    object's face plane when the opening is zero."""

    params: ArticulationParams
    body: OrientedBox
    panel_closed: OrientedBox
    static_obstacles: tuple[OrientedBox, ...] = ()

    def handle_point(self, state: ObjectState) -> Vec3:
        return handle_at(self.params, state)

    def panel_at(self, state: ObjectState) -> OrientedBox:
        p = self.params
        if p.atype is ArticulationType.DRAWER:
            shift = Pose(np.array([1.0, 0.0, 0.0, 0.0]), state * p.normal)
            return self.panel_closed.transformed(shift)
        angle = p.hinge_sign() * state
        q = quat_from_axis_angle(p.axis_dir, angle)
        t = p.axis_point - quat_rotate(q, p.axis_point)
        return self.panel_closed.transformed(Pose(q, t))

    def boxes_at(self, state: ObjectState) -> list[tuple[str, OrientedBox]]:
        named = [("body", self.body), ("panel", self.panel_at(state))]
        named += [(f"static_{i}", b) for i, b in enumerate(self.static_obstacles)]
        return named

    def with_params(self, params: ArticulationParams) -> "Scene":
        return replace(self, params=params)


def face_frame(normal: Vec3) -> np.ndarray:
    """Columns: outward normal, lateral (left along the face), up."""
    x = vec3(normal)
    up = np.array([0.0, 0.0, 1.0])
    z = up - float(np.dot(up, x)) * x
    zn = np.linalg.norm(z)
    if zn < 1e-9:
        raise LimitViolation("face normal is vertical")
    z = z / zn
    y = np.cross(z, x)
    return np.column_stack([x, y, z])


def make_scene(params: ArticulationParams, face_center: Vec3,
               face_half_width: float, face_half_height: float,
               panel_thickness: float = 0.02, body_depth: float = 0.40,
               body_recess: float = 0.03,
               body_z_center: Optional[float] = None,
               body_half_height: Optional[float] = None,
               static_obstacles: Sequence[OrientedBox] = ()) -> Scene:
    """Builds the two object boxes from the face rectangle.

    The carcass front is recessed behind the face plane so incidental
    fingertip contact lands on the movable panel, never the body.  The
    carcass may be taller than the moving panel (a dresser has static
    drawers below the one being opened): body_z_center/body_half_height
    override its vertical extent.
    """
    frame = face_frame(params.normal)
    q = quat_from_matrix(frame)
    center = vec3(face_center)
    n = frame[:, 0]
    panel = OrientedBox(Pose(q, center - n * (panel_thickness / 2)),
                        np.array([panel_thickness / 2, face_half_width,
                                  face_half_height]))
    bz = face_center[2] if body_z_center is None else body_z_center
    bh = face_half_height if body_half_height is None else body_half_height
    body_center = center - n * (body_recess + body_depth / 2)
    body_center = np.array([body_center[0], body_center[1], bz])
    body = OrientedBox(Pose(q, body_center),
                       np.array([body_depth / 2, face_half_width, bh]))
    return Scene(params, body, panel, tuple(static_obstacles))


# ---------------------------------------------------------------------------
# collision

def check_collision(config: RobotConfig, scene: Scene, state: ObjectState,
                    model: KinematicModel) -> bool:
    """True iff any robot link box intersects any scene box.

    Gripper-vs-panel contact is exempt while the fingertip is within
    GRASP_EXEMPT_RADIUS of the current handle point: grasping is contact.
    """
    links = link_shapes(config, model)
    tip = fingertip_position(config, model)
    handle = scene.handle_point(state)
    grasping = float(np.linalg.norm(tip - handle)) <= GRASP_EXEMPT_RADIUS
    for box_name, box in scene.boxes_at(state):
        for link_name, link in links.items():
            if grasping and link_name == "gripper" and box_name == "panel":
                continue
            if obb_intersect(link, box):
                return True
    return False


# ---------------------------------------------------------------------------
# damped-least-squares IK

def _residual(config: RobotConfig, model: KinematicModel, target: IKTarget):
    dp = target.position - fingertip_position(config, model)
    if target.yaw is None:
        return dp, 0.0
    dyaw = wrap_angle(target.yaw - fingertip_heading(config, model))
    return dp, dyaw


def solve_ik(target: IKTarget, seed: RobotConfig, model: KinematicModel,
             limits: Optional[JointLimits] = None,
             damping: float = DAMPING, pos_tol: float = POS_TOL,
             yaw_tol: float = YAW_TOL,
             max_iterations: int = MAX_ITERATIONS) -> IKResult:
    """Iterates dq = J^T (J J^T + damping^2 I)^-1 r from the seed.

    Per-iteration joint steps are clamped (0.2 rad revolute, 0.1 m
    prismatic) and joints are clamped to their limits after every step.
    Non-convergence is reported in the result, never raised.  The base
    x/y of the seed is locked throughout.
    """
    if limits is not None:
        model = replace(model, limits=limits)
    config = clamp_to_limits(seed, model)
    joints = model.active_joints()

    def result(cfg, iters):
        dp, dyaw = _residual(cfg, model, target)
        pos_err = float(np.linalg.norm(dp))
        ok = pos_err <= pos_tol and abs(dyaw) <= yaw_tol
        return IKResult(cfg, pos_err, abs(dyaw), iters, ok)

    # cheap reachability screen: saves full-budget iteration burns in mining
    tz = float(target.position[2])
    if tz > model.max_fingertip_z() + pos_tol or \
            tz < model.min_fingertip_z() - pos_tol:
        return result(config, 0)
    reach = math.hypot(target.position[0] - seed.base_x,
                       target.position[1] - seed.base_y)
    if reach > model.max_horizontal_reach() + pos_tol:
        return result(config, 0)

    use_yaw = target.yaw is not None
    for iteration in range(max_iterations):
        dp, dyaw = _residual(config, model, target)
        pos_err = float(np.linalg.norm(dp))
        if pos_err <= pos_tol and abs(dyaw) <= yaw_tol:
            return IKResult(config, pos_err, abs(dyaw), iteration, True)
        J = jacobian(config, model, include_heading=use_yaw)
        r = np.append(dp, dyaw) if use_yaw else dp
        JJt = J @ J.T
        JJt[np.diag_indices_from(JJt)] += damping * damping
        dq = J.T @ np.linalg.solve(JJt, r)
        updates = {}
        for name, step in zip(joints, dq):
            cap = STEP_MAX[name]
            step = min(max(step, -cap), cap)
            updates[name] = getattr(config, name) + step
        config = clamp_to_limits(replace(config, **updates), model)
    return result(config, max_iterations)


# ---------------------------------------------------------------------------
# sequential decoding

def trajectory_targets(traj: WaypointTrajectory) -> list[IKTarget]:
    """Position (+heading unless bottom-hinged) targets per waypoint."""
    targets = []
    heading_free = traj.atype is ArticulationType.BOTTOM_HINGE
    for pose in traj.poses:
        if heading_free:
            targets.append(IKTarget(pose.t, None))
        else:
            x = quat_rotate(pose.q, np.array([1.0, 0.0, 0.0]))
            targets.append(IKTarget(pose.t, math.atan2(x[1], x[0])))
    return targets


def planning_model(model: KinematicModel,
                   atype: ArticulationType) -> KinematicModel:
    """Bottom-hinged tasks plan with the wrist pitch joint active."""
    if atype is ArticulationType.BOTTOM_HINGE and model.pitch_locked:
        return model.unlocked_pitch()
    return model


def seq_ik(theta0: RobotConfig, traj: WaypointTrajectory, scene: Scene,
           model: KinematicModel, warm_start: bool = True,
           retries: int = 0, retry_seed: int = 0) -> MotionPlan:
    """Decodes waypoints in order, warm-starting each IK call from the
    previous accepted solution (or from theta0 when warm_start is off —
    that mode exists to measure what warm starting buys).

    A waypoint is accepted iff its solve converged and the config is
    collision-free at that waypoint's opening; decoding stops at the
    first rejection.  retries > 0 re-solves a rejected waypoint from up
    to that many jittered reseeds (deterministic in retry_seed).
    """
    model = planning_model(model, traj.atype)
    if not within_limits(theta0, model):
        raise LimitViolation("seq_ik seed outside joint limits")
    theta0 = clamp_to_limits(theta0, model)

    targets = trajectory_targets(traj)
    configs: list[RobotConfig] = []
    seed = theta0
    total_iterations = 0

    def attempt(target, start, opening):
        res = solve_ik(target, start, model)
        ok = res.converged and not check_collision(res.config, scene,
                                                   opening, model)
        return res, ok

    for i, target in enumerate(targets):
        opening = float(traj.openings[i])
        res, ok = attempt(target, seed if warm_start else theta0, opening)
        total_iterations += res.iterations
        if not ok and retries > 0:
            rng = np.random.default_rng([retry_seed, i])
            for _ in range(retries):
                jitter = {
                    "base_yaw": rng.uniform(-0.3, 0.3),
                    "lift": rng.uniform(-0.1, 0.1),
                    "arm_ext": rng.uniform(-0.1, 0.1),
                    "wrist_yaw": rng.uniform(-0.3, 0.3),
                }
                start = clamp_to_limits(
                    replace(seed, **{k: getattr(seed, k) + v
                                     for k, v in jitter.items()}), model)
                res, ok = attempt(target, start, opening)
                total_iterations += res.iterations
                if ok:
                    break
        if not ok:
            break
        configs.append(res.config)
        seed = res.config
    return MotionPlan(tuple(configs), len(configs), traj, total_iterations)


# ---------------------------------------------------------------------------
# export

PLAN_COLUMNS = ("base_x", "base_y", "base_yaw", "lift", "arm_ext",
                "wrist_yaw", "wrist_pitch", "gripper")


def plan_to_csv(plan: MotionPlan) -> str:
    """One row per config, 9 significant digits, header row."""
    out = io.StringIO()
    out.write(",".join(PLAN_COLUMNS) + "\n")
    for cfg in plan.configs:
        vals = [f"{getattr(cfg, c):.9g}" for c in PLAN_COLUMNS[:-1]]
        vals.append(cfg.gripper.value)
        out.write(",".join(vals) + "\n")
    return out.getvalue()


def plan_from_csv(text: str, traj: WaypointTrajectory) -> MotionPlan:
    lines = [ln for ln in text.strip().splitlines() if ln]
    if not lines or lines[0].split(",") != list(PLAN_COLUMNS):
        raise ValueError("unrecognized plan header")
    configs = []
    for ln in lines[1:]:
        parts = ln.split(",")
        nums = [float(x) for x in parts[:-1]]
        configs.append(RobotConfig(*nums, gripper=Gripper(parts[-1])))
    return MotionPlan(tuple(configs), len(configs), traj, 0)
