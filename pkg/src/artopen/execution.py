"""Simulated execution against the true object.

Planning runs on the robot's belief; physics runs on the truth.  The
pieces here inject the gap between the two (perception and navigation
error), close it where possible (contact correction before grasping),
and score what remains through a quasi-static grasp coupling: the door
opens exactly as far as the gripper drags it, and the gripper loses the
handle once the planned path strays more than the grasp tolerance from
the true handle arc.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .articulation import (ArticulationParams, ArticulationType,
                           HandleOrientation, WaypointTrajectory, full_travel,
                           generate_waypoints, handle_at)
from .errors import EmptyPlan, LimitViolation, NoContact, OutOfBounds
from .geometry import Pose, vec3
from .planner import MotionPlan, Scene, face_frame, seq_ik
from .robot import (Gripper, KinematicModel, RobotConfig, approach_vector,
                    fingertip_position, fk, within_limits)

DRAWER_SUCCESS = 0.24          # m pulled out
HINGE_SUCCESS = math.pi / 3    # 60 degrees

CORRECTION_STEP_LINEAR = 0.01      # m of arm extension per increment
CORRECTION_STEP_ANGULAR = math.radians(1.0)
CORRECTION_MAX_STEPS = 15
VERTICAL_MAX_STEPS = 5
CONTACT_RADIUS = 0.01          # fingertip within 1 cm of the true handle
# Boundary contact counts as not-yet-contact; the epsilon absorbs float
# dust so increment counts stay exact when errors are round numbers.
_CONTACT_EPS = 1e-12

GOLDEN_TOL_ANGULAR = 1e-4
GOLDEN_TOL_LINEAR = 1e-5


@dataclass(frozen=True)
class GraspModel:
    """Grasp tolerance of the closed gripper.

    g bounds how far the handle may drift from the hand-hold point
    before the fingers lose it.  engage_margin bounds how far the bar
    may sit beyond the closed fingertip along the approach and still
    end up inside the finger span when closing: fingers wrap past the
    bar, they do not stretch to it.
    """

    g: float = 0.04
    engage_margin: float = 0.03

    def __post_init__(self) -> None:
        if self.g <= 0.0:
            raise OutOfBounds(f"grasp tolerance must be positive, got {self.g}")


@dataclass(frozen=True)
class ExecutionResult:
    grasped: bool
    corrections: int = 0
    correction_delta: Pose = field(default_factory=Pose.identity)
    waypoints_executed: int = 0
    final_opening: float = 0.0
    success: bool = False
    slip_step: Optional[int] = None


@dataclass(frozen=True)
class Correction:
    """Outcome of the contact-correction phase."""

    config: RobotConfig
    delta: Pose
    steps: int

    def __iter__(self):
        return iter((self.config, self.delta))


@dataclass(frozen=True)
class TrialErrors:
    """One sampled draw: where the belief actually sits vs the truth."""

    handle_offset: np.ndarray                 # believed - true, world frame
    base_offset: tuple[float, float, float]   # dx, dy, dyaw


def _as_range(v) -> tuple[float, float]:
    if isinstance(v, (int, float)):
        return (float(v), float(v))
    lo, hi = float(v[0]), float(v[1])
    if hi < lo:
        raise OutOfBounds(f"range ({lo}, {hi}) is inverted")
    return (lo, hi)


@dataclass(frozen=True)
class ErrorInjection:
    """Uniform error ranges, one draw per trial.

    Handle errors live in the face frame of the true object: depth is
    along the outward normal (positive = believed shallow, nearer the
    robot), lateral along the face's leftward axis, vertical up.  Base
    errors displace where the robot actually stands versus where the
    plan put it.  A scalar is shorthand for a degenerate range.
    """

    depth: tuple[float, float] = (0.0, 0.0)
    lateral: tuple[float, float] = (0.0, 0.0)
    vertical: tuple[float, float] = (0.0, 0.0)
    base_x: tuple[float, float] = (0.0, 0.0)
    base_y: tuple[float, float] = (0.0, 0.0)
    base_yaw: tuple[float, float] = (0.0, 0.0)
    seed: int = 0

    def __post_init__(self) -> None:
        for name in ("depth", "lateral", "vertical",
                     "base_x", "base_y", "base_yaw"):
            object.__setattr__(self, name, _as_range(getattr(self, name)))

    def sample(self, params: ArticulationParams, trial: int) -> TrialErrors:
        """Per-trial draw, deterministic in (seed, trial index)."""
        rng = np.random.default_rng([self.seed, trial])
        depth = rng.uniform(*self.depth)
        lateral = rng.uniform(*self.lateral)
        vertical = rng.uniform(*self.vertical)
        dx = rng.uniform(*self.base_x)
        dy = rng.uniform(*self.base_y)
        dyaw = rng.uniform(*self.base_yaw)
        frame = face_frame(params.normal)
        offset = frame[:, 0] * depth + frame[:, 1] * lateral \
            + frame[:, 2] * vertical
        return TrialErrors(offset, (dx, dy, dyaw))


# ---------------------------------------------------------------------------
# belief manipulation

def transform_scene(scene: Scene, delta: Pose) -> Scene:
    """The whole perceived object rigidly moved: params and boxes together."""
    return Scene(transform_params(scene.params, delta),
                 scene.body.transformed(delta),
                 scene.panel_closed.transformed(delta),
                 tuple(b.transformed(delta) for b in scene.static_obstacles))


def shifted_scene(scene: Scene, offset) -> Scene:
    """The whole perceived object translated: params and boxes together."""
    return transform_scene(scene, Pose(t=vec3(offset)))


def transform_params(params: ArticulationParams,
                     delta: Pose) -> ArticulationParams:
    """Rigidly transform the believed articulation by delta."""
    axis_point = None if params.axis_point is None \
        else delta.transform_point(params.axis_point)
    axis_dir = None if params.axis_dir is None \
        else delta.rotate_vector(params.axis_dir)
    return ArticulationParams(params.atype,
                              delta.transform_point(params.handle),
                              delta.rotate_vector(params.normal),
                              params.handle_orientation,
                              axis_point, axis_dir, params.radius)


# ---------------------------------------------------------------------------
# pre-grasp and contact correction

def pre_grasp(plan: MotionPlan) -> RobotConfig:
    """The first decoded configuration: drive there, then close the hand."""
    if plan.achieved < 1 or not plan.configs:
        raise EmptyPlan("plan decoded no waypoints")
    return plan.configs[0]


def _true_face_plane(scene: Scene) -> tuple[np.ndarray, np.ndarray]:
    """(point, outward normal) of the physical panel's front surface."""
    panel = scene.panel_closed
    n = vec3(scene.params.normal)
    point = panel.pose.t + n * float(panel.half_extents[0])
    return point, n


def _beyond_plane(tip: np.ndarray, point: np.ndarray,
                  normal: np.ndarray) -> bool:
    return float(np.dot(tip - point, -normal)) > _CONTACT_EPS


def _in_contact(tip: np.ndarray, scene: Scene,
                true_params: ArticulationParams) -> bool:
    point, n = _true_face_plane(scene)
    if _beyond_plane(tip, point, n):
        return True
    handle = handle_at(true_params, 0.0)
    return float(np.linalg.norm(tip - handle)) < CONTACT_RADIUS - _CONTACT_EPS


def _step_config(config: RobotConfig,
                 believed: ArticulationParams) -> RobotConfig:
    """One correction increment toward the believed surface."""
    if believed.atype is ArticulationType.CABINET_LEFT_HINGE:
        return replace(config, base_yaw=config.base_yaw
                       + CORRECTION_STEP_ANGULAR)
    return replace(config, arm_ext=config.arm_ext + CORRECTION_STEP_LINEAR)


def contact_correct(pre: RobotConfig, believed: ArticulationParams,
                    true_params: ArticulationParams, scene: Scene,
                    model: KinematicModel) -> Correction:
    """Creep toward the surface until the fingertip registers contact.

    Vertical handles first: step the lift toward the believed handle
    height (the fingers must land on the bar, not above or below it),
    then advance: drawers, right-hinge and bottom-hinge doors extend
    the arm 1 cm per step, left-hinge doors rotate the base 1 degree
    per step.  Contact is the fingertip passing the physical face plane
    or coming within 1 cm of the true handle.  The step caps bound how
    long a hopeless correction is allowed to grope.
    """
    if not within_limits(pre, model):
        raise LimitViolation("correction must start inside joint limits")
    start_pose = fk(pre, model)
    config = pre
    steps = 0

    if believed.handle_orientation is HandleOrientation.VERTICAL:
        for _ in range(VERTICAL_MAX_STEPS):
            gap = float(believed.handle[2]
                        - fingertip_position(config, model)[2])
            if abs(gap) <= CORRECTION_STEP_LINEAR:
                break
            candidate = replace(config, lift=config.lift
                                + math.copysign(CORRECTION_STEP_LINEAR, gap))
            if not within_limits(candidate, model):
                raise LimitViolation("vertical correction exceeds lift range")
            config = candidate
            steps += 1

    for _ in range(CORRECTION_MAX_STEPS):
        tip = fingertip_position(config, model)
        if _in_contact(tip, scene, true_params):
            delta = fk(config, model) @ start_pose.inverse()
            return Correction(config, delta, steps)
        candidate = _step_config(config, believed)
        if not within_limits(candidate, model):
            raise LimitViolation("correction increment exceeds joint limits")
        config = candidate
        steps += 1
    raise NoContact(f"no contact after {CORRECTION_MAX_STEPS} increments")


def update_plan(plan: MotionPlan, traj: WaypointTrajectory, delta: Pose,
                scene: Scene, model: KinematicModel, *,
                corrected: Optional[RobotConfig] = None,
                full_replan: bool = False, retries: int = 0) -> MotionPlan:
    """Fold the correction delta back into the plan.

    The delta measures how far the world sits from the belief, so the
    whole belief moves by it: waypoints and scene together (re-decoding
    moved waypoints against unmoved boxes would reject them as
    collisions with furniture that is not actually there).  Default:
    rigidly transform the remaining waypoints and re-decode, seeded
    from the corrected configuration.  full_replan instead regenerates
    the trajectory from the moved articulation (the two agree for pure
    translations).
    """
    seed = corrected if corrected is not None \
        else (plan.configs[0] if plan.configs else None)
    if seed is None:
        raise EmptyPlan("nothing to update: plan decoded no waypoints")
    moved_scene = transform_scene(scene, delta)
    if full_replan:
        new_traj = generate_waypoints(moved_scene.params, traj.target,
                                      len(traj))
        return seq_ik(seed, new_traj, moved_scene, model, retries=retries)
    moved = WaypointTrajectory(traj.atype,
                               tuple(delta @ p for p in traj.poses),
                               traj.openings, traj.target)
    return seq_ik(seed, moved, moved_scene, model, retries=retries)


# ---------------------------------------------------------------------------
# quasi-static execution

def _golden_min(f, lo: float, hi: float, tol: float) -> float:
    """Argmin of a unimodal f on [lo, hi]."""
    if hi - lo <= tol:
        return (lo + hi) / 2
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    return (a + b) / 2


def grasp_engaged(config: RobotConfig, true_params: ArticulationParams,
                  grasp: GraspModel, model: KinematicModel) -> bool:
    """Does closing the hand at this config actually capture the bar?

    The closed fingertip retracts by the finger wrap depth, so the bar
    may sit a little beyond it and still land inside the finger span;
    a bar further out than engage_margin leaves the fingers pinching
    air in front of it, and anything outside the g ball is a miss.
    """
    closed = replace(config, gripper=Gripper.CLOSED)
    tip = fingertip_position(closed, model)
    handle = handle_at(true_params, 0.0)
    if float(np.linalg.norm(tip - handle)) > grasp.g:
        return False
    shortfall = float(np.dot(handle - tip, approach_vector(config, model)))
    return shortfall <= grasp.engage_margin


def execute(plan: MotionPlan, true_params: ArticulationParams,
            grasp: GraspModel, model: KinematicModel, *,
            target: Optional[float] = None) -> ExecutionResult:
    """Run the plan against the true object under quasi-static coupling.

    The object opens exactly as far as the hand drags it: after each
    config the opening advances to the arc point nearest the planned
    hand-hold, never receding, and the trial slips at the first config
    whose nearest arc point is further than the grasp tolerance.
    """
    if not plan.configs:
        raise EmptyPlan("cannot execute an empty plan")
    if not grasp_engaged(plan.configs[0], true_params, grasp, model):
        return ExecutionResult(grasped=False)

    upper = full_travel(true_params.atype) if target is None else target
    tol = GOLDEN_TOL_LINEAR \
        if true_params.atype is ArticulationType.DRAWER else GOLDEN_TOL_ANGULAR
    phi = 0.0
    executed = 0
    slip: Optional[int] = None
    for i, config in enumerate(plan.configs):
        hold = fingertip_position(config, model)

        def dist(x: float) -> float:
            return float(np.linalg.norm(hold - handle_at(true_params, x)))

        phi_i = _golden_min(dist, phi, upper, tol)
        if dist(phi_i) > grasp.g:
            slip = i
            break
        phi = phi_i
        executed += 1

    threshold = DRAWER_SUCCESS \
        if true_params.atype is ArticulationType.DRAWER else HINGE_SUCCESS
    return ExecutionResult(grasped=True, waypoints_executed=executed,
                           final_opening=phi, success=phi >= threshold,
                           slip_step=slip)


# ---------------------------------------------------------------------------
# full trial: inject, plan, correct, execute

def run_trial(scene: Scene, theta0: RobotConfig, errors: TrialErrors,
              grasp: GraspModel, model: KinematicModel, *,
              correct: bool = True, full_replan: bool = False,
              retries: int = 0) -> ExecutionResult:
    """One end-to-end trial: the belief plans, the truth judges.

    The believed object is the true one displaced by the sampled handle
    offset (boxes included: perception moves the whole model).  The
    base offset displaces where every planned config actually stands.
    Correction failures are failed trials, not exceptions.
    """
    true_params = scene.params
    believed_scene = shifted_scene(scene, errors.handle_offset)
    traj = generate_waypoints(believed_scene.params)
    plan = seq_ik(theta0, traj, believed_scene, model, retries=retries)

    dx, dy, dyaw = errors.base_offset
    placed = tuple(replace(c, base_x=c.base_x + dx, base_y=c.base_y + dy,
                           base_yaw=c.base_yaw + dyaw) for c in plan.configs)
    plan = replace(plan, configs=placed)
    if not plan.configs:
        return ExecutionResult(grasped=False)

    corrections = 0
    delta = Pose.identity()
    if correct:
        try:
            corr = contact_correct(pre_grasp(plan), believed_scene.params,
                                   true_params, scene, model)
        except (NoContact, LimitViolation):
            return ExecutionResult(grasped=False,
                                   corrections=CORRECTION_MAX_STEPS)
        corrections, delta = corr.steps, corr.delta
        plan = update_plan(plan, traj, delta, believed_scene, model,
                           corrected=corr.config, full_replan=full_replan,
                           retries=retries)
        if not plan.configs:
            return ExecutionResult(grasped=False, corrections=corrections,
                                   correction_delta=delta)

    result = execute(plan, true_params, grasp, model)
    return replace(result, corrections=corrections, correction_delta=delta)


# ---------------------------------------------------------------------------
# experiments

def radius_sweep(true_params: ArticulationParams, deltas: Sequence[float],
                 grasp: GraspModel, model: KinematicModel, scene: Scene, *,
                 theta0: Optional[RobotConfig] = None
                 ) -> list[tuple[float, float]]:
    """Plan with a perturbed radius, execute against the truth.

    Only the believed hinge radius is wrong; handle, normal and axis
    direction stay at ground truth, so every plan still starts at the
    real handle and the error builds up over the pull.  Navigation is
    part of each plan: by default every believed radius gets its own
    mined base placement, so the final angle measures the grasp-slip
    geometry rather than one parking spot's reach envelope.  Pass
    theta0 to pin the base instead.
    """
    if not true_params.atype.hinged:
        raise OutOfBounds("radius sweep needs a hinged object")
    if true_params.radius + min(deltas) <= 0.05:
        raise OutOfBounds("perturbed radius would collapse below 5 cm")
    out = []
    for dr in deltas:
        believed = true_params.with_radius(true_params.radius + dr)
        bscene = scene.with_params(believed)
        start = theta0 if theta0 is not None else _mined_start(bscene, model)
        traj = generate_waypoints(believed)
        plan = seq_ik(start, traj, bscene, model)
        if plan.configs:
            result = execute(plan, true_params, grasp, model)
            final = result.final_opening
        else:
            final = 0.0
        out.append((float(dr), final))
    return out


_TARGET_KEYS = {
    ArticulationType.DRAWER: "drawer",
    ArticulationType.CABINET_LEFT_HINGE: "cabinet_left",
    ArticulationType.CABINET_RIGHT_HINGE: "cabinet_right",
    ArticulationType.BOTTOM_HINGE: "oven",
}


def _default_start(params: ArticulationParams,
                   model: KinematicModel) -> RobotConfig:
    """Neutral arm at the cached navigation target for this object type."""
    from .placement import canonical_targets
    from .robot import neutral_config
    nt = canonical_targets()[_TARGET_KEYS[params.atype]]
    return neutral_config(model, *nt.world_pose(params))


def _mined_start(scene: Scene, model: KinematicModel) -> RobotConfig:
    """Mine a base placement for this belief, nearest the cached target."""
    from .placement import canonical_targets, mine, navigation_target
    from .robot import neutral_config
    seed = canonical_targets()[_TARGET_KEYS[scene.params.atype]]
    heatmap = mine(scene, model, early_exit=True, seed_xy=(seed.x, seed.y))
    best = navigation_target(heatmap)
    return neutral_config(model, *best.world_pose(scene.params))


@dataclass(frozen=True)
class AblationResult:
    rate_with: float
    rate_without: float
    with_results: tuple[ExecutionResult, ...]
    without_results: tuple[ExecutionResult, ...]


def ablate_contact_correction(cases: Sequence[tuple[Scene, RobotConfig]],
                              injection: ErrorInjection, trials: int,
                              grasp: GraspModel, model: KinematicModel, *,
                              full_replan: bool = False) -> AblationResult:
    """Paired trials: the same sampled errors run with and without the
    contact-correction phase, so the rate gap isolates the phase."""
    if trials < 1:
        raise OutOfBounds("need at least one trial")
    with_r: list[ExecutionResult] = []
    without_r: list[ExecutionResult] = []
    for t in range(trials):
        scene, theta0 = cases[t % len(cases)]
        errs = injection.sample(scene.params, t)
        with_r.append(run_trial(scene, theta0, errs, grasp, model,
                                correct=True, full_replan=full_replan))
        without_r.append(run_trial(scene, theta0, errs, grasp, model,
                                   correct=False))
    rate = lambda rs: sum(r.success for r in rs) / len(rs)
    return AblationResult(rate(with_r), rate(without_r),
                          tuple(with_r), tuple(without_r))


def waypoints_histogram(results: Sequence[ExecutionResult],
                        max_waypoints: int) -> np.ndarray:
    """Counts of trials by waypoints executed, bins 0..max_waypoints."""
    counts = np.zeros(max_waypoints + 1, dtype=int)
    for r in results:
        counts[min(r.waypoints_executed, max_waypoints)] += 1
    return counts
