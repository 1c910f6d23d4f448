"""Scenario files: the JSON surface of the command-line tool.

A scenario bundles one articulated object (ground truth plus collision
boxes), optional detection file references, robot model overrides,
extra obstacles, and experiment knobs.  Files use meters and degrees
so authors can type what they measure; everything converts to radians
at this boundary and nowhere else.  Schemas reject unknown keys so a
typo fails loudly instead of silently meaning defaults.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

import jsonschema
import numpy as np

from .articulation import (ArticulationParams, ArticulationType,
                           HandleOrientation)
from .execution import ErrorInjection, GraspModel
from .geometry import CameraModel, OrientedBox, Pose, vec3
from .planner import Scene, make_scene
from .robot import JointLimits, KinematicModel, RobotConfig, neutral_config
from .placement import PlacementGrid

_VEC3 = {"type": "array", "items": {"type": "number"},
         "minItems": 3, "maxItems": 3}
_VEC2 = {"type": "array", "items": {"type": "number"},
         "minItems": 2, "maxItems": 2}
_RANGE = {"oneOf": [{"type": "number"}, _VEC2]}

SCENARIO_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["object"],
    "properties": {
        "name": {"type": "string"},
        "object": {
            "type": "object",
            "additionalProperties": False,
            "required": ["type", "handle", "normal", "handle_orientation",
                         "face_half_width", "face_half_height"],
            "properties": {
                "type": {"enum": [t.value for t in ArticulationType]},
                "handle": _VEC3,
                "normal": _VEC3,
                "handle_orientation": {"enum": ["horizontal", "vertical"]},
                "axis_point": _VEC3,
                "axis_dir": _VEC3,
                "face_center": _VEC3,
                "face_half_width": {"type": "number"},
                "face_half_height": {"type": "number"},
                "body_z_center": {"type": "number"},
                "body_half_height": {"type": "number"},
            },
        },
        "detection": {
            "type": "object",
            "additionalProperties": False,
            "required": ["handle_px"],
            "properties": {
                "depth_pgm": {"type": "string"},
                "mask_pgm": {"type": "string"},
                "camera_json": {"type": "string"},
                "handle_px": _VEC2,
                "score": {"type": "number"},
            },
        },
        "robot": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "mast_offset": _VEC2,
                "arm_retracted": {"type": "number"},
                "arm_side": {"enum": [-1, 1]},
                "tip_len_open": {"type": "number"},
                "tip_shrink_closed": {"type": "number"},
                "tip_rise": {"type": "number"},
                "pitch_locked": {"type": "boolean"},
                "limits": {
                    "type": "object",
                    "additionalProperties": False,
                    "properties": {
                        "lift": _VEC2,
                        "arm_ext": _VEC2,
                        "wrist_yaw_deg": _VEC2,
                        "wrist_pitch_deg": _VEC2,
                    },
                },
            },
        },
        "scene": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "obstacles": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "additionalProperties": False,
                        "required": ["center", "half_extents"],
                        "properties": {
                            "center": _VEC3,
                            "half_extents": _VEC3,
                            "yaw_deg": {"type": "number"},
                        },
                    },
                },
            },
        },
        "experiment": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "seed": {"type": "integer", "minimum": 0},
                "trials": {"type": "integer", "minimum": 1},
                "target_deg": {"type": "number"},
                "target_m": {"type": "number"},
                "base_pose": {"type": "array", "items": {"type": "number"},
                              "minItems": 3, "maxItems": 3},
                "grasp": {
                    "type": "object",
                    "additionalProperties": False,
                    "properties": {
                        "tolerance_m": {"type": "number"},
                        "engage_margin_m": {"type": "number"},
                    },
                },
                "errors": {
                    "type": "object",
                    "additionalProperties": False,
                    "properties": {
                        "depth_m": _RANGE,
                        "lateral_m": _RANGE,
                        "vertical_m": _RANGE,
                        "base_x_m": _RANGE,
                        "base_y_m": _RANGE,
                        "base_yaw_deg": _RANGE,
                    },
                },
                "radius_deltas_m": {"type": "array",
                                    "items": {"type": "number"},
                                    "minItems": 1},
                "grid": {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["origin", "nx", "ny"],
                    "properties": {
                        "origin": _VEC2,
                        "spacing": {"type": "number"},
                        "nx": {"type": "integer", "minimum": 1},
                        "ny": {"type": "integer", "minimum": 1},
                        "yaw_candidates_deg": {"type": "array",
                                               "items": {"type": "number"},
                                               "minItems": 1},
                    },
                },
            },
        },
    },
}

CAMERA_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["position", "look_at"],
    "properties": {
        "fx": {"type": "number"},
        "fy": {"type": "number"},
        "width": {"type": "integer", "minimum": 1},
        "height": {"type": "integer", "minimum": 1},
        "position": _VEC3,
        "look_at": _VEC3,
    },
}


@dataclass(frozen=True)
class DetectionFiles:
    """File references resolved relative to the scenario's directory."""

    depth_pgm: Optional[Path]
    mask_pgm: Optional[Path]
    camera_json: Optional[Path]
    handle_px: tuple[float, float]
    score: float


@dataclass(frozen=True)
class ExperimentSpec:
    seed: int = 0
    trials: int = 1
    target: Optional[float] = None
    base_pose: Optional[tuple[float, float, float]] = None
    grasp: GraspModel = field(default_factory=GraspModel)
    error_ranges: dict = field(default_factory=dict)
    radius_deltas: tuple[float, ...] = (-0.10, -0.08, -0.06, -0.04, -0.02,
                                        0.0, 0.02, 0.04, 0.06, 0.08, 0.10)
    grid: Optional[PlacementGrid] = None

    def injection(self, seed: Optional[int] = None) -> ErrorInjection:
        return ErrorInjection(seed=self.seed if seed is None else seed,
                              **self.error_ranges)


@dataclass(frozen=True)
class Scenario:
    name: str
    scene: Scene
    model: KinematicModel
    experiment: ExperimentSpec
    detection: Optional[DetectionFiles]
    path: Path

    @property
    def params(self) -> ArticulationParams:
        return self.scene.params

    def start_config(self, mined) -> RobotConfig:
        """The pinned base pose if the file gives one, else the result
        of the supplied mining callback."""
        if self.experiment.base_pose is not None:
            return neutral_config(self.model, *self.experiment.base_pose)
        return mined()


def _validated(raw: dict, schema: dict, what: str) -> dict:
    try:
        jsonschema.validate(raw, schema)
    except jsonschema.ValidationError as exc:
        raise ValueError(f"{what} does not match the schema: "
                         f"{exc.message}") from exc
    return raw


def _params_from(obj: dict) -> ArticulationParams:
    atype = ArticulationType(obj["type"])
    axis_point = obj.get("axis_point")
    axis_dir = obj.get("axis_dir")
    return ArticulationParams(
        atype=atype,
        handle=vec3(obj["handle"]),
        normal=vec3(obj["normal"]),
        handle_orientation=HandleOrientation(obj["handle_orientation"]),
        axis_point=None if axis_point is None else vec3(axis_point),
        axis_dir=None if axis_dir is None else vec3(axis_dir))


def _scene_from(raw: dict) -> Scene:
    obj = raw["object"]
    params = _params_from(obj)
    obstacles = []
    for box in raw.get("scene", {}).get("obstacles", []):
        yaw = math.radians(box.get("yaw_deg", 0.0))
        obstacles.append(OrientedBox(
            Pose(t=vec3(box["center"])) if yaw == 0.0
            else Pose.from_yaw(yaw, vec3(box["center"])),
            np.asarray(box["half_extents"], dtype=float)))
    kwargs = {}
    for key in ("body_z_center", "body_half_height"):
        if key in obj:
            kwargs[key] = obj[key]
    return make_scene(
        params,
        face_center=vec3(obj.get("face_center", obj["handle"])),
        face_half_width=obj["face_half_width"],
        face_half_height=obj["face_half_height"],
        static_obstacles=tuple(obstacles), **kwargs)


def _model_from(raw: dict) -> KinematicModel:
    block = dict(raw.get("robot", {}))
    limits = block.pop("limits", None)
    model = KinematicModel()
    if "mast_offset" in block:
        block["mast_offset"] = tuple(block["mast_offset"])
    if "arm_side" in block:
        block["arm_side"] = float(block["arm_side"])
    if block:
        model = replace(model, **block)
    if limits:
        fields = {}
        for key, value in limits.items():
            if key.endswith("_deg"):
                fields[key[:-4]] = (math.radians(value[0]),
                                    math.radians(value[1]))
            else:
                fields[key] = tuple(value)
        model = replace(model, limits=replace(JointLimits(), **fields))
    return model


def _experiment_from(raw: dict, atype: ArticulationType) -> ExperimentSpec:
    block = raw.get("experiment", {})
    kwargs: dict = {}
    if "seed" in block:
        kwargs["seed"] = block["seed"]
    if "trials" in block:
        kwargs["trials"] = block["trials"]
    if "target_deg" in block and "target_m" in block:
        raise ValueError("give target_deg or target_m, not both")
    if "target_deg" in block:
        if not atype.hinged:
            raise ValueError("target_deg on a drawer scenario")
        kwargs["target"] = math.radians(block["target_deg"])
    if "target_m" in block:
        if atype.hinged:
            raise ValueError("target_m on a hinged scenario")
        kwargs["target"] = block["target_m"]
    if "base_pose" in block:
        x, y, yaw_deg = block["base_pose"]
        kwargs["base_pose"] = (x, y, math.radians(yaw_deg))
    if "grasp" in block:
        g = block["grasp"]
        grasp = GraspModel()
        if "tolerance_m" in g:
            grasp = replace(grasp, g=g["tolerance_m"])
        if "engage_margin_m" in g:
            grasp = replace(grasp, engage_margin=g["engage_margin_m"])
        kwargs["grasp"] = grasp
    if "errors" in block:
        ranges = {}
        for key, value in block["errors"].items():
            name = key[:-2] if key.endswith("_m") else key[:-4]
            if key.endswith("_deg"):
                value = (math.radians(value) if isinstance(value, (int, float))
                         else tuple(math.radians(v) for v in value))
            elif isinstance(value, list):
                value = tuple(value)
            ranges[name] = value
        kwargs["error_ranges"] = ranges
    if "radius_deltas_m" in block:
        kwargs["radius_deltas"] = tuple(block["radius_deltas_m"])
    if "grid" in block:
        g = block["grid"]
        grid_kwargs = {"origin": tuple(g["origin"]),
                       "nx": g["nx"], "ny": g["ny"]}
        if "spacing" in g:
            grid_kwargs["spacing"] = g["spacing"]
        if "yaw_candidates_deg" in g:
            grid_kwargs["yaws"] = tuple(math.radians(v)
                                        for v in g["yaw_candidates_deg"])
        kwargs["grid"] = PlacementGrid(**grid_kwargs)
    return ExperimentSpec(**kwargs)


def _detection_from(raw: dict, base: Path) -> Optional[DetectionFiles]:
    block = raw.get("detection")
    if block is None:
        return None

    def resolve(key):
        return None if key not in block else base / block[key]

    return DetectionFiles(depth_pgm=resolve("depth_pgm"),
                          mask_pgm=resolve("mask_pgm"),
                          camera_json=resolve("camera_json"),
                          handle_px=tuple(block["handle_px"]),
                          score=block.get("score", 1.0))


def load_scenario(path) -> Scenario:
    path = Path(path)
    raw = _validated(json.loads(path.read_text()), SCENARIO_SCHEMA,
                     f"scenario {path.name}")
    scene = _scene_from(raw)
    return Scenario(name=raw.get("name", path.stem),
                    scene=scene,
                    model=_model_from(raw),
                    experiment=_experiment_from(raw, scene.params.atype),
                    detection=_detection_from(raw, path.parent),
                    path=path)


def load_camera(path) -> CameraModel:
    """Camera JSON: intrinsics plus a position and a look-at point."""
    from .synthetic import camera_looking
    raw = _validated(json.loads(Path(path).read_text()), CAMERA_SCHEMA,
                     f"camera {Path(path).name}")
    return camera_looking(vec3(raw["position"]), vec3(raw["look_at"]),
                          fx=raw.get("fx", 525.0), fy=raw.get("fy", 525.0),
                          width=raw.get("width", 640),
                          height=raw.get("height", 480))
