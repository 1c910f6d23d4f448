"""Analytic pinhole rendering of rectangular furniture faces.

Test and demo data source for the perception lift: a planar
rectangular face rendered into a depth raster plus mask by exact
ray-plane intersection, with the ground-truth articulation parameters
carried alongside.  Depth quantizes to whole millimeters exactly like
a real sensor raster; optional Gaussian noise corrupts valid pixels.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .articulation import (ArticulationParams, ArticulationType,
                           HandleOrientation)
from .errors import DegenerateInput
from .geometry import (CameraModel, DepthImage, Pose, Vec3, normalize,
                       project, quat_from_matrix, quat_to_matrix, vec3)
from .perception import Detection2D, Mask2D
from .planner import face_frame

DEFAULT_FOCAL = 525.0
DEFAULT_WIDTH = 640
DEFAULT_HEIGHT = 480


def camera_looking(position: Vec3, target: Vec3, *,
                   fx: float = DEFAULT_FOCAL, fy: float = DEFAULT_FOCAL,
                   width: int = DEFAULT_WIDTH,
                   height: int = DEFAULT_HEIGHT) -> CameraModel:
    """Camera at a base-frame position with its optical axis on target.

    Image x runs rightward, image y downward, gravity fixes the roll.
    """
    position = vec3(position)
    forward = normalize(vec3(target) - position)
    if abs(forward[2]) > 0.999:
        raise DegenerateInput("optical axis too close to vertical")
    right = normalize(np.cross(forward, vec3(0.0, 0.0, 1.0)))
    down = np.cross(forward, right)
    rot = np.column_stack([right, down, forward])
    pose = Pose(quat_from_matrix(rot), position)
    return CameraModel(fx, fy, (width - 1) / 2.0, (height - 1) / 2.0,
                       width, height, pose)


def render_face(camera: CameraModel, center: Vec3, normal: Vec3,
                half_width: float, half_height: float
                ) -> tuple[DepthImage, Mask2D]:
    """Render one rectangular planar face to depth-in-mm plus mask."""
    center = vec3(center)
    n = normalize(vec3(normal))
    frame = face_frame(n)
    lateral, up = frame[:, 1], frame[:, 2]

    rot = quat_to_matrix(camera.pose_in_base.q)
    origin = camera.pose_in_base.t
    uu, vv = np.meshgrid(np.arange(camera.width, dtype=np.float64),
                         np.arange(camera.height, dtype=np.float64))
    dirs = np.stack([(uu - camera.cx) / camera.fx,
                     (vv - camera.cy) / camera.fy,
                     np.ones_like(uu)], axis=-1) @ rot.T
    with np.errstate(divide="ignore", invalid="ignore"):
        z = float(np.dot(n, center - origin)) / (dirs @ n)
    hits = origin + dirs * z[..., None]
    rel = hits - center
    inside = (np.isfinite(z) & (z > 0.0)
              & (np.abs(rel @ lateral) <= half_width)
              & (np.abs(rel @ up) <= half_height))
    millimeters = np.round(np.where(inside, z, 0.0) * 1000.0)
    return (DepthImage(np.clip(millimeters, 0, 65535).astype(np.uint16)),
            Mask2D(inside))


def add_depth_noise(depth: DepthImage, sigma: float, seed: int) -> DepthImage:
    """Gaussian depth noise (meters std) on valid pixels, quantized."""
    rng = np.random.default_rng(seed)
    jitter = rng.normal(0.0, sigma * 1000.0, size=depth.data.shape)
    noisy = np.round(depth.data.astype(np.float64) + jitter)
    noisy = np.where(depth.data > 0, np.clip(noisy, 1.0, 65535.0), 0.0)
    return DepthImage(noisy.astype(np.uint16))


@dataclass(frozen=True)
class SyntheticDetection:
    """A rendered detection with the parameters that generated it."""

    detection: Detection2D
    depth: DepthImage
    camera: CameraModel
    truth: ArticulationParams


_VERTICAL_HANDLES = (ArticulationType.CABINET_LEFT_HINGE,
                     ArticulationType.CABINET_RIGHT_HINGE)


def face_detection(atype: ArticulationType, *, width: float = 0.60,
                   height: float = 0.70, distance: float = 1.5,
                   center_height: float = 1.0, handle_inset: float = 0.05,
                   camera: CameraModel | None = None, sigma: float = 0.0,
                   seed: int = 0) -> SyntheticDetection:
    """Ground-truth detection of one frontal rectangular face.

    The face stands at base-frame x = distance with normal (-1, 0, 0).
    Hinged faces put the axis on the hinge edge and the handle inset
    from the opposite edge (top edge for bottom hinges); drawers take
    the face center.  The default camera looks at the face head-on
    from the base origin.
    """
    hw, hh = width / 2.0, height / 2.0
    center = vec3(distance, 0.0, center_height)
    normal = vec3(-1.0, 0.0, 0.0)
    if camera is None:
        camera = camera_looking(vec3(0.0, 0.0, center_height), center)

    axis_point = axis_dir = None
    orientation = (HandleOrientation.VERTICAL
                   if atype in _VERTICAL_HANDLES
                   else HandleOrientation.HORIZONTAL)
    if atype is ArticulationType.DRAWER:
        handle = center
    elif atype is ArticulationType.CABINET_LEFT_HINGE:
        handle = vec3(distance, -(hw - handle_inset), center_height)
        axis_point, axis_dir = vec3(distance, hw, 0.0), vec3(0.0, 0.0, 1.0)
    elif atype is ArticulationType.CABINET_RIGHT_HINGE:
        handle = vec3(distance, hw - handle_inset, center_height)
        axis_point, axis_dir = vec3(distance, -hw, 0.0), vec3(0.0, 0.0, 1.0)
    else:
        handle = vec3(distance, 0.0, center_height + hh - handle_inset)
        axis_point = vec3(distance, 0.0, center_height - hh)
        axis_dir = vec3(0.0, 1.0, 0.0)
    truth = ArticulationParams(atype, handle, normal, orientation,
                               axis_point=axis_point, axis_dir=axis_dir)

    depth, mask = render_face(camera, center, normal, hw, hh)
    if sigma > 0.0:
        depth = add_depth_noise(depth, sigma, seed)
    handle_px = project(camera.pose_in_base.inverse().transform_point(handle),
                        camera)
    detection = Detection2D(mask, atype, handle_px, orientation)
    return SyntheticDetection(detection, depth, camera, truth)
