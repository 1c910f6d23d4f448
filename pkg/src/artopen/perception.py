"""Lifting 2-D detections into articulation parameters.

The detector upstream (replaced here by ground-truth files) hands over
a segmentation mask, an articulation type, a handle keypoint and a
handle orientation.  Everything geometric happens in this module: the
masked depth pixels become a base-frame point cloud, the cloud becomes
a face plane, the mask outline becomes a quadrilateral whose lifted
corners carry the hinge axis, and the handle keypoint becomes the 3-D
grasp point.  Hinge radius falls out as the handle's distance to the
axis line.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .articulation import (ArticulationParams, ArticulationType,
                           HandleOrientation)
from .errors import (DegenerateInput, DegeneratePlane, DegenerateQuad,
                     InsufficientDepth, InsufficientPoints, OutOfBounds)
from .geometry import (CameraModel, DepthImage, Plane, Vec3, backproject,
                       convex_hull, fit_plane, min_area_rect, normalize,
                       quat_to_matrix, ray_plane_intersection,
                       simplify_to_quad, vec3)
from .pgm import read_pgm, write_pgm
from .planner import face_frame

MIN_MASK_DEPTH_PIXELS = 50
HANDLE_WINDOW_HALF = 2         # the median fallback window is 5x5
MIN_CORNER_SEPARATION = 0.02   # m between the two axis corners
MIN_ORIENTATION_POINTS = 10


@dataclass(frozen=True, eq=False)
class Mask2D:
    """Boolean raster, True on the detected face."""

    bits: np.ndarray

    def __post_init__(self):
        bits = np.asarray(self.bits, dtype=bool)
        if bits.ndim != 2:
            raise ValueError("mask raster must be 2-D")
        object.__setattr__(self, "bits", bits)

    @property
    def height(self) -> int:
        return self.bits.shape[0]

    @property
    def width(self) -> int:
        return self.bits.shape[1]

    @property
    def pixel_count(self) -> int:
        return int(self.bits.sum())

    def pixels(self) -> np.ndarray:
        """(N, 2) int array of set pixels as (u, v)."""
        vs, us = np.nonzero(self.bits)
        return np.column_stack([us, vs])

    def bounding_box(self) -> tuple[int, int, int, int]:
        """(u0, v0, u1, v1) inclusive bounds of the set pixels."""
        if not self.bits.any():
            raise ValueError("empty mask has no bounding box")
        vs, us = np.nonzero(self.bits)
        return int(us.min()), int(vs.min()), int(us.max()), int(vs.max())


def mask_to_pgm(mask: Mask2D, path) -> None:
    """Binary P5 raster: 255 on the mask, 0 elsewhere."""
    write_pgm(path, mask.bits.astype(np.uint8) * 255)


def mask_from_pgm(path) -> Mask2D:
    return Mask2D(read_pgm(path) > 127)


@dataclass(frozen=True, eq=False)
class Detection2D:
    """One detected articulated face, image space."""

    mask: Mask2D
    atype: ArticulationType
    handle_px: tuple[float, float]
    handle_orientation: HandleOrientation
    score: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.score <= 1.0:
            raise OutOfBounds(f"detection score {self.score} outside [0, 1]")
        u, v = self.handle_px
        u0, v0, u1, v1 = self.mask.bounding_box()
        if not (u0 <= u <= u1 and v0 <= v <= v1):
            raise OutOfBounds(
                f"handle keypoint ({u:.1f}, {v:.1f}) outside the mask "
                f"bounding box ({u0}, {v0})..({u1}, {v1})")
        if not self.mask.bits[int(round(v)), int(round(u))]:
            warnings.warn("handle keypoint lies inside the bounding box "
                          "but off the mask bits", stacklevel=2)


# ---------------------------------------------------------------------------
# lifting helpers

def _to_base(points_cam: np.ndarray, camera: CameraModel) -> np.ndarray:
    rot = quat_to_matrix(camera.pose_in_base.q)
    return points_cam @ rot.T + camera.pose_in_base.t


def _pixel_ray(camera: CameraModel, u: float, v: float) -> Vec3:
    """Base-frame direction of the viewing ray through a (float) pixel."""
    d = np.array([(u - camera.cx) / camera.fx,
                  (v - camera.cy) / camera.fy, 1.0])
    return quat_to_matrix(camera.pose_in_base.q) @ d


def _ray_onto_plane(camera: CameraModel, u: float, v: float,
                    plane: Plane) -> np.ndarray:
    return ray_plane_intersection(camera.pose_in_base.t,
                                  _pixel_ray(camera, u, v), plane)


def _lift_handle(handle_px, depth: DepthImage, camera: CameraModel,
                 plane: Plane) -> np.ndarray:
    # depth at the keypoint = median of the valid 5x5 neighborhood; a
    # lone center pixel degenerates to the direct sample, an empty
    # window falls back to the camera ray meeting the face plane
    u, v = float(handle_px[0]), float(handle_px[1])
    ui = int(np.clip(round(u), 0, depth.width - 1))
    vi = int(np.clip(round(v), 0, depth.height - 1))
    w = HANDLE_WINDOW_HALF
    window = depth.data[max(vi - w, 0):vi + w + 1,
                        max(ui - w, 0):ui + w + 1]
    valid = window[window > 0]
    if valid.size:
        z = float(np.median(valid)) * 1e-3
        return _to_base(backproject((u, v), z, camera)[None, :], camera)[0]
    return _ray_onto_plane(camera, u, v, plane)


def _lift_corner(corner_px, depth: DepthImage, camera: CameraModel,
                 plane: Plane, force_plane: bool) -> np.ndarray:
    u, v = float(corner_px[0]), float(corner_px[1])
    ui = int(np.clip(round(u), 0, depth.width - 1))
    vi = int(np.clip(round(v), 0, depth.height - 1))
    # quad simplification can push corners past the raster edge; those
    # and invalid-depth corners fall back to the plane
    on_raster = camera.contains(u, v)
    if force_plane or not on_raster or not depth.valid(ui, vi):
        return _ray_onto_plane(camera, u, v, plane)
    return _to_base(backproject((u, v), depth.depth_m(ui, vi),
                                camera)[None, :], camera)[0]


def _quad_corners(pixels: np.ndarray) -> np.ndarray:
    pts = pixels.astype(np.float64)
    hull = convex_hull(pts)
    try:
        return simplify_to_quad(hull)
    except DegenerateInput:
        return min_area_rect(pts)


def _axis_corners(atype: ArticulationType, corners: np.ndarray,
                  normal: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """The two lifted corners the hinge line passes through."""
    frame = face_frame(normal)
    if atype is ArticulationType.BOTTOM_HINGE:
        order = np.argsort(corners[:, 2])
    else:
        lateral = corners @ frame[:, 1]
        order = np.argsort(lateral)
        if atype is ArticulationType.CABINET_RIGHT_HINGE:
            order = order[::-1]
    a, b = corners[order[0]], corners[order[1]]
    if np.linalg.norm(b - a) < MIN_CORNER_SEPARATION:
        raise DegenerateQuad(
            f"axis corners {np.round(a, 3)} and {np.round(b, 3)} are "
            f"closer than {MIN_CORNER_SEPARATION} m")
    return a, b


def _axis_direction(atype: ArticulationType, a: np.ndarray, b: np.ndarray,
                    frame: np.ndarray) -> np.ndarray:
    d = normalize(b - a)
    # sign convention matching the canonical scenes: vertical hinges
    # point up, bottom hinges along the face's rightward axis
    reference = -frame[:, 1] if atype is ArticulationType.BOTTOM_HINGE \
        else frame[:, 2]
    return d if float(np.dot(d, reference)) >= 0.0 else -d


# ---------------------------------------------------------------------------
# the lift

def lift_detection(det: Detection2D, depth: DepthImage, camera: CameraModel,
                   *, min_valid: int = MIN_MASK_DEPTH_PIXELS,
                   corners_from_plane: bool = False,
                   robust_plane: bool = False) -> ArticulationParams:
    """2-D detection plus depth to base-frame articulation parameters.

    The face normal comes from a least-squares plane over every valid
    masked depth pixel.  The handle lifts by direct depth lookup, then
    by the median of a 5x5 window, then by ray-plane intersection.  The
    mask hull simplifies to a quadrilateral whose corners lift by depth
    lookup with the same plane fallback (corners_from_plane forces the
    plane for all four); the hinge axis runs through the two corners on
    the hinge side and the radius is the handle's distance to that
    line.  Drawers carry no axis.
    """
    if (det.mask.height, det.mask.width) != (depth.height, depth.width):
        raise ValueError(
            f"mask raster {det.mask.width}x{det.mask.height} does not "
            f"match depth raster {depth.width}x{depth.height}")
    px = det.mask.pixels()
    z_mm = depth.data[px[:, 1], px[:, 0]]
    valid = z_mm > 0
    if int(valid.sum()) < min_valid:
        raise InsufficientDepth(
            f"{int(valid.sum())} masked pixels carry depth, "
            f"need {min_valid}")

    points_cam = np.empty((int(valid.sum()), 3))
    z = z_mm[valid].astype(np.float64) * 1e-3
    points_cam[:, 0] = (px[valid, 0] - camera.cx) * z / camera.fx
    points_cam[:, 1] = (px[valid, 1] - camera.cy) * z / camera.fy
    points_cam[:, 2] = z
    points = _to_base(points_cam, camera)

    try:
        plane = fit_plane(points, camera.pose_in_base.t, robust=robust_plane)
    except DegenerateInput as exc:
        raise DegeneratePlane(str(exc)) from exc
    normal = plane.normal

    handle = _lift_handle(det.handle_px, depth, camera, plane)
    if det.atype is ArticulationType.DRAWER:
        return ArticulationParams(det.atype, handle, normal,
                                  det.handle_orientation)

    corners_px = _quad_corners(px)
    corners = np.stack([_lift_corner(c, depth, camera, plane,
                                     corners_from_plane)
                        for c in corners_px])
    a, b = _axis_corners(det.atype, corners, normal)
    axis_dir = _axis_direction(det.atype, a, b, face_frame(normal))
    return ArticulationParams(det.atype, handle, normal,
                              det.handle_orientation,
                              axis_point=a, axis_dir=axis_dir)


def orientation_from_points(points, normal: Vec3 | None = None
                            ) -> HandleOrientation:
    """Handle orientation from the 3-D points of the handle segment.

    Compares spread along gravity with spread along the in-face
    horizontal.  Without a face normal the horizontal axis is the
    dominant direction of the points' ground-plane projection.  Ties
    go to Horizontal.
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 3:
        raise InsufficientPoints("expected an (N, 3) point array")
    if pts.shape[0] < MIN_ORIENTATION_POINTS:
        raise InsufficientPoints(
            f"{pts.shape[0]} points, need {MIN_ORIENTATION_POINTS}")
    vertical_var = float(np.var(pts[:, 2]))
    if normal is not None:
        horizontal = face_frame(vec3(normal))[:, 1]
        horizontal_var = float(np.var(pts @ horizontal))
    else:
        xy = pts[:, :2] - pts[:, :2].mean(axis=0)
        cov = xy.T @ xy / len(xy)
        horizontal_var = float(np.linalg.eigvalsh(cov)[-1])
    # ties go to Horizontal; the band absorbs float dust in the variances
    tie = 1e-9 * max(horizontal_var, vertical_var)
    return HandleOrientation.HORIZONTAL \
        if horizontal_var >= vertical_var - tie else HandleOrientation.VERTICAL
