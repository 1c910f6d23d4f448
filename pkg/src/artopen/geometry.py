"""Geometry primitives: poses, pinhole camera ops, plane fits, hulls, boxes.

Conventions used throughout the package:

* Frames are right-handed.  The robot base frame has x forward, y left,
  z up; yaw is a rotation about +z with zero along +x.
* The camera frame is the usual optical one: +z out of the lens,
  +x right, +y down.  Pixel coordinates are (u, v) with u along +x and
  v along +y; pixel centers sit on integer coordinates.
* Quaternions are stored (w, x, y, z) and kept unit-norm.
* Lengths are meters, angles radians, unless a name says otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateInput, InvalidDepth, OutOfBounds

Vec3 = np.ndarray  # shape (3,), float64


def vec3(x, y=None, z=None) -> Vec3:
    """Build a float64 3-vector from components or any length-3 sequence."""
    if y is None:
        a = np.asarray(x, dtype=np.float64)
        if a.shape != (3,):
            raise ValueError(f"expected 3 components, got shape {a.shape}")
        return a
    return np.array([x, y, z], dtype=np.float64)


def normalize(v: Vec3) -> Vec3:
    n = float(np.linalg.norm(v))
    if n < 1e-12:
        raise DegenerateInput("cannot normalize a near-zero vector")
    return v / n


def wrap_angle(a: float) -> float:
    """Wrap to (-pi, pi], ties at pi resolved toward +pi."""
    r = math.remainder(a, math.tau)
    if r <= -math.pi:
        r += math.tau
    return r


# ---------------------------------------------------------------------------
# Quaternions (w, x, y, z)

def quat_identity() -> np.ndarray:
    return np.array([1.0, 0.0, 0.0, 0.0])


def quat_from_axis_angle(axis: Vec3, angle: float) -> np.ndarray:
    u = normalize(np.asarray(axis, dtype=np.float64))
    h = 0.5 * angle
    s = math.sin(h)
    return np.array([math.cos(h), u[0] * s, u[1] * s, u[2] * s])


def quat_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    aw, ax, ay, az = a
    bw, bx, by, bz = b
    return np.array([
        aw * bw - ax * bx - ay * by - az * bz,
        aw * bx + ax * bw + ay * bz - az * by,
        aw * by - ax * bz + ay * bw + az * bx,
        aw * bz + ax * by - ay * bx + az * bw,
    ])


def quat_conj(q: np.ndarray) -> np.ndarray:
    return np.array([q[0], -q[1], -q[2], -q[3]])


def quat_rotate(q: np.ndarray, v: Vec3) -> Vec3:
    # q * (0, v) * q^-1, expanded to avoid building intermediate quats
    w, x, y, z = q
    vx, vy, vz = v[0], v[1], v[2]
    tx = 2.0 * (y * vz - z * vy)
    ty = 2.0 * (z * vx - x * vz)
    tz = 2.0 * (x * vy - y * vx)
    return np.array([
        vx + w * tx + y * tz - z * ty,
        vy + w * ty + z * tx - x * tz,
        vz + w * tz + x * ty - y * tx,
    ])


def quat_to_matrix(q: np.ndarray) -> np.ndarray:
    w, x, y, z = q
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
        [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
        [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
    ])


def quat_from_matrix(m: np.ndarray) -> np.ndarray:
    """Shepperd's method; m must be a proper rotation."""
    t = np.trace(m)
    if t > 0:
        s = math.sqrt(t + 1.0) * 2.0
        return np.array([0.25 * s,
                         (m[2, 1] - m[1, 2]) / s,
                         (m[0, 2] - m[2, 0]) / s,
                         (m[1, 0] - m[0, 1]) / s])
    i = int(np.argmax(np.diag(m)))
    j, k = (i + 1) % 3, (i + 2) % 3
    s = math.sqrt(max(m[i, i] - m[j, j] - m[k, k] + 1.0, 0.0)) * 2.0
    q = np.empty(4)
    q[0] = (m[k, j] - m[j, k]) / s
    q[1 + i] = 0.25 * s
    q[1 + j] = (m[j, i] + m[i, j]) / s
    q[1 + k] = (m[k, i] + m[i, k]) / s
    if q[0] < 0:
        q = -q
    return q


@dataclass(frozen=True)
class Pose:
    """Rigid transform: rotation quaternion q (w,x,y,z) plus translation t."""

    q: np.ndarray = field(default_factory=quat_identity)
    t: Vec3 = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        object.__setattr__(self, "q", np.asarray(self.q, dtype=np.float64))
        object.__setattr__(self, "t", np.asarray(self.t, dtype=np.float64))

    @staticmethod
    def identity() -> "Pose":
        return Pose()

    @staticmethod
    def from_yaw(yaw: float, t=(0.0, 0.0, 0.0)) -> "Pose":
        return Pose(quat_from_axis_angle(np.array([0.0, 0.0, 1.0]), yaw), vec3(t))

    @staticmethod
    def from_axis_angle(axis, angle: float, t=(0.0, 0.0, 0.0)) -> "Pose":
        return Pose(quat_from_axis_angle(vec3(axis), angle), vec3(t))

    def compose(self, other: "Pose") -> "Pose":
        """self applied after... i.e. returns self ∘ other (other acts first)."""
        return Pose(quat_mul(self.q, other.q), self.t + quat_rotate(self.q, other.t))

    def __matmul__(self, other: "Pose") -> "Pose":
        return self.compose(other)

    def inverse(self) -> "Pose":
        qc = quat_conj(self.q)
        return Pose(qc, -quat_rotate(qc, self.t))

    def transform_point(self, p: Vec3) -> Vec3:
        return quat_rotate(self.q, np.asarray(p, dtype=np.float64)) + self.t

    def rotate_vector(self, v: Vec3) -> Vec3:
        return quat_rotate(self.q, np.asarray(v, dtype=np.float64))

    def matrix(self) -> np.ndarray:
        """4x4 homogeneous matrix."""
        m = np.eye(4)
        m[:3, :3] = quat_to_matrix(self.q)
        m[:3, 3] = self.t
        return m


def rotate_about_line(point: Vec3, line_point: Vec3, line_dir: Vec3,
                      angle: float) -> Vec3:
    """Rodrigues rotation of a point about an arbitrary axis line."""
    k = normalize(vec3(line_dir))
    p = vec3(point) - vec3(line_point)
    c, s = math.cos(angle), math.sin(angle)
    rotated = p * c + np.cross(k, p) * s + k * float(np.dot(k, p)) * (1.0 - c)
    return rotated + vec3(line_point)


# ---------------------------------------------------------------------------
# Pinhole camera

@dataclass(frozen=True)
class CameraModel:
    """Pinhole intrinsics plus the camera's pose in the robot base frame."""

    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int
    pose_in_base: Pose = field(default_factory=Pose.identity)

    def contains(self, u: float, v: float) -> bool:
        return 0.0 <= u <= self.width - 1 and 0.0 <= v <= self.height - 1


@dataclass
class DepthImage:
    """Depth raster in millimeters, uint16, 0 = invalid."""

    data: np.ndarray  # (height, width) uint16

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=np.uint16)
        if self.data.ndim != 2:
            raise ValueError("depth raster must be 2-D")

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    def depth_m(self, u: int, v: int) -> float:
        """Depth in meters at a pixel; 0.0 means invalid."""
        return float(self.data[v, u]) * 1e-3

    def valid(self, u: int, v: int) -> bool:
        return self.data[v, u] > 0


def backproject(pixel, depth_m: float, camera: CameraModel) -> Vec3:
    """Lift one pixel with known depth to a camera-frame 3-D point.

    Depth is the +z (optical axis) coordinate, not the ray length.
    """
    u, v = float(pixel[0]), float(pixel[1])
    if not camera.contains(u, v):
        raise OutOfBounds(f"pixel ({u:.1f}, {v:.1f}) outside "
                          f"{camera.width}x{camera.height} raster")
    if depth_m <= 0.0:
        raise InvalidDepth(f"depth {depth_m} must be positive")
    return np.array([(u - camera.cx) * depth_m / camera.fx,
                     (v - camera.cy) * depth_m / camera.fy,
                     depth_m])


def project(point_cam: Vec3, camera: CameraModel) -> tuple[float, float]:
    """Camera-frame point to pixel coordinates.  Inverse of backproject."""
    x, y, z = point_cam
    if z <= 0.0:
        raise InvalidDepth("point is behind the image plane")
    return (camera.fx * x / z + camera.cx, camera.fy * y / z + camera.cy)


# ---------------------------------------------------------------------------
# Plane fitting

@dataclass(frozen=True)
class Plane:
    """Plane as unit normal n and offset d with n . p = d for points p on it."""

    normal: Vec3
    offset: float

    def signed_distance(self, p: Vec3) -> float:
        return float(np.dot(self.normal, p)) - self.offset


def fit_plane(points: np.ndarray, view_origin: Vec3,
              robust: bool = False) -> Plane:
    """Least-squares plane through 3-D points.

    The normal is the eigenvector of the points' covariance with the
    smallest eigenvalue, sign-flipped so it faces view_origin.  With
    robust=True one outlier-rejection pass drops points whose residual
    exceeds 3 sigma and refits.
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 3 or pts.shape[0] < 3:
        raise DegenerateInput("plane fit needs at least 3 points of shape (N, 3)")

    plane = _fit_plane_once(pts, view_origin)
    if robust:
        res = pts @ plane.normal - plane.offset
        sigma = float(np.std(res))
        if sigma > 0.0:
            keep = np.abs(res) <= 3.0 * sigma
            if keep.sum() >= 3 and keep.sum() < len(pts):
                plane = _fit_plane_once(pts[keep], view_origin)
    return plane


def _fit_plane_once(pts: np.ndarray, view_origin: Vec3) -> Plane:
    centroid = pts.mean(axis=0)
    centered = pts - centroid
    cov = centered.T @ centered / len(pts)
    evals, evecs = np.linalg.eigh(cov)  # ascending eigenvalues
    if evals[1] < 1e-12:
        raise DegenerateInput("points are collinear; plane is not unique")
    normal = evecs[:, 0]
    if float(np.dot(normal, vec3(view_origin) - centroid)) < 0.0:
        normal = -normal
    return Plane(normal / np.linalg.norm(normal), float(np.dot(normal, centroid)))


def ray_plane_intersection(origin: Vec3, direction: Vec3, plane: Plane) -> Vec3:
    d = normalize(vec3(direction))
    denom = float(np.dot(plane.normal, d))
    if abs(denom) < 1e-9:
        raise DegenerateInput("ray is parallel to the plane")
    t = (plane.offset - float(np.dot(plane.normal, origin))) / denom
    if t <= 0.0:
        raise DegenerateInput("plane is behind the ray origin")
    return vec3(origin) + t * d


# ---------------------------------------------------------------------------
# 2-D convex hulls and quad simplification (pixel space)

def _cross2(o, a, b) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def convex_hull(points: np.ndarray) -> np.ndarray:
    """Convex hull of 2-D points via monotone chain.

    Returns vertices in counter-clockwise order (treating (u, v) as
    ordinary xy axes) with no three consecutive vertices collinear.
    """
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    uniq = np.unique(pts, axis=0)
    if len(uniq) < 3:
        raise DegenerateInput("hull needs at least 3 distinct points")
    order = np.lexsort((uniq[:, 1], uniq[:, 0]))
    p = uniq[order]

    lower: list[np.ndarray] = []
    for pt in p:
        while len(lower) >= 2 and _cross2(lower[-2], lower[-1], pt) <= 0:
            lower.pop()
        lower.append(pt)
    upper: list[np.ndarray] = []
    for pt in p[::-1]:
        while len(upper) >= 2 and _cross2(upper[-2], upper[-1], pt) <= 0:
            upper.pop()
        upper.append(pt)
    hull = lower[:-1] + upper[:-1]
    if len(hull) < 3:
        raise DegenerateInput("points are collinear; hull is degenerate")
    return np.array(hull)


def polygon_area(poly: np.ndarray) -> float:
    """Signed area; positive for counter-clockwise winding."""
    p = np.asarray(poly, dtype=np.float64)
    x, y = p[:, 0], p[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def point_in_convex(poly: np.ndarray, pt, tol: float = 1e-9) -> bool:
    """Membership test for a CCW convex polygon, boundary inclusive."""
    p = np.asarray(poly, dtype=np.float64)
    for i in range(len(p)):
        if _cross2(p[i], p[(i + 1) % len(p)], pt) < -tol:
            return False
    return True


def _line_intersection(p0, d0, p1, d1):
    """Intersection of two parametric 2-D lines; None if parallel."""
    det = d0[0] * d1[1] - d0[1] * d1[0]
    if abs(det) < 1e-12:
        return None, None, None
    dx, dy = p1[0] - p0[0], p1[1] - p0[1]
    t0 = (dx * d1[1] - dy * d1[0]) / det
    t1 = (dx * d0[1] - dy * d0[0]) / det
    return np.array([p0[0] + t0 * d0[0], p0[1] + t0 * d0[1]]), t0, t1


def simplify_to_quad(hull: np.ndarray) -> np.ndarray:
    """Reduce a convex CCW polygon to a 4-gon that contains it.

    Repeatedly deletes one edge: the edge's two neighbors are extended
    to their intersection, and the edge whose removal adds the least
    area goes first.  A 4-gon input is returned unchanged; a triangle
    raises DegenerateInput (caller falls back to a bounding rectangle).
    """
    poly = [np.asarray(v, dtype=np.float64) for v in hull]
    if len(poly) == 3:
        raise DegenerateInput("triangle hull cannot be simplified to a quad")
    if len(poly) < 3:
        raise DegenerateInput("need at least 4 vertices")

    while len(poly) > 4:
        candidates = []  # (area_added, edge_index, new_vertex)
        n = len(poly)
        for i in range(n):
            a_prev, a = poly[(i - 1) % n], poly[i]
            b, b_next = poly[(i + 1) % n], poly[(i + 2) % n]
            e, t_prev, t_next = _line_intersection(a_prev, a - a_prev,
                                                   b_next, b - b_next)
            if e is None or t_prev < 1.0 or t_next < 1.0:
                continue  # parallel neighbors or intersection not beyond the edge
            candidates.append((abs(_cross2(a, b, e)) * 0.5, i, e))
        if not candidates:
            raise DegenerateInput("no valid edge-removal candidate")
        # near-equal costs (symmetric inputs) tie-break to the lowest index
        lo = min(c[0] for c in candidates)
        _, i, e = min((c for c in candidates if c[0] <= lo * (1 + 1e-9) + 1e-15),
                      key=lambda c: c[1])
        if i + 1 < len(poly):
            poly = poly[:i] + [e] + poly[i + 2:]
        else:  # edge wraps from the last vertex to the first
            poly = [e] + poly[1:i]
    return np.array(poly)


def min_area_rect(points: np.ndarray) -> np.ndarray:
    """Minimum-area bounding rectangle of 2-D points, corners CCW.

    Rotating calipers: the optimal rectangle shares a direction with
    some hull edge.
    """
    hull = convex_hull(points)
    best = None
    n = len(hull)
    for i in range(n):
        d = hull[(i + 1) % n] - hull[i]
        d = d / np.linalg.norm(d)
        perp = np.array([-d[1], d[0]])
        proj_d = hull @ d
        proj_p = hull @ perp
        w, h = proj_d.max() - proj_d.min(), proj_p.max() - proj_p.min()
        if best is None or w * h < best[0]:
            best = (w * h, d, perp, proj_d.min(), proj_d.max(),
                    proj_p.min(), proj_p.max())
    _, d, perp, d0, d1, p0, p1 = best
    corners = [d0 * d + p0 * perp, d1 * d + p0 * perp,
               d1 * d + p1 * perp, d0 * d + p1 * perp]
    rect = np.array(corners)
    if polygon_area(rect) < 0:
        rect = rect[::-1]
    return rect


# ---------------------------------------------------------------------------
# Oriented boxes and the separating-axis intersection test

@dataclass(frozen=True)
class OrientedBox:
    """Box with arbitrary orientation: center pose + half extents."""

    pose: Pose
    half_extents: Vec3

    def __post_init__(self):
        object.__setattr__(self, "half_extents",
                           np.asarray(self.half_extents, dtype=np.float64))

    @staticmethod
    def axis_aligned(center, half_extents) -> "OrientedBox":
        return OrientedBox(Pose(quat_identity(), vec3(center)), vec3(half_extents))

    def axes(self) -> np.ndarray:
        """3x3 matrix whose columns are the box's local axes in the world."""
        return quat_to_matrix(self.pose.q)

    def corners(self) -> np.ndarray:
        ax = self.axes()
        h = self.half_extents
        signs = np.array([[sx, sy, sz] for sx in (-1, 1)
                          for sy in (-1, 1) for sz in (-1, 1)], dtype=np.float64)
        return self.pose.t + (signs * h) @ ax.T

    def contains(self, p: Vec3, margin: float = 0.0) -> bool:
        local = self.axes().T @ (vec3(p) - self.pose.t)
        return bool(np.all(np.abs(local) <= self.half_extents + margin))

    def transformed(self, pose: Pose) -> "OrientedBox":
        return OrientedBox(pose @ self.pose, self.half_extents)


def obb_intersect(a: OrientedBox, b: OrientedBox) -> bool:
    """Separating-axis test for two oriented boxes.

    Checks the 6 face normals and 9 edge-pair cross products; touching
    surfaces count as non-intersecting.
    """
    ra = a.axes()
    rb = b.axes()
    # quick reject on bounding spheres
    d = b.pose.t - a.pose.t
    reach = float(np.linalg.norm(a.half_extents) + np.linalg.norm(b.half_extents))
    dist2 = float(d @ d)
    if dist2 >= reach * reach:
        return False

    axes = [ra[:, 0], ra[:, 1], ra[:, 2], rb[:, 0], rb[:, 1], rb[:, 2]]
    for i in range(3):
        for j in range(3):
            c = np.cross(ra[:, i], rb[:, j])
            n = float(np.linalg.norm(c))
            if n > 1e-9:
                axes.append(c / n)
    ha, hb = a.half_extents, b.half_extents
    for axis in axes:
        pa = ha[0] * abs(axis @ ra[:, 0]) + ha[1] * abs(axis @ ra[:, 1]) \
            + ha[2] * abs(axis @ ra[:, 2])
        pb = hb[0] * abs(axis @ rb[:, 0]) + hb[1] * abs(axis @ rb[:, 1]) \
            + hb[2] * abs(axis @ rb[:, 2])
        if abs(float(d @ axis)) >= pa + pb:
            return False
    return True
