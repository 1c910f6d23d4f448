"""Independent brute-force oracles used to check the library's fast paths.

Everything here is deliberately naive (exhaustive enumeration, dense
sampling, finite differences) and shares no code with the implementations
it checks.
"""

from __future__ import annotations

import itertools
import math

import numpy as np


def hull_oracle(points: np.ndarray) -> np.ndarray:
    """O(n^3) convex hull: an ordered pair (i, j) is a hull edge iff every
    other point lies strictly left of it (collinear extremes folded in by
    keeping only the farthest endpoints).  Returns CCW vertices starting
    from the lexicographically smallest."""
    pts = np.unique(np.asarray(points, dtype=np.float64), axis=0)
    n = len(pts)
    edges = {}
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            d = pts[j] - pts[i]
            ok = True
            for k in range(n):
                if k == i or k == j:
                    continue
                c = d[0] * (pts[k][1] - pts[i][1]) - d[1] * (pts[k][0] - pts[i][0])
                if c < 0:
                    ok = False
                    break
                if c == 0:  # collinear: keep the edge only if k is between i and j
                    t = np.dot(pts[k] - pts[i], d) / np.dot(d, d)
                    if t < 0 or t > 1:
                        ok = False
                        break
            if ok:
                edges[i] = j
    if not edges:
        raise ValueError("no hull edges; degenerate input")
    start = min(edges, key=lambda i: (pts[i][0], pts[i][1]))
    order = [start]
    cur = edges[start]
    while cur != start:
        order.append(cur)
        cur = edges[cur]
    verts = pts[order]
    # drop interior-of-edge (collinear) vertices
    keep = []
    m = len(verts)
    for i in range(m):
        a, b, c = verts[i - 1], verts[i], verts[(i + 1) % m]
        cross = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
        if abs(cross) > 1e-9:
            keep.append(i)
    return verts[keep]


def quad_search_oracle(poly: np.ndarray) -> float:
    """Exhaustive edge-removal search: minimum total added area over every
    removal order that reduces the polygon to 4 vertices.  Feasible for
    inputs of up to ~8 vertices."""

    def line_x(p0, d0, p1, d1):
        det = d0[0] * d1[1] - d0[1] * d1[0]
        if abs(det) < 1e-12:
            return None, None, None
        dx, dy = p1[0] - p0[0], p1[1] - p0[1]
        t0 = (dx * d1[1] - dy * d1[0]) / det
        t1 = (dx * d0[1] - dy * d0[0]) / det
        return (p0[0] + t0 * d0[0], p0[1] + t0 * d0[1]), t0, t1

    def recurse(verts: tuple, added: float, best: float) -> float:
        if added >= best:
            return best
        if len(verts) == 4:
            return added
        n = len(verts)
        for i in range(n):
            a_prev, a = verts[(i - 1) % n], verts[i]
            b, b_next = verts[(i + 1) % n], verts[(i + 2) % n]
            e, tp, tn = line_x(a_prev, (a[0] - a_prev[0], a[1] - a_prev[1]),
                               b_next, (b[0] - b_next[0], b[1] - b_next[1]))
            if e is None or tp < 1.0 or tn < 1.0:
                continue
            tri = abs((b[0] - a[0]) * (e[1] - a[1])
                      - (b[1] - a[1]) * (e[0] - a[0])) * 0.5
            if i + 1 < n:
                nxt = verts[:i] + (e,) + verts[i + 2:]
            else:
                nxt = (e,) + verts[1:i]
            best = recurse(nxt, added + tri, best)
        return best

    verts = tuple((float(x), float(y)) for x, y in np.asarray(poly))
    return recurse(verts, 0.0, math.inf)


def sample_box_points(box, n: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform samples inside an OrientedBox (uses only its public fields)."""
    local = rng.uniform(-1.0, 1.0, size=(n, 3)) * box.half_extents
    return box.pose.t + local @ box.axes().T


def boxes_overlap_sampled(a, b, n: int = 100_000,
                          seed: int = 0) -> bool:
    """Dense-sampling intersection oracle for two oriented boxes."""
    rng = np.random.default_rng(seed)
    for p in sample_box_points(a, n // 2, rng):
        if b.contains(p):
            return True
    for p in sample_box_points(b, n // 2, rng):
        if a.contains(p):
            return True
    return False


def finite_difference_jacobian(f, q: np.ndarray, eps: float = 1e-6) -> np.ndarray:
    """Central-difference Jacobian of f: R^n -> R^m."""
    q = np.asarray(q, dtype=np.float64)
    cols = []
    for i in range(len(q)):
        dq = np.zeros_like(q)
        dq[i] = eps
        cols.append((np.asarray(f(q + dq)) - np.asarray(f(q - dq))) / (2 * eps))
    return np.stack(cols, axis=1)


def rodrigues_oracle(point, axis_point, axis_dir, angle) -> np.ndarray:
    """Rotation about a line via explicit 3x3 matrix construction."""
    k = np.asarray(axis_dir, dtype=np.float64)
    k = k / np.linalg.norm(k)
    kx = np.array([[0, -k[2], k[1]], [k[2], 0, -k[0]], [-k[1], k[0], 0]])
    r = np.eye(3) + math.sin(angle) * kx + (1 - math.cos(angle)) * (kx @ kx)
    p = np.asarray(point, dtype=np.float64) - np.asarray(axis_point, dtype=np.float64)
    return r @ p + np.asarray(axis_point, dtype=np.float64)


def grid_ik_oracle(target_pos, target_yaw, base_x, base_y, model,
                   yaw_step=math.radians(1.0), lin_step=0.005):
    """Brute-force IK over the 4-D joint grid (1 degree revolute, 5 mm
    prismatic), reduced without loss: for each grid base yaw, only wrist
    yaws within one grid step of the exact heading solution can satisfy
    the yaw constraint that tightly, and the position error is convex
    separately in lift and in arm extension, so each 2-D yaw choice needs
    only the grid neighbors of the continuous optima (or the clamped
    limits).  Returns (config_tuple, fingertip, pos_err, yaw_err)
    minimizing (yaw_err rounded to grid, pos_err).
    """
    from artopen.robot import RobotConfig, fingertip_position

    target_pos = np.asarray(target_pos, dtype=np.float64)
    lims = model.limits
    u = model.arm_side
    best = None

    def grid_vals(lo, hi, step, center):
        vals = set()
        for cand in (math.floor(center / step) * step,
                     math.ceil(center / step) * step,
                     lo, hi):
            vals.add(min(max(cand, lo), hi))
        return sorted(vals)

    n_yaw = int(round(2 * math.pi / yaw_step))
    for k in range(n_yaw):
        byaw = -math.pi + k * yaw_step
        exact_w = target_yaw - byaw - u * math.pi / 2
        wyaws = set()
        for wrap in (-2 * math.pi, 0.0, 2 * math.pi):
            w = exact_w + wrap
            for cand in (math.floor(w / yaw_step) * yaw_step,
                         math.ceil(w / yaw_step) * yaw_step):
                if lims.wrist_yaw[0] <= cand <= lims.wrist_yaw[1]:
                    wyaws.add(cand)
        for wyaw in wyaws:
            lift_c = target_pos[2] - model.tip_rise
            for lift in grid_vals(*lims.lift, lin_step, lift_c):
                # tip xy is linear in arm extension; project the target
                probe0 = RobotConfig(base_x, base_y, byaw, lift, 0.0, wyaw)
                probe1 = RobotConfig(base_x, base_y, byaw, lift, 0.1, wyaw)
                p0 = fingertip_position(probe0, model)
                d = (fingertip_position(probe1, model) - p0) / 0.1
                e_c = float(np.dot(target_pos[:2] - p0[:2], d[:2]))
                for e in grid_vals(*lims.arm_ext, lin_step, e_c):
                    cfg = RobotConfig(base_x, base_y, byaw, lift, e, wyaw)
                    tip = fingertip_position(cfg, model)
                    pos_err = float(np.linalg.norm(tip - target_pos))
                    heading = byaw + wyaw + u * math.pi / 2
                    yaw_err = abs(math.remainder(target_yaw - heading,
                                                 2 * math.pi))
                    key = (round(yaw_err / yaw_step), pos_err)
                    if best is None or key < best[0]:
                        best = (key, cfg, tip, pos_err, yaw_err)
    return best[1], best[2], best[3], best[4]
