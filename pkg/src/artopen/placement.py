"""Base-placement mining.

Where should the robot park before it starts pulling?  A candidate base
pose is scored by decoding the full opening trajectory from that pose
with a neutral arm; the score is the number of waypoints accepted before
the first rejection.  Scoring a grid of candidate poses around the
handle yields a heatmap whose argmax is the navigation target.

Cell coordinates live in a handle-relative frame: the origin sits under
the handle, +x points away from the object face (so the robot side is
x < 0) and +y is the face's leftward lateral.  That frame makes mined
targets portable across scenes of the same type regardless of where the
object stands in the world.
"""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Optional, Sequence

import numpy as np

from .articulation import WaypointTrajectory, generate_waypoints
from .errors import BadCount, EmptyHeatmap, OutOfBounds
from .geometry import obb_intersect, wrap_angle
from .planner import Scene, face_frame, seq_ik
from .robot import KinematicModel, RobotConfig, chassis_shape, neutral_config

# Eight headings, evenly spaced, closed under negation so mirrored
# scenes see a mirrored candidate set.  Scan order prefers small |yaw|:
# the first full-score candidate wins, so the recorded yaw is the most
# neutral seed that decodes the whole trajectory.
YAW_CANDIDATES: tuple[float, ...] = tuple(sorted(
    (wrap_angle(k * math.pi / 4) for k in range(-3, 5)),
    key=lambda y: (abs(y), y)))


@dataclass(frozen=True)
class PlacementGrid:
    """Rectangular lattice of candidate base cells, handle-relative."""

    origin: tuple[float, float]
    spacing: float = 0.05
    nx: int = 25
    ny: int = 41
    yaws: tuple[float, ...] = YAW_CANDIDATES

    def __post_init__(self) -> None:
        if self.spacing <= 0.0:
            raise OutOfBounds(f"grid spacing must be positive, got {self.spacing}")
        if self.nx < 1 or self.ny < 1:
            raise BadCount(f"grid needs at least one cell, got {self.nx}x{self.ny}")
        if not self.yaws:
            raise BadCount("grid needs at least one yaw candidate")

    def cell_xy(self, ix: int, iy: int) -> tuple[float, float]:
        return (self.origin[0] + ix * self.spacing,
                self.origin[1] + iy * self.spacing)

    def cells(self) -> Iterator[tuple[int, int]]:
        for ix in range(self.nx):
            for iy in range(self.ny):
                yield ix, iy

    @property
    def cell_count(self) -> int:
        return self.nx * self.ny


def default_grid() -> PlacementGrid:
    """Covers 1.2 m back from the face and 1 m to either side."""
    return PlacementGrid(origin=(-1.2, -1.0), spacing=0.05, nx=25, ny=41)


def handle_frame(params) -> tuple[np.ndarray, float]:
    """Handle-relative frame: returns (origin world xy, frame yaw).

    +x of the frame points along -normal (away from the face, into the
    room where the robot stands); frame yaw is that direction's world
    heading.
    """
    face_frame(params.normal)  # rejects vertical normals
    n = np.asarray(params.normal, dtype=float)
    xhat = -n[:2] / float(np.hypot(n[0], n[1]))
    return np.asarray(params.handle[:2], dtype=float), math.atan2(xhat[1], xhat[0])


def cell_world_pose(params, grid: PlacementGrid, ix: int, iy: int,
                    yaw: float) -> tuple[float, float, float]:
    """World (base_x, base_y, base_yaw) for a cell + yaw candidate."""
    origin, frame_yaw = handle_frame(params)
    cx, cy = grid.cell_xy(ix, iy)
    c, s = math.cos(frame_yaw), math.sin(frame_yaw)
    return (float(origin[0] + c * cx - s * cy),
            float(origin[1] + s * cx + c * cy),
            wrap_angle(yaw + frame_yaw))


@dataclass(frozen=True, eq=False)
class Heatmap:
    """Per-cell best score (waypoints achieved) and the yaw that got it."""

    grid: PlacementGrid
    scores: np.ndarray      # (nx, ny) int16
    best_yaws: np.ndarray   # (nx, ny) float, handle-relative
    max_waypoints: int
    evaluated: int          # < cell_count when mining stopped early

    @property
    def max_score(self) -> int:
        return int(self.scores.max())

    @property
    def complete(self) -> bool:
        return self.evaluated == self.grid.cell_count


@dataclass(frozen=True)
class NavigationTarget:
    """Best mined base placement, handle-relative."""

    x: float
    y: float
    yaw: float
    ix: int
    iy: int
    score: int

    def world_pose(self, params) -> tuple[float, float, float]:
        origin, frame_yaw = handle_frame(params)
        c, s = math.cos(frame_yaw), math.sin(frame_yaw)
        return (float(origin[0] + c * self.x - s * self.y),
                float(origin[1] + s * self.x + c * self.y),
                wrap_angle(self.yaw + frame_yaw))


# ---------------------------------------------------------------------------
# scoring

# Worker context, set once per process so tasks only carry a cell index.
_CTX: Optional[tuple] = None


def _init_worker(scene: Scene, model: KinematicModel, grid: PlacementGrid,
                 traj: WaypointTrajectory) -> None:
    global _CTX
    _CTX = (scene, model, grid, traj)


def _score_cell(idx: int) -> tuple[int, int, float]:
    """Best (score, yaw) over the yaw candidates at one cell.

    Stops probing yaws once a full score appears; later candidates
    cannot beat it, so the early break keeps results deterministic.
    """
    scene, model, grid, traj = _CTX
    ix, iy = divmod(idx, grid.ny)
    full = len(traj)
    best, best_yaw = 0, grid.yaws[0]
    for yaw in grid.yaws:
        bx, by, byaw = cell_world_pose(scene.params, grid, ix, iy, yaw)
        if _chassis_blocked(bx, by, byaw, scene, model):
            continue
        plan = seq_ik(neutral_config(model, bx, by, byaw), traj, scene, model)
        if plan.achieved > best:
            best, best_yaw = plan.achieved, yaw
            if best == full:
                break
    return idx, best, best_yaw


def _chassis_blocked(bx: float, by: float, byaw: float, scene: Scene,
                     model: KinematicModel) -> bool:
    box = chassis_shape(bx, by, byaw, model)
    return any(obb_intersect(box, b) for _, b in scene.boxes_at(0.0))


def mine(scene: Scene, model: KinematicModel,
         grid: Optional[PlacementGrid] = None, *,
         target: Optional[float] = None,
         workers: Optional[int] = None,
         early_exit: bool = False,
         seed_xy: Optional[tuple[float, float]] = None) -> Heatmap:
    """Scores every grid cell; returns the heatmap.

    Scoring is pure per cell, so cells are farmed to worker processes
    and reassembled by index: the result is byte-identical for any
    worker count.  early_exit scans cells nearest seed_xy first and
    stops at the first full-score cell (for boundary sweeps where only
    the max matters); unvisited cells keep score 0.
    """
    if grid is None:
        grid = default_grid()
    traj = generate_waypoints(scene.params, target)
    full = len(traj)
    scores = np.zeros((grid.nx, grid.ny), dtype=np.int16)
    best_yaws = np.full((grid.nx, grid.ny), grid.yaws[0], dtype=float)

    order = list(range(grid.cell_count))
    if early_exit:
        sx, sy = seed_xy if seed_xy is not None else (-0.7, 0.0)
        order.sort(key=lambda idx: (
            math.hypot(grid.cell_xy(*divmod(idx, grid.ny))[0] - sx,
                       grid.cell_xy(*divmod(idx, grid.ny))[1] - sy), idx))

    evaluated = 0
    if early_exit or workers == 1 or grid.cell_count == 1:
        global _CTX
        _CTX = (scene, model, grid, traj)
        try:
            for idx in order:
                _, score, yaw = _score_cell(idx)
                ix, iy = divmod(idx, grid.ny)
                scores[ix, iy], best_yaws[ix, iy] = score, yaw
                evaluated += 1
                if early_exit and score == full:
                    break
        finally:
            _CTX = None
    else:
        chunk = max(1, grid.cell_count // (8 * (workers or 8)))
        with ProcessPoolExecutor(max_workers=workers, initializer=_init_worker,
                                 initargs=(scene, model, grid, traj)) as pool:
            for idx, score, yaw in pool.map(_score_cell, order,
                                            chunksize=chunk):
                ix, iy = divmod(idx, grid.ny)
                scores[ix, iy], best_yaws[ix, iy] = score, yaw
                evaluated += 1
    return Heatmap(grid, scores, best_yaws, full, evaluated)


def navigation_target(heatmap: Heatmap) -> NavigationTarget:
    """Argmax cell of the heatmap.

    Ties break toward (1) the cell nearest the handle footprint, then
    (2) the smallest |yaw|, then (3) lexicographic (ix, iy), so the
    choice is stable across reruns and worker counts.
    """
    top = heatmap.max_score
    if top <= 0:
        raise EmptyHeatmap("no placement reached any waypoint")
    grid = heatmap.grid
    best_key, best = None, None
    for ix, iy in np.argwhere(heatmap.scores == top):
        x, y = grid.cell_xy(int(ix), int(iy))
        yaw = float(heatmap.best_yaws[ix, iy])
        key = (math.hypot(x, y), abs(yaw), int(ix), int(iy))
        if best_key is None or key < best_key:
            best_key = key
            best = NavigationTarget(x, y, yaw, int(ix), int(iy), top)
    return best


# ---------------------------------------------------------------------------
# cached canonical targets

_TARGETS_RESOURCE = "data/navigation_targets.json"


def canonical_targets() -> dict[str, NavigationTarget]:
    """Navigation targets mined once from the canonical scenarios.

    Each entry is a full-score cell of the default-grid heatmap, picked
    to leave arm-extension slack at the pre-grasp: contact correction
    advances the arm, so a placement that decodes at the extension stop
    cannot correct at all even though it plans cleanly.  Shipped as
    package data rather than hard-coded numbers; regenerate with
    save_canonical_targets after changing robot or scene constants.
    """
    import importlib.resources as resources
    raw = json.loads((resources.files("artopen") / _TARGETS_RESOURCE).read_text())
    return {name: NavigationTarget(v["x"], v["y"], v["yaw"],
                                   v["ix"], v["iy"], v["score"])
            for name, v in raw.items()}


def save_canonical_targets(targets: dict[str, NavigationTarget], path) -> None:
    out = {name: {"ix": t.ix, "iy": t.iy, "x": round(t.x, 6),
                  "y": round(t.y, 6), "yaw": t.yaw, "score": t.score}
           for name, t in targets.items()}
    with open(path, "w") as fh:
        json.dump(out, fh, indent=2)
        fh.write("\n")


# ---------------------------------------------------------------------------
# export

CSV_COLUMNS = ("ix", "iy", "x", "y", "best_yaw", "score")


def heatmap_to_csv(heatmap: Heatmap, path) -> None:
    grid = heatmap.grid
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for ix, iy in grid.cells():
            x, y = grid.cell_xy(ix, iy)
            writer.writerow([ix, iy, f"{x:.9g}", f"{y:.9g}",
                             f"{heatmap.best_yaws[ix, iy]:.9g}",
                             int(heatmap.scores[ix, iy])])


def heatmap_to_pgm(heatmap: Heatmap, path) -> None:
    """8-bit render, full score = 255; top row is the +y edge."""
    from .pgm import write_pgm
    scaled = np.round(heatmap.scores.astype(float)
                      * (255.0 / heatmap.max_waypoints)).astype(np.uint8)
    write_pgm(path, scaled.T[::-1])


def heatmap_from_csv(path, grid: PlacementGrid,
                     max_waypoints: int) -> Heatmap:
    scores = np.zeros((grid.nx, grid.ny), dtype=np.int16)
    best_yaws = np.zeros((grid.nx, grid.ny), dtype=float)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != CSV_COLUMNS:
            raise OutOfBounds(f"unexpected heatmap header {header}")
        for row in reader:
            ix, iy = int(row[0]), int(row[1])
            best_yaws[ix, iy] = float(row[4])
            scores[ix, iy] = int(row[5])
    return Heatmap(grid, scores, best_yaws, max_waypoints, grid.cell_count)
