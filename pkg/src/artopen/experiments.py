"""Workspace boundary sweeps over families of synthetic cabinet scenes.

The placement miner answers "where can the robot stand" for one scene.  The
sweeps here ask the complementary question: over a family of scenes that vary
one geometric parameter (handle height, hinge radius), where does a full-score
placement stop existing?  The answer is the practical workspace envelope of
the robot model.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .placement import PlacementGrid, canonical_targets, mine
from .robot import KinematicModel
from .scenarios import canonical_cabinet

__all__ = [
    "BoundaryPoint",
    "HEIGHT_STEPS",
    "RADIUS_STEPS",
    "coverage_grid",
    "sweep_handle_heights",
    "sweep_hinge_radii",
    "upper_transition",
]


def _steps(lo: float, hi: float, step: float) -> tuple[float, ...]:
    n = round((hi - lo) / step)
    return tuple(round(lo + step * i, 10) for i in range(n + 1))


HEIGHT_STEPS = _steps(0.30, 1.50, 0.05)
RADIUS_STEPS = _steps(0.20, 0.80, 0.05)


@dataclass(frozen=True)
class BoundaryPoint:
    """Mined result for one scene of a sweep family."""

    value: float
    max_score: int
    evaluated: int


def coverage_grid(model: KinematicModel, *, spacing: float = 0.05) -> PlacementGrid:
    """Smallest grid that cannot miss a full-score placement.

    A placement can only reach every waypoint if it reaches the first one,
    the closed handle at the cell-frame origin, so any full-score cell lies
    within ``model.max_horizontal_reach()`` of that origin.  The grid spans
    that disc (x in front of the face only, matching the default grid) with
    one spare cell of margin.  Cells outside it may still earn partial
    scores, so heatmaps mined on this grid are only trustworthy for the
    question "does a full-score placement exist".
    """

    reach = model.max_horizontal_reach()
    half = (int(reach / spacing) + 1) * spacing
    nx = round(half / spacing) + 1
    ny = 2 * round(half / spacing) + 1
    return PlacementGrid(origin=(-half, -half), spacing=spacing, nx=nx, ny=ny)


def _default_seed(hinge: str) -> tuple[float, float] | None:
    try:
        target = canonical_targets()[f"cabinet_{hinge}"]
    except (KeyError, OSError):
        return None
    return (target.x, target.y)


def sweep_handle_heights(
    model: KinematicModel | None = None,
    heights: Sequence[float] = HEIGHT_STEPS,
    *,
    radius: float = 0.40,
    hinge: str = "left",
    grid: PlacementGrid | None = None,
    seed_xy: tuple[float, float] | None = None,
) -> list[BoundaryPoint]:
    """Mine max placement score for cabinets with the handle at each height."""

    model = model or KinematicModel()
    grid = grid or coverage_grid(model)
    seed_xy = seed_xy or _default_seed(hinge)
    points = []
    for h in heights:
        scene = canonical_cabinet(hinge, radius=radius, handle_z=h)
        heatmap = mine(scene, model, grid, early_exit=True, seed_xy=seed_xy)
        points.append(BoundaryPoint(h, heatmap.max_score, heatmap.evaluated))
    return points


def sweep_hinge_radii(
    model: KinematicModel | None = None,
    radii: Sequence[float] = RADIUS_STEPS,
    *,
    handle_z: float = 0.80,
    hinge: str = "left",
    grid: PlacementGrid | None = None,
    seed_xy: tuple[float, float] | None = None,
) -> list[BoundaryPoint]:
    """Mine max placement score for cabinets with each hinge radius."""

    model = model or KinematicModel()
    grid = grid or coverage_grid(model)
    seed_xy = seed_xy or _default_seed(hinge)
    points = []
    for r in radii:
        scene = canonical_cabinet(hinge, radius=r, handle_z=handle_z)
        heatmap = mine(scene, model, grid, early_exit=True, seed_xy=seed_xy)
        points.append(BoundaryPoint(r, heatmap.max_score, heatmap.evaluated))
    return points


def upper_transition(points: Sequence[BoundaryPoint], full_score: int) -> float | None:
    """First swept value above the full-score band that fails to reach it.

    Points are sorted by value.  Returns None when no point reaches
    ``full_score`` or nothing degrades above the band.  Raises ValueError if
    scores recover after the transition; the sweeps here should degrade
    monotonically past the boundary, and a recovery means the family is not
    the monotone kind this helper is for.
    """

    ordered = sorted(points, key=lambda p: p.value)
    start = next(
        (i for i, p in enumerate(ordered) if p.max_score == full_score), None
    )
    if start is None:
        return None
    end = start
    while end + 1 < len(ordered) and ordered[end + 1].max_score == full_score:
        end += 1
    above = ordered[end + 1 :]
    if not above:
        return None
    for later in above:
        if later.max_score == full_score:
            raise ValueError(
                f"score recovers to {full_score} at value {later.value}"
            )
    return above[0].value
