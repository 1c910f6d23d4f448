"""Canonical synthetic scenes: one per articulation type.

These are desk-scale furniture setups used by the demos and the test
suite: a dresser drawer, left- and right-hinged cabinets, and a
bottom-hinged oven door.  Dimensions are chosen to sit comfortably
inside the robot's workspace; the variant builders below stress the
boundaries (height, radius) instead.
"""

from __future__ import annotations

import math

import numpy as np

from .articulation import (ArticulationParams, ArticulationType,
                           HandleOrientation)
from .planner import Scene, make_scene


def canonical_drawer() -> Scene:
    params = ArticulationParams(
        atype=ArticulationType.DRAWER,
        handle=np.array([0.78, 0.0, 0.70]),
        normal=np.array([-1.0, 0.0, 0.0]),
        handle_orientation=HandleOrientation.HORIZONTAL)
    return make_scene(params, face_center=np.array([0.78, 0.0, 0.70]),
                      face_half_width=0.25, face_half_height=0.15,
                      body_z_center=0.55, body_half_height=0.50)


def canonical_cabinet(hinge: str = "left", radius: float = 0.40,
                      handle_z: float = 0.80) -> Scene:
    """Vertical-axis cabinet door.  hinge = "left" puts the axis on the
    door edge to the robot's left (+y with the face toward -x)."""
    side = 1.0 if hinge == "left" else -1.0
    axis_y = side * 0.5 * (radius + 0.10)
    handle_y = axis_y - side * radius
    atype = (ArticulationType.CABINET_LEFT_HINGE if hinge == "left"
             else ArticulationType.CABINET_RIGHT_HINGE)
    params = ArticulationParams(
        atype=atype,
        handle=np.array([0.85, handle_y, handle_z]),
        normal=np.array([-1.0, 0.0, 0.0]),
        handle_orientation=HandleOrientation.VERTICAL,
        axis_point=np.array([0.85, axis_y, 0.0]),
        axis_dir=np.array([0.0, 0.0, 1.0]))
    face_center = np.array([0.85, (axis_y + handle_y) / 2, handle_z])
    half_w = 0.5 * (radius + 0.10)
    return make_scene(params, face_center=face_center,
                      face_half_width=half_w, face_half_height=0.30,
                      body_z_center=handle_z, body_half_height=0.30)


def canonical_oven() -> Scene:
    params = ArticulationParams(
        atype=ArticulationType.BOTTOM_HINGE,
        handle=np.array([0.85, 0.0, 0.55]),
        normal=np.array([-1.0, 0.0, 0.0]),
        handle_orientation=HandleOrientation.HORIZONTAL,
        axis_point=np.array([0.85, 0.0, 0.10]),
        axis_dir=np.array([0.0, 1.0, 0.0]))
    return make_scene(params, face_center=np.array([0.85, 0.0, 0.325]),
                      face_half_width=0.30, face_half_height=0.225,
                      body_z_center=0.45, body_half_height=0.40)


def drawer_at_height(height: float) -> Scene:
    """Drawer scene with the handle at the given height (feasibility
    sweeps).  The face band and carcass follow the handle."""
    params = ArticulationParams(
        atype=ArticulationType.DRAWER,
        handle=np.array([0.78, 0.0, height]),
        normal=np.array([-1.0, 0.0, 0.0]),
        handle_orientation=HandleOrientation.HORIZONTAL)
    body_hh = max(0.30, height / 2 + 0.10)
    return make_scene(params, face_center=np.array([0.78, 0.0, height]),
                      face_half_width=0.25, face_half_height=0.15,
                      body_z_center=max(height / 2, height + 0.25 - body_hh),
                      body_half_height=body_hh)


def cabinet_with_radius(radius: float, hinge: str = "right") -> Scene:
    """Cabinet scene with a given hinge-to-handle radius (feasibility
    sweeps over door width)."""
    return canonical_cabinet(hinge=hinge, radius=radius)


CANONICAL_BUILDERS = {
    "drawer": canonical_drawer,
    "cabinet_left": lambda: canonical_cabinet("left"),
    "cabinet_right": lambda: canonical_cabinet("right"),
    "oven": canonical_oven,
}

# Base poses (x, y, yaw) from which every canonical scene decodes fully;
# handy for demos and tests.  Real placements come from placement mining.
REFERENCE_BASE_POSES = {
    "drawer": (0.05, -0.10, 0.0),
    "cabinet_left": (0.60, 0.30, -0.79),
    "cabinet_right": (0.15, -0.05, 0.0),
    "oven": (0.20, -0.15, 0.0),
}
