"""Open all four canonical objects end to end.

For each object this script mines a base placement, decodes the
waypoint trajectory with sequential IK, then executes one clean trial
(no injected error) and one trial with a 2 cm depth error to show the
contact correction working.  Everything is deterministic.
"""

import numpy as np

from artopen.articulation import generate_waypoints
from artopen.execution import ErrorInjection, GraspModel, run_trial
from artopen.placement import canonical_targets, mine, navigation_target
from artopen.planner import seq_ik
from artopen.robot import KinematicModel, neutral_config
from artopen.scenarios import CANONICAL_BUILDERS

model = KinematicModel()
grasp = GraspModel()
targets = canonical_targets()

print(f"{'object':<14} {'placement (x, y, yaw)':<28} {'decoded':>7} "
      f"{'clean final':>12} {'2cm-err final':>14}")
for name, build in CANONICAL_BUILDERS.items():
    scene = build()
    params = scene.params

    # mine a base placement, seeded at the cached per-type cell so the
    # early-exit scan usually stops after one evaluation
    seed_cell = targets[name]
    heatmap = mine(scene, model, early_exit=True,
                   seed_xy=(seed_cell.x, seed_cell.y))
    best = navigation_target(heatmap)
    pose = best.world_pose(params)
    theta0 = neutral_config(model, *pose)

    # decode the full trajectory from that placement
    plan = seq_ik(theta0, generate_waypoints(params), scene, model)

    # one clean trial, one with a 2 cm depth (approach-axis) error
    clean = run_trial(scene, theta0, ErrorInjection(seed=0).sample(params, 0),
                      grasp, model)
    shifted = run_trial(scene, theta0,
                        ErrorInjection(depth=0.02, seed=0).sample(params, 0),
                        grasp, model)

    unit = "deg" if params.atype.hinged else "m"
    scale = 180.0 / np.pi if params.atype.hinged else 1.0
    pose_txt = f"({pose[0]:+.2f}, {pose[1]:+.2f}, {np.degrees(pose[2]):+.0f} deg)"
    print(f"{name:<14} {pose_txt:<28} {plan.achieved:>4}/10 "
          f"{clean.final_opening * scale:>8.1f} {unit:<3} "
          f"{shifted.final_opening * scale:>9.1f} {unit:<3} "
          f"({shifted.corrections} corrections)")
