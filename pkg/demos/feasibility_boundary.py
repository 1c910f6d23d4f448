"""Map the workspace boundary over cabinet families.

Two sweeps over synthetic left-hinged cabinets: handle height 0.3 to
1.5 m at the canonical 0.40 m hinge radius, and hinge radius 0.2 to
0.8 m at the canonical 0.80 m handle height.  Each scene is mined on a
reach-covering grid; the printed max score is 10 exactly when some
base placement decodes the whole trajectory.  Expect a few minutes of
runtime on one core: feasible scenes early-exit, infeasible ones must
scan every cell to prove the negative.
"""

import csv
import time
from pathlib import Path

from artopen.experiments import (coverage_grid, sweep_handle_heights,
                                 sweep_hinge_radii, upper_transition)
from artopen.robot import KinematicModel

OUT = Path(__file__).parent / "output"
OUT.mkdir(parents=True, exist_ok=True)

model = KinematicModel()
grid = coverage_grid(model)
print(f"coverage grid: {grid.nx} x {grid.ny} cells, "
      f"max horizontal reach {model.max_horizontal_reach():.3f} m")


def bar(score):
    return ("#" * score).ljust(10, ".")


t0 = time.monotonic()
print("\nhandle height sweep (radius 0.40 m):")
heights = sweep_handle_heights(model, grid=grid)
for p in heights:
    print(f"  {p.value:.2f} m  {bar(p.max_score)}  {p.max_score}/10")

print("\nhinge radius sweep (handle at 0.80 m):")
radii = sweep_hinge_radii(model, grid=grid)
for p in radii:
    print(f"  {p.value:.2f} m  {bar(p.max_score)}  {p.max_score}/10")

h_star = upper_transition(heights, 10)
r_star = upper_transition(radii, 10)
print(f"\nfirst infeasible height going up: {h_star:.2f} m")
print(f"first infeasible radius going up: {r_star:.2f} m")
print(f"total {time.monotonic() - t0:.0f} s")

with open(OUT / "feasibility_boundary.csv", "w", newline="") as fh:
    writer = csv.writer(fh)
    writer.writerow(["sweep", "value_m", "max_score"])
    for p in heights:
        writer.writerow(["handle_height", p.value, p.max_score])
    for p in radii:
        writer.writerow(["hinge_radius", p.value, p.max_score])
print(f"curve written to {OUT / 'feasibility_boundary.csv'}")
