"""Mine the oven base-placement heatmap on the full default grid.

Scores every (x, y) cell and yaw candidate by how many of the ten
trajectory waypoints decode from a neutral start there; writes the
heatmap as CSV and as a grayscale PGM, prints an ASCII picture, and
reports the 4-connected region of full-score placements.  Takes
roughly half a minute on one core.
"""

import time
from pathlib import Path

import numpy as np

from artopen.placement import heatmap_to_csv, heatmap_to_pgm, mine, navigation_target
from artopen.robot import KinematicModel
from artopen.scenarios import canonical_oven

OUT = Path(__file__).parent / "output" / "placement"
OUT.mkdir(parents=True, exist_ok=True)

scene = canonical_oven()
model = KinematicModel()

t0 = time.monotonic()
heatmap = mine(scene, model)
print(f"mined {heatmap.evaluated} cells x {len(heatmap.grid.yaws)} yaws "
      f"in {time.monotonic() - t0:.1f} s")

heatmap_to_csv(heatmap, OUT / "oven_heatmap.csv")
heatmap_to_pgm(heatmap, OUT / "oven_heatmap.pgm")

best = navigation_target(heatmap)
print(f"best cell ({best.x:+.2f}, {best.y:+.2f}) yaw "
      f"{np.degrees(best.yaw):+.0f} deg, score {best.score}/10")

# ASCII rendering, handle at the right edge center, robot side on the left
glyphs = " .:-=+*#%@"
grid = heatmap.grid
print(f"\nscore map ({grid.nx} x {grid.ny} cells, 5 cm spacing, "
      f"'@' = all 10 waypoints):")
for iy in range(grid.ny - 1, -1, -1):
    row = "".join(glyphs[min(int(heatmap.scores[ix, iy]), 9)]
                  if heatmap.scores[ix, iy] < 10 else "@"
                  for ix in range(grid.nx))
    print("   " + row)

# largest 4-connected full-score region
full = heatmap.scores == heatmap.max_waypoints
seen = np.zeros_like(full)
largest = 0
for ix, iy in np.argwhere(full):
    if seen[ix, iy]:
        continue
    stack, size = [(ix, iy)], 0
    seen[ix, iy] = True
    while stack:
        cx, cy = stack.pop()
        size += 1
        for nx, ny in ((cx - 1, cy), (cx + 1, cy), (cx, cy - 1), (cx, cy + 1)):
            if (0 <= nx < full.shape[0] and 0 <= ny < full.shape[1]
                    and full[nx, ny] and not seen[nx, ny]):
                seen[nx, ny] = True
                stack.append((nx, ny))
    largest = max(largest, size)
print(f"\nfull-score cells: {int(full.sum())}, largest 4-connected "
      f"region: {largest}")
print(f"artifacts in {OUT}")
