"""Command-line front end.

Subcommands wrap the library end to end: perceive lifts a rendered or
recorded detection to articulation parameters, plan decodes waypoint
IK from a mined or pinned base pose, mine writes the placement
heatmap, simulate runs error-injected trials, sweep-radius replays the
radius-robustness experiment, ablate pairs trials with and without
contact correction.  Every command writes its artifacts plus a run
manifest (tool version, input hashes, seed, timestamp) into --out.

Exit codes: 0 success; 1 I/O or parse problems; 2 library-defined
errors (unmet preconditions, degenerate inputs), reported as one JSON
line on stdout; 3 no feasible plan (plan/mine), with partial artifacts
still written.  The manifest timestamp honors SOURCE_DATE_EPOCH so
archived runs can be byte-identical.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import os
import sys
import time
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .articulation import generate_waypoints
from .errors import ArtopenError
from .execution import (HINGE_SUCCESS, ExecutionResult,
                        ablate_contact_correction, radius_sweep, run_trial,
                        waypoints_histogram)
from .geometry import DepthImage, normalize
from .perception import Detection2D, lift_detection, mask_from_pgm
from .pgm import read_pgm
from .placement import (canonical_targets, heatmap_to_csv, heatmap_to_pgm,
                        mine, navigation_target)
from .planner import seq_ik
from .robot import KinematicModel, RobotConfig, neutral_config
from .scenario import Scenario, load_camera, load_scenario

_SEED_SLOTS = {"drawer": "drawer", "cabinet_left_hinge": "cabinet_left",
               "cabinet_right_hinge": "cabinet_right",
               "bottom_hinge": "oven"}


# ---------------------------------------------------------------------------
# manifest and serialization helpers

def _sha256(path: Path) -> str:
    return "sha256:" + hashlib.sha256(path.read_bytes()).hexdigest()


def _timestamp() -> str:
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    moment = int(epoch) if epoch is not None else int(time.time())
    return datetime.fromtimestamp(moment, tz=timezone.utc).isoformat()


def write_manifest(out_dir: Path, command: str, seed: Optional[int],
                   inputs: Sequence[Path], outputs: Sequence[str]) -> Path:
    manifest = {
        "tool": "artopen",
        "version": __version__,
        "command": command,
        "seed": seed,
        "timestamp": _timestamp(),
        "inputs": {str(p): _sha256(Path(p)) for p in inputs},
        "outputs": sorted(outputs),
    }
    path = out_dir / "manifest.json"
    _write_json(path, manifest)
    return path


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _vec(v) -> Optional[list]:
    return None if v is None else [float(x) for x in v]


def _opening_key(scenario: Scenario) -> str:
    return "opening_deg" if scenario.params.atype.hinged else "opening_m"


def _opening_out(scenario: Scenario, value: float) -> float:
    return math.degrees(value) if scenario.params.atype.hinged else value


PLAN_COLUMNS = ("waypoint", "opening", "base_x_m", "base_y_m",
                "base_yaw_deg", "lift_m", "arm_ext_m", "wrist_yaw_deg",
                "wrist_pitch_deg")


def plan_to_csv(path: Path, scenario: Scenario, openings: Sequence[float],
                configs: Sequence[RobotConfig]) -> None:
    header = (PLAN_COLUMNS[0], _opening_key(scenario)) + PLAN_COLUMNS[2:]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for i, config in enumerate(configs):
            writer.writerow([
                i, _opening_out(scenario, openings[i]),
                config.base_x, config.base_y,
                math.degrees(config.base_yaw), config.lift, config.arm_ext,
                math.degrees(config.wrist_yaw),
                math.degrees(config.wrist_pitch)])


def plan_from_csv(path) -> tuple[list[float], list[RobotConfig]]:
    """Re-reads plan.csv; hinged openings come back in radians."""
    openings, configs = [], []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        hinged = header[1] == "opening_deg"
        for row in reader:
            value = float(row[1])
            openings.append(math.radians(value) if hinged else value)
            configs.append(RobotConfig(
                base_x=float(row[2]), base_y=float(row[3]),
                base_yaw=math.radians(float(row[4])), lift=float(row[5]),
                arm_ext=float(row[6]),
                wrist_yaw=math.radians(float(row[7])),
                wrist_pitch=math.radians(float(row[8]))))
    return openings, configs


def sweep_from_csv(path) -> list[tuple[float, float]]:
    out = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        next(reader)
        for row in reader:
            out.append((float(row[0]), math.radians(float(row[1]))))
    return out


def _result_record(scenario: Scenario, trial: int,
                   result: ExecutionResult) -> dict:
    return {
        "trial": trial,
        "grasped": result.grasped,
        "corrections": result.corrections,
        "waypoints_executed": result.waypoints_executed,
        _opening_key(scenario).replace("opening", "final_opening"):
            _opening_out(scenario, result.final_opening),
        "success": result.success,
        "slip_step": result.slip_step,
    }


# ---------------------------------------------------------------------------
# shared command plumbing

def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _seed(args, scenario: Scenario) -> int:
    return args.seed if args.seed is not None else scenario.experiment.seed


def _mined_theta0(scenario: Scenario, model: KinematicModel) -> RobotConfig:
    """Base pose from placement mining (the navigation-target path)."""
    scene = scenario.scene
    grid = scenario.experiment.grid
    if grid is not None:
        heatmap = mine(scene, model, grid)
    else:
        seed = canonical_targets()[_SEED_SLOTS[scene.params.atype.value]]
        heatmap = mine(scene, model, early_exit=True,
                       seed_xy=(seed.x, seed.y))
    best = navigation_target(heatmap)
    return neutral_config(model, *best.world_pose(scene.params))


def _start_config(scenario: Scenario) -> RobotConfig:
    return scenario.start_config(
        lambda: _mined_theta0(scenario, scenario.model))


# ---------------------------------------------------------------------------
# commands

def cmd_perceive(args) -> int:
    scenario = load_scenario(args.scenario)
    det_files = scenario.detection
    if det_files is None:
        raise ValueError("scenario has no detection block (the handle "
                         "keypoint lives there)")

    def pick(flag, stored, what):
        path = Path(flag) if flag else stored
        if path is None:
            raise ValueError(f"no {what} file given; add it to the "
                             f"detection block or pass --{what}")
        return path

    depth_path = pick(args.depth, det_files.depth_pgm, "depth")
    mask_path = pick(args.mask, det_files.mask_pgm, "mask")
    camera_path = pick(args.camera, det_files.camera_json, "camera")

    depth = DepthImage(read_pgm(depth_path))
    mask = mask_from_pgm(mask_path)
    camera = load_camera(camera_path)
    detection = Detection2D(
        mask, scenario.params.atype, det_files.handle_px,
        scenario.params.handle_orientation, det_files.score)
    estimate = lift_detection(detection, depth, camera,
                              robust_plane=args.robust_plane_fit)

    truth = scenario.params
    normal_err = math.degrees(math.acos(float(np.clip(
        np.dot(normalize(estimate.normal), normalize(truth.normal)),
        -1.0, 1.0))))
    payload = {
        "type": estimate.atype.value,
        "handle_m": _vec(estimate.handle),
        "normal": _vec(estimate.normal),
        "handle_orientation": estimate.handle_orientation.value,
        "axis_point_m": _vec(estimate.axis_point),
        "axis_dir": _vec(estimate.axis_dir),
        "radius_m": float(estimate.radius),
        "truth_errors": {
            "handle_m": float(np.linalg.norm(estimate.handle - truth.handle)),
            "normal_deg": normal_err,
            "radius_m": float(abs(estimate.radius - truth.radius)),
        },
    }
    out = _out_dir(args)
    _write_json(out / "params.json", payload)
    write_manifest(out, "perceive", None,
                   [scenario.path, depth_path, mask_path, camera_path],
                   ["params.json"])
    print(f"perceive: radius {payload['radius_m']:.4f} m, handle error "
          f"{payload['truth_errors']['handle_m'] * 1000:.1f} mm "
          f"-> {out / 'params.json'}")
    return 0


def cmd_plan(args) -> int:
    scenario = load_scenario(args.scenario)
    theta0 = _start_config(scenario)
    traj = generate_waypoints(scenario.params, scenario.experiment.target)
    plan = seq_ik(theta0, traj, scenario.scene, scenario.model,
                  retries=args.retries)
    out = _out_dir(args)
    plan_to_csv(out / "plan.csv", scenario, traj.openings, plan.configs)
    write_manifest(out, "plan", None, [scenario.path], ["plan.csv"])
    print(f"plan: {plan.achieved}/{len(traj)} waypoints decoded "
          f"-> {out / 'plan.csv'}")
    return 0 if plan.feasible else 3


def cmd_mine(args) -> int:
    scenario = load_scenario(args.scenario)
    heatmap = mine(scenario.scene, scenario.model, scenario.experiment.grid,
                   target=scenario.experiment.target)
    out = _out_dir(args)
    heatmap_to_csv(heatmap, out / "heatmap.csv")
    heatmap_to_pgm(heatmap, out / "heatmap.pgm")
    outputs = ["heatmap.csv", "heatmap.pgm"]
    feasible = heatmap.max_score == heatmap.max_waypoints
    if feasible:
        best = navigation_target(heatmap)
        _write_json(out / "target.json", {
            "x_m": best.x, "y_m": best.y, "yaw_deg": math.degrees(best.yaw),
            "score": best.score,
            "world_pose": list(best.world_pose(scenario.params))})
        outputs.append("target.json")
    write_manifest(out, "mine", None, [scenario.path], outputs)
    print(f"mine: max score {heatmap.max_score}/{heatmap.max_waypoints} "
          f"-> {out / 'heatmap.csv'}")
    return 0 if feasible else 3


def cmd_simulate(args) -> int:
    scenario = load_scenario(args.scenario)
    seed = _seed(args, scenario)
    theta0 = _start_config(scenario)
    injection = scenario.experiment.injection(seed)
    records = []
    successes = 0
    for trial in range(scenario.experiment.trials):
        errors = injection.sample(scenario.params, trial)
        result = run_trial(scenario.scene, theta0, errors,
                           scenario.experiment.grasp, scenario.model,
                           full_replan=args.replan_after_correction,
                           retries=args.retries)
        successes += result.success
        records.append(_result_record(scenario, trial, result))
    payload = {
        "scenario": scenario.name,
        "seed": seed,
        "trials": scenario.experiment.trials,
        "success_rate": successes / scenario.experiment.trials,
        "results": records,
    }
    out = _out_dir(args)
    _write_json(out / "result.json", payload)
    write_manifest(out, "simulate", seed, [scenario.path], ["result.json"])
    print(f"simulate: {successes}/{scenario.experiment.trials} succeeded "
          f"-> {out / 'result.json'}")
    return 0


def cmd_sweep_radius(args) -> int:
    scenario = load_scenario(args.scenario)
    theta0 = (neutral_config(scenario.model, *scenario.experiment.base_pose)
              if scenario.experiment.base_pose is not None else None)
    curve = radius_sweep(scenario.params, scenario.experiment.radius_deltas,
                         scenario.experiment.grasp, scenario.model,
                         scenario.scene, theta0=theta0)
    out = _out_dir(args)
    with open(out / "sweep.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["delta_r_m", "final_opening_deg", "success"])
        for dr, final in curve:
            writer.writerow([dr, math.degrees(final),
                             int(final >= HINGE_SUCCESS)])
    write_manifest(out, "sweep-radius", None, [scenario.path], ["sweep.csv"])
    finals = ", ".join(f"{dr:+.2f}:{math.degrees(v):.1f}" for dr, v in curve)
    print(f"sweep-radius: {finals} -> {out / 'sweep.csv'}")
    return 0


def cmd_ablate(args) -> int:
    scenario = load_scenario(args.scenario)
    seed = _seed(args, scenario)
    theta0 = _start_config(scenario)
    injection = scenario.experiment.injection(seed)
    outcome = ablate_contact_correction(
        [(scenario.scene, theta0)], injection, scenario.experiment.trials,
        scenario.experiment.grasp, scenario.model,
        full_replan=args.replan_after_correction)
    bins = len(generate_waypoints(scenario.params,
                                  scenario.experiment.target))
    payload = {
        "scenario": scenario.name,
        "seed": seed,
        "trials": scenario.experiment.trials,
        "rate_with_correction": outcome.rate_with,
        "rate_without_correction": outcome.rate_without,
        "gap": outcome.rate_with - outcome.rate_without,
        "waypoints_histogram_with":
            [int(c) for c in waypoints_histogram(outcome.with_results, bins)],
        "waypoints_histogram_without":
            [int(c) for c in waypoints_histogram(outcome.without_results,
                                                 bins)],
    }
    out = _out_dir(args)
    _write_json(out / "ablation.json", payload)
    write_manifest(out, "ablate", seed, [scenario.path], ["ablation.json"])
    print(f"ablate: with {outcome.rate_with:.3f} vs without "
          f"{outcome.rate_without:.3f} -> {out / 'ablation.json'}")
    return 0


# ---------------------------------------------------------------------------
# dispatch

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="artopen",
        description="Perception, planning, and simulated execution for "
                    "opening articulated objects.")
    parser.add_argument("--version", action="version",
                        version=f"artopen {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--scenario", required=True,
                       help="scenario JSON file")
        p.add_argument("--seed", type=int, default=None,
                       help="overrides the scenario's experiment seed")
        p.add_argument("--out", default="artopen-out",
                       help="output directory (created if missing)")
        p.add_argument("--retries", type=int, default=0,
                       help="extra IK retries per rejected waypoint")
        p.add_argument("--replan-after-correction", action="store_true",
                       help="full waypoint replan instead of rigid shift")
        p.add_argument("--robust-plane-fit", action="store_true",
                       help="one 3-sigma outlier-rejection pass in the "
                            "perception plane fit")
        return p

    perceive = common(sub.add_parser(
        "perceive", help="lift a detection to articulation parameters"))
    perceive.add_argument("--depth", help="depth PGM (overrides scenario)")
    perceive.add_argument("--mask", help="mask PGM (overrides scenario)")
    perceive.add_argument("--camera", help="camera JSON (overrides scenario)")
    perceive.set_defaults(handler=cmd_perceive)

    common(sub.add_parser("plan", help="decode waypoint IK from a mined or "
                                       "pinned base pose")) \
        .set_defaults(handler=cmd_plan)
    common(sub.add_parser("mine", help="score base placements into a "
                                       "heatmap")) \
        .set_defaults(handler=cmd_mine)
    common(sub.add_parser("simulate", help="run error-injected trials")) \
        .set_defaults(handler=cmd_simulate)
    common(sub.add_parser("sweep-radius", help="execute plans built from "
                                               "perturbed radii")) \
        .set_defaults(handler=cmd_sweep_radius)
    common(sub.add_parser("ablate", help="paired trials with and without "
                                         "contact correction")) \
        .set_defaults(handler=cmd_ablate)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except ArtopenError as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}))
        return 2
    except (OSError, ValueError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}))
        return 1


if __name__ == "__main__":
    sys.exit(main())
