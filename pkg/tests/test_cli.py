"""Command-line surface: scenario loading, artifacts, exit codes.

Commands run in-process through main() so coverage and tracebacks
work; one subprocess test proves the installed entry point.  Expensive
artifacts (renders, mined heatmaps) are module-scoped fixtures.
"""

import json
import math
import shutil
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from artopen.articulation import ArticulationType, full_travel
from artopen.cli import (main, plan_from_csv, plan_to_csv, sweep_from_csv)
from artopen.geometry import project
from artopen.perception import Mask2D, mask_from_pgm, mask_to_pgm
from artopen.pgm import write_pgm
from artopen.placement import PlacementGrid, heatmap_from_csv, heatmap_to_csv
from artopen.robot import RobotConfig
from artopen.scenario import load_scenario
from artopen.synthetic import camera_looking, render_face

SCENARIOS = Path(__file__).resolve().parents[1] / "scenarios"

DRAWER = SCENARIOS / "drawer.json"
CABINET_RIGHT = SCENARIOS / "cabinet_right.json"
INFEASIBLE = SCENARIOS / "cabinet_infeasible.json"


def run_cli(*argv):
    return main([str(a) for a in argv])


def _with_patch(src: Path, dst: Path, patch) -> Path:
    raw = json.loads(src.read_text())
    patch(raw)
    dst.write_text(json.dumps(raw))
    return dst


# ---------------------------------------------------------------------------
# scenario loading


class TestScenarioLoading:
    def test_canonical_files_load(self):
        for name in ("drawer", "cabinet_left", "cabinet_right", "oven",
                     "drawer_ablation", "cabinet_infeasible"):
            scenario = load_scenario(SCENARIOS / f"{name}.json")
            assert scenario.scene.params is scenario.params

    def test_degrees_convert_at_the_boundary(self, tmp_path):
        path = _with_patch(DRAWER, tmp_path / "s.json", lambda r: r.setdefault(
            "experiment", {}).update({"base_pose": [0.05, -0.10, 45.0],
                                      "errors": {"base_yaw_deg": [-2.0, 2.0]}}))
        scenario = load_scenario(path)
        assert scenario.experiment.base_pose[2] == pytest.approx(math.pi / 4)
        lo, hi = scenario.experiment.error_ranges["base_yaw"]
        assert (lo, hi) == pytest.approx((-math.radians(2), math.radians(2)))

    def test_grid_block(self, tmp_path):
        path = _with_patch(DRAWER, tmp_path / "s.json", lambda r: r.setdefault(
            "experiment", {}).update({"grid": {
                "origin": [-0.5, -0.3], "spacing": 0.1, "nx": 3, "ny": 4,
                "yaw_candidates_deg": [0.0, 90.0]}}))
        grid = load_scenario(path).experiment.grid
        assert (grid.nx, grid.ny, grid.spacing) == (3, 4, 0.1)
        assert grid.yaws == pytest.approx((0.0, math.pi / 2))

    def test_target_deg_rejected_on_drawer(self, tmp_path):
        path = _with_patch(DRAWER, tmp_path / "s.json", lambda r: r.setdefault(
            "experiment", {}).update({"target_deg": 60.0}))
        with pytest.raises(ValueError):
            load_scenario(path)

    def test_target_m_rejected_on_hinged(self, tmp_path):
        path = _with_patch(CABINET_RIGHT, tmp_path / "s.json",
                           lambda r: r.setdefault("experiment", {}).update(
                               {"target_m": 0.2}))
        with pytest.raises(ValueError):
            load_scenario(path)

    def test_unknown_key_rejected(self, tmp_path):
        path = _with_patch(DRAWER, tmp_path / "s.json",
                           lambda r: r["object"].update({"tpyo": 1}))
        with pytest.raises(ValueError, match="schema"):
            load_scenario(path)

    def test_robot_overrides(self, tmp_path):
        path = _with_patch(DRAWER, tmp_path / "s.json", lambda r: r.update(
            {"robot": {"arm_side": 1,
                       "limits": {"lift": [0.2, 0.9],
                                  "wrist_yaw_deg": [-90.0, 180.0]}}}))
        model = load_scenario(path).model
        assert model.arm_side == 1.0
        assert model.limits.lift == (0.2, 0.9)
        assert model.limits.wrist_yaw == pytest.approx(
            (-math.pi / 2, math.pi))


# ---------------------------------------------------------------------------
# plan


@pytest.fixture(scope="module")
def plan_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("plan")
    code = run_cli("plan", "--scenario", DRAWER, "--out", out)
    assert code == 0
    return out


class TestPlan:
    def test_drawer_plan_has_ten_rows(self, plan_dir):
        rows = (plan_dir / "plan.csv").read_text().strip().splitlines()
        assert rows[0].split(",")[:2] == ["waypoint", "opening_m"]
        assert len(rows) == 1 + 10

    def test_openings_span_full_travel(self, plan_dir):
        openings, configs = plan_from_csv(plan_dir / "plan.csv")
        travel = full_travel(ArticulationType.DRAWER)
        assert openings == pytest.approx(list(np.linspace(0.0, travel, 10)))
        assert len(configs) == 10
        # drawer pull: base stays put, arm/yaw do the work
        assert len({(c.base_x, c.base_y) for c in configs}) == 1

    def test_manifest_written(self, plan_dir):
        manifest = json.loads((plan_dir / "manifest.json").read_text())
        assert manifest["tool"] == "artopen"
        assert manifest["command"] == "plan"
        assert manifest["outputs"] == ["plan.csv"]
        digest = manifest["inputs"][str(DRAWER)]
        assert digest.startswith("sha256:") and len(digest) == 7 + 64

    def test_unreachable_base_exits_3_with_partial_csv(self, tmp_path):
        path = _with_patch(DRAWER, tmp_path / "s.json",
                           lambda r: r.setdefault("experiment", {}).update(
                               {"base_pose": [-2.5, 0.0, 0.0]}))
        code = run_cli("plan", "--scenario", path, "--out", tmp_path / "out")
        assert code == 3
        rows = (tmp_path / "out" / "plan.csv").read_text().strip().splitlines()
        assert len(rows) < 1 + 10  # header plus whatever decoded


class TestPlanCsvRoundTrip:
    @settings(max_examples=25, deadline=None)
    @given(st.lists(st.tuples(
        st.floats(0.0, 2.0), st.floats(-2.0, 2.0), st.floats(-2.0, 2.0),
        st.floats(-3.0, 3.0), st.floats(0.1, 1.1), st.floats(0.0, 0.42),
        st.floats(-1.7, 4.0), st.floats(0.0, 1.5)), min_size=1, max_size=6))
    def test_values_survive(self, rows):
        scenario = load_scenario(DRAWER)
        openings = [r[0] for r in rows]
        configs = [RobotConfig(base_x=r[1], base_y=r[2], base_yaw=r[3],
                               lift=r[4], arm_ext=r[5], wrist_yaw=r[6],
                               wrist_pitch=r[7]) for r in rows]
        path = Path("/tmp") / "artopen-roundtrip.csv"
        plan_to_csv(path, scenario, openings, configs)
        back_openings, back_configs = plan_from_csv(path)
        assert back_openings == pytest.approx(openings, abs=1e-12)
        for a, b in zip(configs, back_configs):
            for name in ("base_x", "base_y", "base_yaw", "lift", "arm_ext",
                         "wrist_yaw", "wrist_pitch"):
                assert getattr(a, name) == pytest.approx(
                    getattr(b, name), abs=1e-12)

    def test_hinged_openings_in_degrees(self, tmp_path):
        scenario = load_scenario(CABINET_RIGHT)
        path = tmp_path / "plan.csv"
        plan_to_csv(path, scenario, [0.0, math.pi / 2],
                    [RobotConfig(), RobotConfig()])
        header, first, second = path.read_text().strip().splitlines()
        assert header.split(",")[1] == "opening_deg"
        assert float(second.split(",")[1]) == pytest.approx(90.0)
        openings, _ = plan_from_csv(path)
        assert openings[1] == pytest.approx(math.pi / 2, abs=1e-12)


# ---------------------------------------------------------------------------
# mine


@pytest.fixture(scope="module")
def mined_feasible(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("mine")
    scenario = _with_patch(
        CABINET_RIGHT, tmp / "s.json", lambda r: r.setdefault(
            "experiment", {}).update({"grid": {
                "origin": [-0.70, -0.25], "spacing": 0.05,
                "nx": 6, "ny": 7}}))
    out = tmp / "out"
    code = run_cli("mine", "--scenario", scenario, "--out", out)
    return code, out


@pytest.fixture(scope="module")
def mined_infeasible(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("mine-inf")
    scenario = _with_patch(
        INFEASIBLE, tmp / "s.json", lambda r: r.setdefault(
            "experiment", {}).update({"grid": {
                "origin": [-0.55, -0.75], "spacing": 0.05,
                "nx": 8, "ny": 10}}))
    out = tmp / "out"
    code = run_cli("mine", "--scenario", scenario, "--out", out)
    return code, out


class TestMine:
    def test_feasible_exit_0_with_target(self, mined_feasible):
        code, out = mined_feasible
        assert code == 0
        target = json.loads((out / "target.json").read_text())
        assert target["score"] == 10
        assert (out / "heatmap.pgm").read_bytes().startswith(b"P5\n")

    def test_heatmap_csv_round_trip(self, mined_feasible):
        _, out = mined_feasible
        grid = PlacementGrid(origin=(-0.70, -0.25), spacing=0.05, nx=6, ny=7)
        heatmap = heatmap_from_csv(out / "heatmap.csv", grid, 10)
        assert heatmap.max_score == 10
        again = out / "heatmap2.csv"
        heatmap_to_csv(heatmap, again)
        assert again.read_bytes() == (out / "heatmap.csv").read_bytes()

    def test_infeasible_exit_3_partial_artifacts(self, mined_infeasible):
        code, out = mined_infeasible
        assert code == 3
        assert (out / "heatmap.csv").exists()
        assert (out / "heatmap.pgm").exists()
        assert not (out / "target.json").exists()
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["outputs"] == ["heatmap.csv", "heatmap.pgm"]

    def test_infeasible_heatmap_never_full(self, mined_infeasible):
        _, out = mined_infeasible
        grid = PlacementGrid(origin=(-0.55, -0.75), spacing=0.05, nx=8, ny=10)
        heatmap = heatmap_from_csv(out / "heatmap.csv", grid, 10)
        assert 0 < heatmap.max_score < 10


# ---------------------------------------------------------------------------
# simulate


@pytest.fixture(scope="module")
def quick_drawer(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("sim-scn")
    return _with_patch(DRAWER, tmp / "s.json",
                       lambda r: r["experiment"].update({"trials": 6}))


class TestSimulate:
    def test_same_seed_byte_identical(self, quick_drawer, tmp_path):
        for name in ("a", "b"):
            assert run_cli("simulate", "--scenario", quick_drawer,
                           "--seed", 7, "--out", tmp_path / name) == 0
        assert ((tmp_path / "a" / "result.json").read_bytes()
                == (tmp_path / "b" / "result.json").read_bytes())

    def test_seed_flag_overrides_scenario(self, quick_drawer, tmp_path):
        run_cli("simulate", "--scenario", quick_drawer, "--seed", 11,
                "--out", tmp_path / "out")
        result = json.loads((tmp_path / "out" / "result.json").read_text())
        manifest = json.loads((tmp_path / "out" / "manifest.json").read_text())
        assert result["seed"] == 11
        assert manifest["seed"] == 11

    def test_result_shape(self, quick_drawer, tmp_path):
        run_cli("simulate", "--scenario", quick_drawer, "--out", tmp_path)
        result = json.loads((tmp_path / "result.json").read_text())
        assert result["trials"] == 6 and len(result["results"]) == 6
        rates = [r["success"] for r in result["results"]]
        assert result["success_rate"] == pytest.approx(sum(rates) / 6)
        assert all("final_opening_m" in r for r in result["results"])


# ---------------------------------------------------------------------------
# perceive


@pytest.fixture(scope="module")
def rendered_drawer(tmp_path_factory):
    """Exact depth/mask render of the canonical drawer face plus a
    scenario whose detection block references the files."""
    tmp = tmp_path_factory.mktemp("render")
    camera = camera_looking(np.array([0.0, 0.0, 0.70]),
                            np.array([0.78, 0.0, 0.70]))
    depth, mask = render_face(camera, np.array([0.78, 0.0, 0.70]),
                              np.array([-1.0, 0.0, 0.0]), 0.25, 0.15)
    write_pgm(tmp / "depth.pgm", depth.data)
    mask_to_pgm(mask, tmp / "mask.pgm")
    (tmp / "camera.json").write_text(json.dumps(
        {"position": [0.0, 0.0, 0.70], "look_at": [0.78, 0.0, 0.70]}))
    handle_px = project(camera.pose_in_base.inverse().transform_point(
        np.array([0.78, 0.0, 0.70])), camera)
    scenario = _with_patch(DRAWER, tmp / "s.json", lambda r: r.update(
        {"detection": {"depth_pgm": "depth.pgm", "mask_pgm": "mask.pgm",
                       "camera_json": "camera.json",
                       "handle_px": list(handle_px)}}))
    return tmp, scenario


class TestPerceive:
    def test_exact_render_lifts_exactly(self, rendered_drawer, tmp_path):
        _, scenario = rendered_drawer
        assert run_cli("perceive", "--scenario", scenario,
                       "--out", tmp_path) == 0
        params = json.loads((tmp_path / "params.json").read_text())
        errors = params["truth_errors"]
        assert errors["handle_m"] < 5e-3
        assert errors["normal_deg"] < 0.5
        assert errors["radius_m"] < 5e-3
        assert params["type"] == "drawer"
        assert params["axis_point_m"] is None

    def test_manifest_hashes_all_four_inputs(self, rendered_drawer, tmp_path):
        _, scenario = rendered_drawer
        run_cli("perceive", "--scenario", scenario, "--out", tmp_path)
        manifest = json.loads((tmp_path / "manifest.json").read_text())
        assert len(manifest["inputs"]) == 4

    def test_flags_override_detection_block(self, rendered_drawer, tmp_path):
        # relative references resolve against the scenario's directory,
        # so the broken sibling must live next to the good files
        tmp, scenario = rendered_drawer
        broken = _with_patch(scenario, tmp / "broken-depth.json", lambda r:
                             r["detection"].update({"depth_pgm": "gone.pgm"}))
        assert run_cli("perceive", "--scenario", broken,
                       "--depth", tmp / "depth.pgm",
                       "--out", tmp_path / "out") == 0

    def test_sparse_mask_exits_2(self, rendered_drawer, tmp_path, capsys):
        tmp, scenario = rendered_drawer
        mask = mask_from_pgm(tmp / "mask.pgm")
        keep = mask.pixels()[:10]
        bits = np.zeros_like(mask.bits)
        bits[keep[:, 1], keep[:, 0]] = True
        mask_to_pgm(Mask2D(bits), tmp_path / "tiny.pgm")
        patched = _with_patch(scenario, tmp / "sparse-handle.json", lambda r:
                              r["detection"].update({
                                  "handle_px": [float(keep[0, 0]),
                                                float(keep[0, 1])]}))
        code = run_cli("perceive", "--scenario", patched,
                       "--mask", tmp_path / "tiny.pgm",
                       "--out", tmp_path / "out")
        assert code == 2
        err = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
        assert err["error"] == "InsufficientDepth"


# ---------------------------------------------------------------------------
# sweep-radius and ablate


class TestSweepRadius:
    def test_curve_shape_and_round_trip(self, tmp_path):
        assert run_cli("sweep-radius", "--scenario", CABINET_RIGHT,
                       "--out", tmp_path) == 0
        curve = sweep_from_csv(tmp_path / "sweep.csv")
        deltas = [dr for dr, _ in curve]
        assert deltas == pytest.approx(list(np.arange(-0.10, 0.101, 0.02)))
        finals = dict(curve)
        assert math.degrees(finals[0.0]) == pytest.approx(90.0, abs=1.0)


class TestAblate:
    def test_paired_rates_and_histograms(self, tmp_path):
        scenario = _with_patch(
            SCENARIOS / "drawer_ablation.json", tmp_path / "s.json",
            lambda r: r["experiment"].update({"trials": 10}))
        assert run_cli("ablate", "--scenario", scenario,
                       "--out", tmp_path / "out") == 0
        result = json.loads((tmp_path / "out" / "ablation.json").read_text())
        assert result["trials"] == 10
        assert sum(result["waypoints_histogram_with"]) == 10
        assert sum(result["waypoints_histogram_without"]) == 10
        assert result["gap"] == pytest.approx(
            result["rate_with_correction"] - result["rate_without_correction"])
        assert result["rate_with_correction"] >= result["rate_without_correction"]


# ---------------------------------------------------------------------------
# exit codes and manifests


class TestErrorExits:
    def test_missing_scenario_is_1(self, tmp_path, capsys):
        assert run_cli("plan", "--scenario", tmp_path / "gone.json",
                       "--out", tmp_path) == 1
        err = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
        assert err["error"] == "FileNotFoundError"

    def test_unknown_key_is_1(self, tmp_path):
        path = _with_patch(DRAWER, tmp_path / "s.json",
                           lambda r: r.update({"surprise": True}))
        assert run_cli("plan", "--scenario", path, "--out", tmp_path) == 1

    def test_missing_required_key_is_1(self, tmp_path):
        path = _with_patch(DRAWER, tmp_path / "s.json",
                           lambda r: r["object"].pop("handle"))
        assert run_cli("plan", "--scenario", path, "--out", tmp_path) == 1

    def test_unparseable_json_is_1(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        assert run_cli("plan", "--scenario", path, "--out", tmp_path) == 1

    def test_bad_camera_schema_is_1(self, rendered_drawer, tmp_path):
        tmp, scenario = rendered_drawer
        camera = json.loads((tmp / "camera.json").read_text())
        camera["roll_deg"] = 10.0
        (tmp_path / "camera.json").write_text(json.dumps(camera))
        assert run_cli("perceive", "--scenario", scenario,
                       "--camera", tmp_path / "camera.json",
                       "--out", tmp_path) == 1


class TestManifest:
    def test_hash_changes_iff_input_changes(self, tmp_path, monkeypatch):
        monkeypatch.setenv("SOURCE_DATE_EPOCH", "1700000000")
        scenario = tmp_path / "s.json"
        shutil.copy(DRAWER, scenario)
        run_cli("plan", "--scenario", scenario, "--out", tmp_path / "a")
        run_cli("plan", "--scenario", scenario, "--out", tmp_path / "b")
        assert ((tmp_path / "a" / "manifest.json").read_bytes()
                == (tmp_path / "b" / "manifest.json").read_bytes())
        # one byte of input -> a different recorded hash
        scenario.write_text(scenario.read_text().replace(
            '"name": "drawer"', '"name": "drawre"'))
        run_cli("plan", "--scenario", scenario, "--out", tmp_path / "c")
        before = json.loads((tmp_path / "a" / "manifest.json").read_text())
        after = json.loads((tmp_path / "c" / "manifest.json").read_text())
        assert before["inputs"] != after["inputs"]
        assert before["outputs"] == after["outputs"]

    def test_timestamp_honors_source_date_epoch(self, tmp_path, monkeypatch):
        monkeypatch.setenv("SOURCE_DATE_EPOCH", "1700000000")
        run_cli("plan", "--scenario", DRAWER, "--out", tmp_path)
        manifest = json.loads((tmp_path / "manifest.json").read_text())
        assert manifest["timestamp"] == "2023-11-14T22:13:20+00:00"


def test_installed_entry_point_reports_version():
    proc = subprocess.run(["artopen", "--version"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.strip().startswith("artopen ")
